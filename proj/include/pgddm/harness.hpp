#pragma once

#include <atomic>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pgddm/nfe.hpp"
#include "pgddm/oracle.hpp"
#include "pgddm/samplers.hpp"

namespace pgddm {

// What to sample from and what to score with. The reward is shared because
// scenarios are passed around by value.
struct Scenario {
    TabularDataModel model;
    std::shared_ptr<const RewardModel> reward;
    bool oracle = true;
};

// Aggregate metrics of one experiment (a batch of seeded replications).
struct RunMetrics {
    double mean_reward = 0.0;
    double success_rate = std::numeric_limits<double>::quiet_NaN();  // indicator rewards only
    double tv = std::numeric_limits<double>::quiet_NaN();            // oracle scenarios only
    double ess_min = std::numeric_limits<double>::quiet_NaN();
    std::vector<double> ess_trace;           // replication 0
    std::vector<double> iteration_rewards;   // replication 0, PG methods
    double wall_ms = 0.0;
    uint64_t seed = 0;
    NfeCounter nfe_totals;
};

struct ReplicationRecord {
    uint64_t seed = 0;
    double reward = 0.0;
    double success = std::numeric_limits<double>::quiet_NaN();
    double ess_min = std::numeric_limits<double>::quiet_NaN();
    uint64_t x0_rank = 0;
    NfeCounter nfe;
};

struct ExperimentResult {
    RunMetrics metrics;
    std::vector<ReplicationRecord> replications;
    std::vector<SequenceState> outputs;  // selected x0 per replication
};

// Fixed CSV schema shared by run and sweep output. wall_ms is pinned to 0 in
// CSV rows so artifacts stay byte-reproducible; measured wall time lives in
// the metrics JSON.
extern const char* const kCsvHeader;

// Runs `replications` independent seeded runs (replication i uses seed
// base_seed + i), aggregates metrics, and verifies the instrumented denoiser
// counts against the m*k*T / k*T identities.
ExperimentResult run_experiment(const SamplerConfig& cfg, const Scenario& scenario,
                                int replications, const ExecPolicy& exec = {});

void write_experiment_csv(std::ostream& os, const SamplerConfig& cfg,
                          const ExperimentResult& result, bool header = true);

nlohmann::json metrics_to_json(const SamplerConfig& cfg, const RunMetrics& metrics);

// One run_experiment per grid cell; rows carry a leading cell index and a
// trailing error column, and every completed cell is flushed before the next
// starts. Returns false when interrupted, after writing a "# partial"
// trailer line.
bool run_sweep(std::ostream& os, const std::vector<SamplerConfig>& cells,
               const Scenario& scenario, int replications, const ExecPolicy& exec = {},
               const std::atomic<bool>* interrupt = nullptr,
               const std::function<void(int)>& on_cell_done = {});

// Deterministic CSV float rendering ("%.12g"; nan/inf spelled out).
std::string csv_number(double x);

}  // namespace pgddm
