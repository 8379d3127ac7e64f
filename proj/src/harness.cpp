#include "pgddm/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "pgddm/errors.hpp"

namespace pgddm {

const char* const kCsvHeader =
    "method,m,k,T,phi,beta,f,proposal,estimator,seed,nominal_nfe,denoiser_calls,"
    "reward_calls,mean_reward,success_rate,tv,ess_min,wall_ms";

std::string csv_number(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

int effective_m(const SamplerConfig& cfg) {
    return (cfg.method == Method::pg || cfg.method == Method::pgas) ? cfg.m : 1;
}

// One full sampler run; the selected trajectory's x0 plus per-run metrics.
ReplicationRecord run_once(const SamplerConfig& cfg, const Scenario& scenario,
                           const PartialRewardEstimator& estimator, SequenceState* out_x0,
                           std::vector<double>* out_ess_trace,
                           std::vector<double>* out_iteration_rewards) {
    const AnalyticDenoiser denoiser(scenario.model);
    const Vocab& vocab = scenario.model.vocab();
    // Inner loops stay serial: replications are the parallel axis.
    const ExecPolicy serial{1};

    ReplicationRecord rec;
    rec.seed = cfg.seed;
    Trajectory selected;
    std::vector<double> ess_trace;

    switch (cfg.method) {
        case Method::bon: {
            BonResult r = best_of_n(cfg, denoiser, *scenario.reward, serial);
            selected = std::move(r.best);
            rec.nfe = r.nfe;
            break;
        }
        case Method::smc: {
            SmcResult r = smc_run(cfg, denoiser, *scenario.reward, estimator, serial);
            selected = std::move(r.selected);
            rec.nfe = r.nfe;
            ess_trace = std::move(r.ess_trace);
            break;
        }
        case Method::pg:
        case Method::pgas: {
            PgResult r = pg_run(cfg, denoiser, *scenario.reward, estimator, serial);
            selected = std::move(r.reference);
            rec.nfe = r.nfe;
            if (out_iteration_rewards)
                for (const auto& it : r.iterations) out_iteration_rewards->push_back(it.reference_reward);
            for (const auto& it : r.iterations)
                if (std::isfinite(it.ess_min)) ess_trace.push_back(it.ess_min);
            break;
        }
    }

    rec.nfe.nominal_nfe = cfg.nominal_nfe();
    const uint64_t expect_denoiser = static_cast<uint64_t>(effective_m(cfg)) *
                                     static_cast<uint64_t>(cfg.k) *
                                     static_cast<uint64_t>(cfg.steps);
    if (rec.nfe.denoiser_calls != expect_denoiser)
        throw std::logic_error("instrumented denoiser calls " +
                               std::to_string(rec.nfe.denoiser_calls) + " != expected " +
                               std::to_string(expect_denoiser));

    rec.reward = selected.terminal;
    if (scenario.reward->indicator()) rec.success = selected.terminal >= 0.5 ? 1.0 : 0.0;
    if (!ess_trace.empty())
        rec.ess_min = *std::min_element(ess_trace.begin(), ess_trace.end());
    rec.x0_rank = sequence_rank(vocab, selected.x0());
    if (out_x0) *out_x0 = selected.x0();
    if (out_ess_trace) *out_ess_trace = std::move(ess_trace);
    return rec;
}

}  // namespace

ExperimentResult run_experiment(const SamplerConfig& cfg, const Scenario& scenario,
                                int replications, const ExecPolicy& exec) {
    if (replications < 1) throw std::invalid_argument("replications must be >= 1");
    cfg.validate();
    const auto t_start = std::chrono::steady_clock::now();

    // The exact-mode table is shared across replications; estimates are pure
    // lookups so sharing is thread-safe.
    std::optional<ExactPartialRewardTable> exact_table;
    if (cfg.estimator == EstimatorMode::exact && cfg.method != Method::bon)
        exact_table.emplace(scenario.model, *scenario.reward, cfg.beta);
    PartialRewardEstimator estimator{cfg.estimator, cfg.phi, cfg.beta,
                                     exact_table ? &*exact_table : nullptr};

    ExperimentResult result;
    result.replications.assign(static_cast<size_t>(replications), ReplicationRecord{});
    result.outputs.assign(static_cast<size_t>(replications), SequenceState{});
    std::vector<std::vector<double>> traces(static_cast<size_t>(replications));
    std::vector<std::vector<double>> iter_rewards(static_cast<size_t>(replications));

    parallel_for(replications, exec, [&](int64_t i) {
        SamplerConfig rep_cfg = cfg;
        rep_cfg.seed = cfg.seed + static_cast<uint64_t>(i);
        result.replications[static_cast<size_t>(i)] =
            run_once(rep_cfg, scenario, estimator, &result.outputs[static_cast<size_t>(i)],
                     i == 0 ? &traces[0] : nullptr, &iter_rewards[static_cast<size_t>(i)]);
    });

    RunMetrics& m = result.metrics;
    m.seed = cfg.seed;
    m.ess_trace = std::move(traces[0]);
    m.iteration_rewards = std::move(iter_rewards[0]);

    double reward_sum = 0.0, success_sum = 0.0, ess_sum = 0.0;
    int success_n = 0, ess_n = 0;
    for (const auto& rec : result.replications) {
        reward_sum += rec.reward;
        if (!std::isnan(rec.success)) {
            success_sum += rec.success;
            ++success_n;
        }
        if (!std::isnan(rec.ess_min)) {
            ess_sum += rec.ess_min;
            ++ess_n;
        }
        m.nfe_totals.denoiser_calls += rec.nfe.denoiser_calls;
        m.nfe_totals.reward_calls += rec.nfe.reward_calls;
        m.nfe_totals.nominal_nfe += rec.nfe.nominal_nfe;
        m.nfe_totals.init_denoiser_calls += rec.nfe.init_denoiser_calls;
        m.nfe_totals.init_reward_calls += rec.nfe.init_reward_calls;
    }
    m.mean_reward = reward_sum / replications;
    if (success_n > 0) m.success_rate = success_sum / success_n;
    if (ess_n > 0) m.ess_min = ess_sum / ess_n;

    if (scenario.oracle) {
        const DistributionTable target =
            enumerate_target(scenario.model, *scenario.reward, cfg.beta);
        std::vector<uint64_t> ranks(result.replications.size());
        for (size_t i = 0; i < ranks.size(); ++i) ranks[i] = result.replications[i].x0_rank;
        const DistributionTable empirical =
            empirical_from_ranks(scenario.model.vocab(), scenario.model.length(), ranks);
        m.tv = tv_distance(empirical, target);
    }

    m.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() -
                                                          t_start)
                    .count();
    return result;
}

namespace {

void write_row(std::ostream& os, const SamplerConfig& cfg, uint64_t seed, const NfeCounter& nfe,
               double reward, double success, double tv, double ess_min) {
    os << method_name(cfg.method) << ',' << effective_m(cfg) << ',' << cfg.k << ',' << cfg.steps
       << ',' << cfg.phi << ',' << csv_number(cfg.beta) << ',' << cfg.resample_every << ','
       << proposal_name(cfg.proposal) << ',' << estimator_mode_name(cfg.estimator) << ',' << seed
       << ',' << nfe.nominal_nfe << ',' << nfe.denoiser_calls << ',' << nfe.reward_calls << ','
       << csv_number(reward) << ',' << csv_number(success) << ',' << csv_number(tv) << ','
       << csv_number(ess_min) << ",0";
}

}  // namespace

void write_experiment_csv(std::ostream& os, const SamplerConfig& cfg,
                          const ExperimentResult& result, bool header) {
    if (header) os << kCsvHeader << '\n';
    for (const auto& rec : result.replications) {
        write_row(os, cfg, rec.seed, rec.nfe, rec.reward, rec.success, kNaN, rec.ess_min);
        os << '\n';
    }
    // Trailing aggregate row: totaled call counts, averaged metrics, TV of
    // the pooled empirical distribution.
    const RunMetrics& m = result.metrics;
    write_row(os, cfg, m.seed, m.nfe_totals, m.mean_reward, m.success_rate, m.tv, m.ess_min);
    os << '\n';
}

nlohmann::json metrics_to_json(const SamplerConfig& cfg, const RunMetrics& m) {
    nlohmann::json j;
    j["schema"] = "pgddm-metrics/v1";
    j["config"] = {{"method", method_name(cfg.method)},
                   {"m", effective_m(cfg)},
                   {"k", cfg.k},
                   {"T", cfg.steps},
                   {"phi", cfg.phi},
                   {"beta", cfg.beta},
                   {"f", cfg.resample_every},
                   {"proposal", proposal_name(cfg.proposal)},
                   {"estimator", estimator_mode_name(cfg.estimator)},
                   {"seed", cfg.seed}};
    j["mean_reward"] = m.mean_reward;
    j["success_rate"] = m.success_rate;
    j["tv"] = m.tv;
    j["ess_min"] = m.ess_min;
    j["ess_trace"] = m.ess_trace;
    j["iteration_rewards"] = m.iteration_rewards;
    j["wall_ms"] = m.wall_ms;
    j["nfe"] = {{"nominal", m.nfe_totals.nominal_nfe},
                {"denoiser_calls", m.nfe_totals.denoiser_calls},
                {"reward_calls", m.nfe_totals.reward_calls},
                {"init_denoiser_calls", m.nfe_totals.init_denoiser_calls},
                {"init_reward_calls", m.nfe_totals.init_reward_calls}};
    return j;
}

bool run_sweep(std::ostream& os, const std::vector<SamplerConfig>& cells,
               const Scenario& scenario, int replications, const ExecPolicy& exec,
               const std::atomic<bool>* interrupt, const std::function<void(int)>& on_cell_done) {
    os << "cell," << kCsvHeader << ",error\n";
    for (size_t c = 0; c < cells.size(); ++c) {
        if (interrupt && interrupt->load()) {
            os << "# partial: interrupted after " << c << " of " << cells.size() << " cells\n";
            os.flush();
            return false;
        }
        const SamplerConfig& cfg = cells[c];
        std::ostringstream rows;
        try {
            ExperimentResult result = run_experiment(cfg, scenario, replications, exec);
            std::ostringstream body;
            write_experiment_csv(body, cfg, result, false);
            std::istringstream lines(body.str());
            std::string line;
            while (std::getline(lines, line)) rows << c << ',' << line << ",\n";
        } catch (const std::exception& e) {
            // Errors never abort the sweep; they land in the error column.
            std::string msg = e.what();
            for (auto& ch : msg)
                if (ch == ',' || ch == '\n') ch = ';';
            rows << c << ',';
            write_row(rows, cfg, cfg.seed, NfeCounter{}, kNaN, kNaN, kNaN, kNaN);
            rows << ',' << msg << '\n';
        }
        os << rows.str();
        os.flush();
        if (on_cell_done) on_cell_done(static_cast<int>(c));
    }
    return true;
}

}  // namespace pgddm
