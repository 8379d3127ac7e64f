// Benchmark comparing the serial reference paths against the OpenMP ones,
// verifying along the way that both produce identical bytes.

#include <chrono>
#include <cstdio>
#include <sstream>
#include <string>

#include "pgddm/harness.hpp"
#include "pgddm/oracle.hpp"

using namespace pgddm;

namespace {

using Clock = std::chrono::steady_clock;

template <typename Fn>
double time_ms(Fn&& fn) {
    const auto t0 = Clock::now();
    fn();
    return std::chrono::duration<double, std::milli>(Clock::now() - t0).count();
}

Scenario bench_scenario(int vocab, int length) {
    std::vector<double> init(static_cast<size_t>(vocab), 1.0 / vocab);
    std::vector<double> trans;
    for (int r = 0; r < vocab; ++r)
        for (int c = 0; c < vocab; ++c)
            trans.push_back(r == c ? 0.55 : 0.45 / (vocab - 1));
    Scenario s;
    s.model = TabularDataModel::markov(Vocab(vocab), length, init, trans);
    s.reward = std::make_shared<PatternReward>(std::vector<int32_t>{1, 1});
    return s;
}

void report(const char* name, double serial_ms, double parallel_ms, bool identical) {
    std::printf("%-28s serial %9.1f ms   omp %9.1f ms   speedup %.2fx   identical: %s\n", name,
                serial_ms, parallel_ms, serial_ms / parallel_ms, identical ? "yes" : "NO");
}

}  // namespace

int main() {
    std::printf("hardware threads: %d\n\n", hardware_threads());

    {
        // Oracle enumeration over 6^7 = 279936 sequences.
        const Scenario s = bench_scenario(6, 7);
        DistributionTable serial_table, parallel_table;
        const double t_serial = time_ms([&] {
            serial_table = enumerate_target(s.model, *s.reward, 0.5, kEnumerationCap, ExecPolicy{1});
        });
        const double t_parallel = time_ms([&] {
            parallel_table = enumerate_target(s.model, *s.reward, 0.5, kEnumerationCap, ExecPolicy{0});
        });
        bool identical = serial_table.probs.size() == parallel_table.probs.size();
        for (size_t i = 0; identical && i < serial_table.probs.size(); ++i)
            identical = serial_table.probs[i] == parallel_table.probs[i];
        report("enumerate_target 6^7", t_serial, t_parallel, identical);
    }

    {
        // Particle Gibbs replication batch on the default-sized scenario.
        const Scenario s = bench_scenario(4, 6);
        SamplerConfig cfg;
        cfg.method = Method::pg;
        cfg.m = 2;
        cfg.k = 8;
        cfg.steps = 12;
        cfg.beta = 0.1;
        cfg.estimator = EstimatorMode::beam;
        cfg.seed = 7;
        const int reps = 2000;

        auto render = [&](int threads) {
            const ExperimentResult result = run_experiment(cfg, s, reps, ExecPolicy{threads});
            std::ostringstream os;
            write_experiment_csv(os, cfg, result);
            return os.str();
        };
        std::string serial_csv, parallel_csv;
        const double t_serial = time_ms([&] { serial_csv = render(1); });
        const double t_parallel = time_ms([&] { parallel_csv = render(0); });
        report("pg run_experiment x2000", t_serial, t_parallel, serial_csv == parallel_csv);
    }

    {
        // Best-of-n batch (pure rollouts).
        const Scenario s = bench_scenario(4, 6);
        SamplerConfig cfg;
        cfg.method = Method::bon;
        cfg.k = 64;
        cfg.steps = 12;
        cfg.seed = 7;
        const int reps = 2000;
        auto render = [&](int threads) {
            const ExperimentResult result = run_experiment(cfg, s, reps, ExecPolicy{threads});
            std::ostringstream os;
            write_experiment_csv(os, cfg, result);
            return os.str();
        };
        std::string serial_csv, parallel_csv;
        const double t_serial = time_ms([&] { serial_csv = render(1); });
        const double t_parallel = time_ms([&] { parallel_csv = render(0); });
        report("bon run_experiment x2000", t_serial, t_parallel, serial_csv == parallel_csv);
    }

    return 0;
}
