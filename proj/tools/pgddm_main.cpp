#include <atomic>
#include <csignal>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "pgddm/checks.hpp"
#include "pgddm/config.hpp"
#include "pgddm/errors.hpp"
#include "pgddm/harness.hpp"

namespace fs = std::filesystem;
using namespace pgddm;

namespace {

std::atomic<bool> g_interrupted{false};

void handle_sigint(int) { g_interrupted.store(true); }

struct CommonArgs {
    std::string config_path;
    std::string out_dir = ".";
    std::optional<uint64_t> seed;
    int threads = 0;
    bool smoke = false;
    int verbosity = 0;
};

int threads_from_env() {
    const char* env = std::getenv("PGDDM_THREADS");
    if (!env) return 0;
    return std::atoi(env);
}

void add_common(CLI::App* cmd, CommonArgs& args) {
    cmd->add_option("--config", args.config_path, "run configuration (JSON)")->required();
    cmd->add_option("--out", args.out_dir, "output directory");
    cmd->add_option("--seed", args.seed, "override the config base seed");
    cmd->add_option("--threads", args.threads, "worker threads (0 = library default)");
    cmd->add_flag("--smoke", args.smoke, "reduced replication counts");
    cmd->add_flag("-v,--verbose", args.verbosity, "log progress (-vv for more)");
}

RunConfig load_and_validate(const CommonArgs& args) {
    RunConfig cfg = load_config_file(args.config_path);
    if (args.seed) cfg.sampler.seed = *args.seed;
    try {
        cfg.sampler.validate();
        for (auto& cell : cfg.sweep_cells) {
            if (args.seed) cell.seed = *args.seed;
            cell.validate();
        }
    } catch (const std::invalid_argument& e) {
        throw config_error(std::string("/sampler: ") + e.what());
    }
    return cfg;
}

ExecPolicy exec_policy(const CommonArgs& args) {
    const int threads = args.threads > 0 ? args.threads : threads_from_env();
    return ExecPolicy{threads};
}

fs::path ensure_out_dir(const CommonArgs& args) {
    fs::path dir(args.out_dir);
    fs::create_directories(dir);
    return dir;
}

int cmd_sample(const CommonArgs& args) {
    const RunConfig cfg = load_and_validate(args);
    if (cfg.has_sweep)
        throw config_error("sample runs a single cell; drop /sweep or use the sweep command");
    const fs::path dir = ensure_out_dir(args);
    const ExecPolicy exec = exec_policy(args);
    const int reps = args.smoke ? std::min(cfg.replications, 10) : cfg.replications;
    if (args.verbosity > 0)
        std::cerr << "sample: " << method_name(cfg.sampler.method) << " x" << reps << " reps\n";

    const ExperimentResult result = run_experiment(cfg.sampler, cfg.scenario, reps, exec);

    {
        std::ofstream seq(dir / (cfg.output_prefix + "_sequences.txt"));
        for (const auto& x0 : result.outputs)
            seq << sequence_string(cfg.scenario.model.vocab(), x0) << '\n';
    }
    {
        std::ofstream csv(dir / (cfg.output_prefix + "_results.csv"));
        write_experiment_csv(csv, cfg.sampler, result);
    }
    {
        std::ofstream json(dir / (cfg.output_prefix + "_metrics.json"));
        json << metrics_to_json(cfg.sampler, result.metrics).dump(2) << '\n';
    }
    if (args.verbosity > 0)
        std::cerr << "sample: mean reward " << result.metrics.mean_reward << ", tv "
                  << result.metrics.tv << '\n';
    return 0;
}

int cmd_sweep(const CommonArgs& args) {
    const RunConfig cfg = load_and_validate(args);
    const std::vector<SamplerConfig> cells =
        cfg.has_sweep ? cfg.sweep_cells : std::vector<SamplerConfig>{cfg.sampler};
    const fs::path dir = ensure_out_dir(args);
    const ExecPolicy exec = exec_policy(args);
    const int reps = args.smoke ? std::min(cfg.replications, 10) : cfg.replications;

    std::signal(SIGINT, handle_sigint);
    std::ofstream csv(dir / (cfg.output_prefix + "_sweep.csv"));
    const bool complete = run_sweep(csv, cells, cfg.scenario, reps, exec, &g_interrupted,
                                    [&](int cell) {
                                        if (args.verbosity > 0)
                                            std::cerr << "sweep: cell " << cell + 1 << "/"
                                                      << cells.size() << " done\n";
                                    });
    return complete ? 0 : 1;
}

int cmd_oracle(const CommonArgs& args) {
    const RunConfig cfg = load_and_validate(args);
    const fs::path dir = ensure_out_dir(args);
    DistributionTable table;
    try {
        table = enumerate_target(cfg.scenario.model, *cfg.scenario.reward, cfg.sampler.beta,
                                 kEnumerationCap, exec_policy(args));
    } catch (const enumeration_cap_error& e) {
        throw config_error(e.what());
    }
    std::ofstream csv(dir / (cfg.output_prefix + "_oracle.csv"));
    table.write_csv(csv);
    return 0;
}

int cmd_check(const CommonArgs& args) {
    const RunConfig cfg = load_and_validate(args);
    const fs::path dir = ensure_out_dir(args);

    CheckOptions opts;
    opts.smoke = args.smoke;
    opts.seed = cfg.sampler.seed != 0 ? cfg.sampler.seed : 0xA5EED;
    if (args.seed) opts.seed = *args.seed;
    opts.exec = exec_policy(args);
    opts.config_sampler = &cfg.sampler;

    std::ofstream report(dir / (cfg.output_prefix + "_check.txt"));
    struct Tee : std::streambuf {
        std::streambuf *a, *b;
        int overflow(int ch) override {
            if (ch != EOF) {
                a->sputc(static_cast<char>(ch));
                b->sputc(static_cast<char>(ch));
            }
            return ch;
        }
    } tee;
    tee.a = std::cout.rdbuf();
    tee.b = report.rdbuf();
    std::ostream log(&tee);

    const auto results = run_acceptance_checks(opts, log);
    const bool ok = all_passed(results);
    log << (ok ? "all checks passed" : "CHECK FAILURES PRESENT") << '\n';
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"reward-guided masked-diffusion sampling (best-of-n / SMC / PG / PGAS)"};
    app.require_subcommand(1);

    CommonArgs sample_args, sweep_args, oracle_args, check_args;
    CLI::App* sample = app.add_subcommand("sample", "run one sampler cell, write artifacts");
    add_common(sample, sample_args);
    CLI::App* sweep = app.add_subcommand("sweep", "run a config grid, write tidy CSV");
    add_common(sweep, sweep_args);
    CLI::App* oracle = app.add_subcommand("oracle", "enumerate the exact target distribution");
    add_common(oracle, oracle_args);
    CLI::App* check = app.add_subcommand("check", "run the statistical acceptance battery");
    add_common(check, check_args);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 2;
    }

    try {
        if (sample->parsed()) return cmd_sample(sample_args);
        if (sweep->parsed()) return cmd_sweep(sweep_args);
        if (oracle->parsed()) return cmd_oracle(oracle_args);
        if (check->parsed()) return cmd_check(check_args);
    } catch (const config_error& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
