// End-to-end tests of the pgddm binary: exit codes, artifacts, determinism.

#include <sys/wait.h>

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

int g_failures = 0;

#define EXPECT(cond, what)                                                      \
    do {                                                                        \
        if (!(cond)) {                                                          \
            ++g_failures;                                                       \
            std::cerr << "FAILED: " << what << " (" << __FILE__ << ":" << __LINE__ << ")\n"; \
        }                                                                       \
    } while (0)

std::string slurp(const fs::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RunResult {
    int exit_code = -1;
    std::string output;  // stdout + stderr
};

RunResult run_cli(const std::string& args, const fs::path& dir) {
    const fs::path out = dir / "cli_output.txt";
    const std::string cmd =
        std::string(PGDDM_CLI_PATH) + " " + args + " > " + out.string() + " 2>&1";
    const int status = std::system(cmd.c_str());
    RunResult r;
    r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    r.output = slurp(out);
    return r;
}

void write_file(const fs::path& p, const std::string& text) {
    std::ofstream out(p);
    out << text;
}

const char* kSmallScenario = R"({
    "data_model": {"vocab_size": 2, "length": 2, "kind": "table",
                   "probs": [0.25, 0.25, 0.25, 0.25]},
    "reward": {"kind": "pattern", "pattern": [1, 1]},
    "oracle": true
})";

std::string sample_config(int k, const char* method, const char* extra_sampler = "") {
    std::ostringstream os;
    os << "{\"schema\": \"pgddm-config/v1\", \"scenario\": " << kSmallScenario
       << ", \"sampler\": {\"method\": \"" << method << "\", \"m\": 2, \"k\": " << k
       << ", \"T\": 8, \"beta\": 0.5, \"seed\": 11" << extra_sampler
       << "}, \"replications\": 20, \"output\": {\"prefix\": \"t\"}}";
    return os.str();
}

void test_sample_happy_path(const fs::path& dir) {
    const fs::path cfg = dir / "pg.json";
    write_file(cfg, sample_config(4, "pg"));
    const auto r = run_cli("sample --config " + cfg.string() + " --out " + (dir / "out").string(),
                           dir);
    EXPECT(r.exit_code == 0, "sample exits 0: " + r.output);
    EXPECT(fs::exists(dir / "out/t_sequences.txt"), "sequences artifact");
    EXPECT(fs::exists(dir / "out/t_results.csv"), "csv artifact");
    EXPECT(fs::exists(dir / "out/t_metrics.json"), "metrics artifact");

    // 20 replications -> 20 sequence lines; csv has header + 20 + aggregate.
    std::istringstream seq(slurp(dir / "out/t_sequences.txt"));
    int lines = 0;
    std::string line;
    while (std::getline(seq, line)) ++lines;
    EXPECT(lines == 20, "one sequence per replication");
}

void test_sample_rejects_k1_pg(const fs::path& dir) {
    const fs::path cfg = dir / "pg_k1.json";
    write_file(cfg, sample_config(1, "pg"));
    const auto r = run_cli("sample --config " + cfg.string() + " --out " + dir.string(), dir);
    EXPECT(r.exit_code == 2, "pg with k=1 exits 2");
    EXPECT(r.output.find("k >= 2") != std::string::npos, "message cites the k >= 2 requirement");
}

void test_sample_determinism(const fs::path& dir) {
    const fs::path cfg = dir / "det.json";
    write_file(cfg, sample_config(4, "smc"));
    const auto a = run_cli("sample --config " + cfg.string() + " --out " + (dir / "a").string(),
                           dir);
    const auto b = run_cli("sample --config " + cfg.string() + " --out " + (dir / "b").string() +
                               " --threads 2",
                           dir);
    EXPECT(a.exit_code == 0 && b.exit_code == 0, "both runs succeed");
    EXPECT(slurp(dir / "a/t_results.csv") == slurp(dir / "b/t_results.csv"),
           "csv artifacts byte-identical across runs and thread counts");
    EXPECT(slurp(dir / "a/t_sequences.txt") == slurp(dir / "b/t_sequences.txt"),
           "sequence artifacts byte-identical");
}

void test_oracle_closed_form(const fs::path& dir) {
    const auto r = run_cli("oracle --config " PGDDM_CONFIG_DIR "/oracle_two_token.json --out " +
                               dir.string(),
                           dir);
    EXPECT(r.exit_code == 0, "oracle exits 0");
    const std::string csv = slurp(dir / "two_token_oracle.csv");
    EXPECT(csv.find("b,0.7310585") != std::string::npos, "p*(b) = e/(1+e) row present: " + csv);
}

void test_oracle_cap(const fs::path& dir) {
    const fs::path cfg = dir / "cap.json";
    write_file(cfg, R"({"schema": "pgddm-config/v1",
        "scenario": {"data_model": {"vocab_size": 4, "length": 16, "kind": "markov",
            "probs": [0.25,0.25,0.25,0.25,
                      0.25,0.25,0.25,0.25, 0.25,0.25,0.25,0.25,
                      0.25,0.25,0.25,0.25, 0.25,0.25,0.25,0.25]},
            "reward": {"kind": "constant", "value": 0.0}},
        "sampler": {"method": "smc", "k": 2, "T": 4, "seed": 1}})");
    const auto r = run_cli("oracle --config " + cfg.string() + " --out " + dir.string(), dir);
    EXPECT(r.exit_code == 2, "cap-exceeding oracle exits 2");
    EXPECT(r.output.find("cap") != std::string::npos, "cap message present");
}

void test_sweep(const fs::path& dir) {
    const fs::path cfg = dir / "sweep.json";
    std::ostringstream os;
    os << "{\"schema\": \"pgddm-config/v1\", \"scenario\": " << kSmallScenario
       << ", \"sampler\": {\"method\": \"smc\", \"k\": 2, \"T\": 8, \"beta\": 0.5, \"seed\": 3},"
       << "\"sweep\": {\"k\": [2, 4]}, \"replications\": 5, "
       << "\"output\": {\"prefix\": \"sw\"}}";
    write_file(cfg, os.str());
    const auto r = run_cli("sweep --config " + cfg.string() + " --out " + dir.string(), dir);
    EXPECT(r.exit_code == 0, "sweep exits 0: " + r.output);
    std::istringstream csv(slurp(dir / "sw_sweep.csv"));
    int lines = 0;
    std::string line;
    while (std::getline(csv, line)) ++lines;
    EXPECT(lines == 1 + 2 * (5 + 1), "header plus (replications+1) rows per cell");
}

void test_invalid_config(const fs::path& dir) {
    const fs::path cfg = dir / "broken.json";
    write_file(cfg, "{\"schema\": \"pgddm-config/v1\", \n \"scenario\": broken}");
    const auto r = run_cli("sample --config " + cfg.string() + " --out " + dir.string(), dir);
    EXPECT(r.exit_code == 2, "parse failure exits 2");
    EXPECT(r.output.find(":2") != std::string::npos, "line-referenced message: " + r.output);
    const auto missing = run_cli("sample --config /nonexistent.json", dir);
    EXPECT(missing.exit_code == 2, "missing config exits 2");
    const auto noarg = run_cli("sample", dir);
    EXPECT(noarg.exit_code == 2, "missing --config exits 2");
}

void test_check_smoke(const fs::path& dir) {
    const auto t0 = std::chrono::steady_clock::now();
    const auto r = run_cli("check --config " PGDDM_CONFIG_DIR "/default.json --smoke --out " +
                               dir.string(),
                           dir);
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    EXPECT(r.exit_code == 0, "smoke check passes: " + r.output);
    EXPECT(secs < 30.0, "smoke check under 30 s");
    EXPECT(r.output.find("[PASS] criterion 1") != std::string::npos, "per-criterion lines");
    EXPECT(fs::exists(dir / "default_check.txt"), "check report artifact");
}

void test_check_broken_sigma(const fs::path& dir) {
    // sigma_1 = 0.5 violates its bound (must be 0); the validity check fails.
    const fs::path cfg = dir / "badsigma.json";
    write_file(cfg, sample_config(4, "pg",
                                  ", \"proposal\": \"remdm\", \"remask\": {\"kind\": \"table\", "
                                  "\"values\": [0.5, 0, 0, 0, 0, 0, 0, 0]}"));
    const auto r = run_cli("check --config " + cfg.string() + " --smoke --out " + dir.string(),
                           dir);
    EXPECT(r.exit_code == 1, "broken sigma schedule exits 1");
    EXPECT(r.output.find("[FAIL] remdm schedule validity") != std::string::npos,
           "validity check failed: " + r.output);
}

}  // namespace

int main() {
    const fs::path dir = fs::temp_directory_path() / "pgddm_cli_test";
    fs::remove_all(dir);
    fs::create_directories(dir);

    test_sample_happy_path(dir);
    test_sample_rejects_k1_pg(dir);
    test_sample_determinism(dir);
    test_oracle_closed_form(dir);
    test_oracle_cap(dir);
    test_sweep(dir);
    test_invalid_config(dir);
    test_check_smoke(dir);
    test_check_broken_sigma(dir);

    if (g_failures == 0) {
        std::cout << "cli tests passed\n";
        fs::remove_all(dir);
        return 0;
    }
    std::cerr << g_failures << " cli test failure(s); artifacts kept in " << dir << "\n";
    return 1;
}
