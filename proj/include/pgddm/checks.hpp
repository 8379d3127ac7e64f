#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "pgddm/harness.hpp"

namespace pgddm {

// Statistical and exact-arithmetic checks behind `pgddm check`. Smoke mode
// shrinks replication counts (and widens the purely statistical tolerances
// accordingly) so the battery finishes in seconds; exact-arithmetic checks
// keep their tolerances either way.
struct CheckOptions {
    bool smoke = false;
    uint64_t seed = 0xA5EED;
    ExecPolicy exec;
    // When set, the configured proposal schedule is validated as check 0.
    const SamplerConfig* config_sampler = nullptr;
};

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

// Runs every check, streaming one "[PASS]/[FAIL] name: detail" line per
// check to `log`. Returns the collected results.
std::vector<CheckResult> run_acceptance_checks(const CheckOptions& opts, std::ostream& log);

bool all_passed(const std::vector<CheckResult>& results);

}  // namespace pgddm
