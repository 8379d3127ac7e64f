#pragma once

#include <string>
#include <vector>

#include <json.hpp>

#include "pgddm/harness.hpp"

namespace pgddm {

// Parsed run configuration (schema id "pgddm-config/v1"). Sections:
//   scenario: data_model (table/markov document), reward, oracle flag
//   sampler:  method/m/k/T/phi/beta/resample_every/proposal/estimator/...
//   replications, sweep (optional axis lists), output (prefix)
// Unknown keys anywhere are rejected.
struct RunConfig {
    Scenario scenario;
    SamplerConfig sampler;
    int replications = 1;
    bool has_sweep = false;
    std::vector<SamplerConfig> sweep_cells;
    std::string output_prefix = "run";
};

// Throws config_error with a JSON-pointer (and, for parse failures, line)
// reference.
RunConfig parse_config(const nlohmann::json& doc);
RunConfig load_config_file(const std::string& path);

std::shared_ptr<const RewardModel> parse_reward(const nlohmann::json& doc, const Vocab& vocab);

}  // namespace pgddm
