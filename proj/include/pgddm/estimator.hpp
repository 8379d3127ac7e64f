#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pgddm/data_model.hpp"
#include "pgddm/kernels.hpp"
#include "pgddm/reward.hpp"
#include "pgddm/rng.hpp"

namespace pgddm {

enum class EstimatorMode { random, beam, beam_weighted, exact };

EstimatorMode estimator_mode_from_name(const std::string& name);
std::string estimator_mode_name(EstimatorMode mode);

// Exact partial rewards r(xt) = beta log E[exp(r/beta) | xt] memoized over
// the full (V+1)^L masked-state space. Backed by the enumeration oracle;
// used as the "exact" estimator mode on enumerable instances.
class ExactPartialRewardTable {
  public:
    ExactPartialRewardTable(const TabularDataModel& model, const RewardModel& reward, double beta,
                            uint64_t cap = kEnumerationCap);
    double value(const SequenceState& xt) const;
    double beta() const { return beta_; }

  private:
    Vocab vocab_;
    int length_;
    double beta_;
    std::vector<double> values_;
};

// r(c, x_t) estimator configuration. random/beam/beam_weighted approximate
// the completion expectation with phi candidates; exact looks the value up.
struct PartialRewardEstimator {
    EstimatorMode mode = EstimatorMode::beam;
    int phi = 1;
    double beta = 1.0;
    const ExactPartialRewardTable* exact = nullptr;  // required for exact mode

    void validate() const;
};

// Estimates the partial reward of xt.
//  - random(phi): beta * log((1/phi) sum exp(r_i/beta)) over phi i.i.d.
//    completions (unbiased in exp(r/beta), high variance).
//  - beam(phi): the same log-mean-exp over the top-phi beam candidates,
//    unweighted; phi = 1 is the deterministic greedy estimate.
//  - beam_weighted(phi): opt-in variant weighting candidates by their beam
//    scores instead of uniformly.
// A fully unmasked xt short-circuits to its terminal reward in every mode.
// Each terminal-reward evaluation adds 1 to *reward_calls when provided
// (exact mode charges a flat 1).
double estimate_partial_reward(const PartialRewardEstimator& est, const AnalyticDenoiser& denoiser,
                               const RewardModel& reward, const Vocab& vocab,
                               const SequenceState& xt, RngStream& rng,
                               uint64_t* reward_calls = nullptr);

// log w_{t-1} = (r_cur - r_prev) / beta; exponentiation is deferred to
// weight normalization.
double incremental_log_weight(double r_prev, double r_cur, double beta);

}  // namespace pgddm
