#include "pgddm/estimator.hpp"

#include <cmath>
#include <stdexcept>

#include "pgddm/errors.hpp"
#include "pgddm/logmath.hpp"
#include "pgddm/oracle.hpp"

namespace pgddm {

EstimatorMode estimator_mode_from_name(const std::string& name) {
    if (name == "random") return EstimatorMode::random;
    if (name == "beam") return EstimatorMode::beam;
    if (name == "beam_weighted") return EstimatorMode::beam_weighted;
    if (name == "exact") return EstimatorMode::exact;
    throw std::invalid_argument("unknown estimator mode: " + name);
}

std::string estimator_mode_name(EstimatorMode mode) {
    switch (mode) {
        case EstimatorMode::random: return "random";
        case EstimatorMode::beam: return "beam";
        case EstimatorMode::beam_weighted: return "beam_weighted";
        case EstimatorMode::exact: return "exact";
    }
    return "?";
}

ExactPartialRewardTable::ExactPartialRewardTable(const TabularDataModel& model,
                                                 const RewardModel& reward, double beta,
                                                 uint64_t cap)
    : vocab_(model.vocab()), length_(model.length()), beta_(beta) {
    const uint64_t n = pow_u64(static_cast<uint64_t>(vocab_.size) + 1, length_);
    if (n > cap)
        throw enumeration_cap_error("partial-reward table over " + std::to_string(n) +
                                    " masked states exceeds cap");
    values_.assign(n, 0.0);
    const uint64_t base = static_cast<uint64_t>(vocab_.size) + 1;
    SequenceState xt(std::vector<int32_t>(static_cast<size_t>(length_), 0));
    for (uint64_t r = 0; r < n; ++r) {
        uint64_t rem = r;
        for (size_t i = static_cast<size_t>(length_); i-- > 0;) {
            const uint64_t digit = rem % base;
            rem /= base;
            xt.tokens[i] = digit == static_cast<uint64_t>(vocab_.size) ? vocab_.mask_id
                                                                       : static_cast<int32_t>(digit);
        }
        values_[r] = exact_partial_reward(model, reward, xt, beta_, cap);
    }
}

double ExactPartialRewardTable::value(const SequenceState& xt) const {
    if (xt.length() != length_) throw std::invalid_argument("partial-reward table: length mismatch");
    return values_[masked_rank(vocab_, xt)];
}

void PartialRewardEstimator::validate() const {
    if (phi < 1) throw std::invalid_argument("estimator phi must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("estimator beta must be positive");
    if (mode == EstimatorMode::exact && exact == nullptr)
        throw std::invalid_argument("exact estimator mode needs a partial-reward table");
}

double estimate_partial_reward(const PartialRewardEstimator& est, const AnalyticDenoiser& denoiser,
                               const RewardModel& reward, const Vocab& vocab,
                               const SequenceState& xt, RngStream& rng, uint64_t* reward_calls) {
    est.validate();

    // The only completion of an unmasked state is the state itself; return
    // its terminal reward without a log/exp round trip so the value is exact.
    if (fully_unmasked(vocab, xt)) {
        if (reward_calls) *reward_calls += 1;
        return reward.eval(xt);
    }

    if (est.mode == EstimatorMode::exact) {
        if (reward_calls) *reward_calls += 1;
        return est.exact->value(xt);
    }

    const DenoiserOutput dout = denoiser(xt);
    const DecodeMode decode =
        est.mode == EstimatorMode::random ? DecodeMode::random : DecodeMode::beam;
    const auto candidates = decode_candidates(dout, xt, vocab, decode, est.phi, &rng);
    if (reward_calls) *reward_calls += candidates.size();

    // Numerically stable log-mean-exp of r_i / beta, scaled back by beta.
    std::vector<double> terms(candidates.size());
    if (est.mode == EstimatorMode::beam_weighted) {
        std::vector<double> log_scores(candidates.size());
        for (size_t i = 0; i < candidates.size(); ++i) {
            log_scores[i] = std::log(candidates[i].score);
            terms[i] = log_scores[i] + reward.eval(candidates[i].x0) / est.beta;
        }
        return est.beta * (log_sum_exp(terms) - log_sum_exp(log_scores));
    }
    for (size_t i = 0; i < candidates.size(); ++i)
        terms[i] = reward.eval(candidates[i].x0) / est.beta;
    return est.beta * (log_sum_exp(terms) - std::log(static_cast<double>(candidates.size())));
}

double incremental_log_weight(double r_prev, double r_cur, double beta) {
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (!std::isfinite(r_prev) || !std::isfinite(r_cur))
        throw std::invalid_argument("incremental_log_weight: non-finite partial reward");
    return (r_cur - r_prev) / beta;
}

}  // namespace pgddm
