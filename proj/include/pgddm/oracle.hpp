#pragma once

#include <iosfwd>
#include <span>
#include <vector>

#include "pgddm/data_model.hpp"
#include "pgddm/parallel.hpp"
#include "pgddm/reward.hpp"
#include "pgddm/rng.hpp"
#include "pgddm/schedule.hpp"

namespace pgddm {

// Probability table over the full V^L sequence space, indexed by
// lexicographic rank.
struct DistributionTable {
    Vocab vocab;
    int length = 0;
    std::vector<double> probs;

    double prob_of(const SequenceState& x0) const { return probs[sequence_rank(vocab, x0)]; }
    // Inverse-CDF draw of a sequence rank.
    uint64_t sample_rank(RngStream& rng) const;
    // CSV rows "sequence,probability", lexicographic order, full precision.
    void write_csv(std::ostream& os) const;
};

// Exact reward-weighted target p*(x0) proportional to
// p_data(x0) * exp(r(x0) / beta), normalized in log domain.
DistributionTable enumerate_target(const TabularDataModel& p_data, const RewardModel& reward,
                                   double beta, uint64_t cap = kEnumerationCap,
                                   const ExecPolicy& exec = {});

// beta * log E[exp(r(x0)/beta)] with the expectation over p_data conditioned
// on the unmasked positions of xt. Exactly the terminal reward when xt is
// fully unmasked.
double exact_partial_reward(const TabularDataModel& p_data, const RewardModel& reward,
                            const SequenceState& xt, double beta,
                            uint64_t cap = kEnumerationCap);

// Relative frequencies over the full sequence space (zero for unseen).
DistributionTable empirical_distribution(const Vocab& vocab, int length,
                                         std::span<const SequenceState> samples);
DistributionTable empirical_from_ranks(const Vocab& vocab, int length,
                                       std::span<const uint64_t> ranks);

// Total variation distance, 0.5 * sum |p - q|; domains must match.
double tv_distance(const DistributionTable& p, const DistributionTable& q);

// Exact joint one-step backward kernel of the masked forward process under
// p_data: K(xs | xt) = sum_{x0 consistent with xt} p(x0 | xt) q(xs | xt, x0),
// enumerated over reachable xs. Returns (state, probability) pairs. This is
// the time reversal the soft-Bellman recursion is exact for.
std::vector<std::pair<SequenceState, double>> exact_backward_kernel(
    const TabularDataModel& p_data, const SequenceState& xt, int t, int T,
    const NoiseSchedule& schedule, uint64_t cap = kEnumerationCap);

}  // namespace pgddm
