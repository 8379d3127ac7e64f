#include "pgddm/oracle.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>

#include "pgddm/errors.hpp"
#include "pgddm/logmath.hpp"

namespace pgddm {

uint64_t DistributionTable::sample_rank(RngStream& rng) const {
    const double u = rng.next_double();
    double acc = 0.0;
    for (size_t r = 0; r < probs.size(); ++r) {
        acc += probs[r];
        if (u < acc) return r;
    }
    return probs.size() - 1;
}

void DistributionTable::write_csv(std::ostream& os) const {
    os << "sequence,probability\n";
    char buf[64];
    for (uint64_t r = 0; r < probs.size(); ++r) {
        std::snprintf(buf, sizeof(buf), "%.17g", probs[r]);
        os << sequence_string(vocab, sequence_from_rank(vocab, length, r)) << ',' << buf << '\n';
    }
}

DistributionTable enumerate_target(const TabularDataModel& p_data, const RewardModel& reward,
                                   double beta, uint64_t cap, const ExecPolicy& exec) {
    if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
    const uint64_t n = p_data.num_sequences();
    if (n > cap)
        throw enumeration_cap_error("target enumeration over " + std::to_string(n) +
                                    " sequences exceeds cap " + std::to_string(cap));
    const Vocab& vocab = p_data.vocab();
    const int L = p_data.length();

    // Log-domain scores, computed in parallel (disjoint writes), then a
    // max-shifted normalization with a chunk-deterministic sum so the result
    // does not depend on the thread count.
    std::vector<double> logp(n, 0.0);
    parallel_for(static_cast<int64_t>(n), exec, [&](int64_t r) {
        const SequenceState x0 = sequence_from_rank(vocab, L, static_cast<uint64_t>(r));
        const double lp = std::log(p_data.prob(x0));
        logp[static_cast<size_t>(r)] = lp + reward.eval(x0) / beta;
    });
    double max_lp = kNegInf;
    for (double lp : logp) max_lp = std::max(max_lp, lp);
    if (max_lp == kNegInf) throw zero_support_error("target has empty support");
    const double z = deterministic_sum(static_cast<int64_t>(n), exec, [&](int64_t r) {
        return std::exp(logp[static_cast<size_t>(r)] - max_lp);
    });

    DistributionTable table{vocab, L, std::vector<double>(n, 0.0)};
    parallel_for(static_cast<int64_t>(n), exec, [&](int64_t r) {
        table.probs[static_cast<size_t>(r)] = std::exp(logp[static_cast<size_t>(r)] - max_lp) / z;
    });
    return table;
}

namespace {

// Visits every completion of the masked positions of xt, in lexicographic
// order of the filled tokens.
template <typename Fn>
void for_each_completion(const Vocab& vocab, const SequenceState& xt, Fn&& visit,
                         uint64_t cap) {
    std::vector<int> masked;
    for (int i = 0; i < xt.length(); ++i)
        if (vocab.is_mask(xt.tokens[static_cast<size_t>(i)])) masked.push_back(i);
    const uint64_t n = pow_u64(static_cast<uint64_t>(vocab.size), static_cast<int>(masked.size()));
    if (n > cap)
        throw enumeration_cap_error("completion enumeration exceeds cap " + std::to_string(cap));
    SequenceState x0 = xt;
    for (uint64_t c = 0; c < n; ++c) {
        uint64_t rem = c;
        for (size_t j = masked.size(); j-- > 0;) {
            x0.tokens[static_cast<size_t>(masked[j])] =
                static_cast<int32_t>(rem % static_cast<uint64_t>(vocab.size));
            rem /= static_cast<uint64_t>(vocab.size);
        }
        visit(x0);
    }
}

}  // namespace

double exact_partial_reward(const TabularDataModel& p_data, const RewardModel& reward,
                            const SequenceState& xt, double beta, uint64_t cap) {
    if (beta <= 0.0) throw std::invalid_argument("beta must be positive");
    const Vocab& vocab = p_data.vocab();
    check_state(vocab, xt);
    // Single consistent completion: the expectation collapses to the terminal
    // reward, returned without log/exp round trips.
    if (fully_unmasked(vocab, xt)) return reward.eval(xt);

    // beta * [logsumexp(log p + r/beta) - logsumexp(log p)] over completions.
    std::vector<double> num, den;
    for_each_completion(vocab, xt, [&](const SequenceState& x0) {
        const double p = p_data.prob(x0);
        if (p <= 0.0) return;
        const double lp = std::log(p);
        num.push_back(lp + reward.eval(x0) / beta);
        den.push_back(lp);
    }, cap);
    if (den.empty()) throw zero_support_error("partial reward conditional has empty support");
    return beta * (log_sum_exp(num) - log_sum_exp(den));
}

DistributionTable empirical_from_ranks(const Vocab& vocab, int length,
                                       std::span<const uint64_t> ranks) {
    if (ranks.empty()) throw std::invalid_argument("empirical distribution needs samples");
    const uint64_t n = pow_u64(static_cast<uint64_t>(vocab.size), length);
    DistributionTable table{vocab, length, std::vector<double>(n, 0.0)};
    for (uint64_t r : ranks) table.probs[r] += 1.0;
    for (auto& p : table.probs) p /= static_cast<double>(ranks.size());
    return table;
}

DistributionTable empirical_distribution(const Vocab& vocab, int length,
                                         std::span<const SequenceState> samples) {
    std::vector<uint64_t> ranks;
    ranks.reserve(samples.size());
    for (const auto& s : samples) {
        if (!fully_unmasked(vocab, s))
            throw std::invalid_argument("empirical_distribution: masked sample");
        if (s.length() != length) throw std::invalid_argument("sample length mismatch");
        ranks.push_back(sequence_rank(vocab, s));
    }
    return empirical_from_ranks(vocab, length, ranks);
}

double tv_distance(const DistributionTable& p, const DistributionTable& q) {
    if (p.vocab.size != q.vocab.size || p.length != q.length ||
        p.probs.size() != q.probs.size())
        throw std::invalid_argument("tv_distance: domain mismatch");
    double acc = 0.0;
    for (size_t i = 0; i < p.probs.size(); ++i) acc += std::abs(p.probs[i] - q.probs[i]);
    return 0.5 * acc;
}

std::vector<std::pair<SequenceState, double>> exact_backward_kernel(
    const TabularDataModel& p_data, const SequenceState& xt, int t, int T,
    const NoiseSchedule& schedule, uint64_t cap) {
    const Vocab& vocab = p_data.vocab();
    const double alpha_t = schedule.alpha_step(t, T);
    const double alpha_s = schedule.alpha_step(t - 1, T);
    if (alpha_t >= 1.0) throw schedule_degeneracy_error("alpha_t == 1 in exact backward kernel");
    const double unmask = (alpha_s - alpha_t) / (1.0 - alpha_t);
    const double stay = 1.0 - unmask;

    std::vector<int> masked;
    for (int i = 0; i < xt.length(); ++i)
        if (vocab.is_mask(xt.tokens[static_cast<size_t>(i)])) masked.push_back(i);
    const size_t M = masked.size();

    // p(x0 | xt) over consistent completions.
    std::vector<SequenceState> x0s;
    std::vector<double> post;
    double total = 0.0;
    for_each_completion(vocab, xt, [&](const SequenceState& x0) {
        const double p = p_data.prob(x0);
        if (p <= 0.0) return;
        x0s.push_back(x0);
        post.push_back(p);
        total += p;
    }, cap);
    if (x0s.empty()) throw zero_support_error("exact backward kernel: empty support");
    for (auto& p : post) p /= total;

    // Mix q(xs | xt, x0) over the posterior: given x0, each masked position
    // independently unmasks to x0's token or stays masked.
    std::vector<std::pair<SequenceState, double>> out;
    const uint64_t subsets = uint64_t(1) << M;
    for (size_t c = 0; c < x0s.size(); ++c) {
        for (uint64_t sub = 0; sub < subsets; ++sub) {
            SequenceState xs = xt;
            double q = post[c];
            for (size_t j = 0; j < M; ++j) {
                const size_t pos = static_cast<size_t>(masked[j]);
                if (sub & (uint64_t(1) << j)) {
                    xs.tokens[pos] = x0s[c].tokens[pos];
                    q *= unmask;
                } else {
                    q *= stay;
                }
            }
            // Merge duplicates (different x0 can yield the same xs).
            bool found = false;
            for (auto& [state, prob] : out)
                if (state == xs) {
                    prob += q;
                    found = true;
                    break;
                }
            if (!found) out.emplace_back(std::move(xs), q);
        }
    }
    return out;
}

}  // namespace pgddm
