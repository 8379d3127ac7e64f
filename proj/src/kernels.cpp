#include "pgddm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pgddm/errors.hpp"
#include "pgddm/logmath.hpp"

namespace pgddm {

SequenceState forward_sample(const SequenceState& x0, double t, const NoiseSchedule& schedule,
                             const Vocab& vocab, RngStream& rng) {
    if (!fully_unmasked(vocab, x0))
        throw std::invalid_argument("forward_sample: input must be fully unmasked");
    const double alpha = schedule.alpha_at(t);
    SequenceState xt = x0;
    for (auto& tok : xt.tokens)
        if (!rng.next_bernoulli(alpha)) tok = vocab.mask_id;
    return xt;
}

std::vector<double> backward_branch_probs_mdlm(std::span<const double> row, int32_t cur,
                                               const Vocab& vocab, double alpha_s,
                                               double alpha_t) {
    const size_t V = static_cast<size_t>(vocab.size);
    std::vector<double> out(V + 1, 0.0);
    if (!vocab.is_mask(cur)) {
        out[static_cast<size_t>(cur)] = 1.0;
        return out;
    }
    if (alpha_t >= 1.0)
        throw schedule_degeneracy_error("alpha_t == 1 with a masked position");
    const double unmask = (alpha_s - alpha_t) / (1.0 - alpha_t);
    for (size_t v = 0; v < V; ++v) out[v] = unmask * row[v];
    out[V] = (1.0 - alpha_s) / (1.0 - alpha_t);
    return out;
}

std::vector<double> backward_branch_probs_remdm(std::span<const double> row, int32_t cur,
                                                const Vocab& vocab, double alpha_s, double alpha_t,
                                                double sigma_t) {
    const size_t V = static_cast<size_t>(vocab.size);
    std::vector<double> out(V + 1, 0.0);
    if (!vocab.is_mask(cur)) {
        if (sigma_t < 0.0 || sigma_t > 1.0)
            throw schedule_validity_error("sigma outside [0,1] at an unmasked position");
        // Remask with probability sigma_t, otherwise redraw from the row.
        for (size_t v = 0; v < V; ++v) out[v] = (1.0 - sigma_t) * row[v];
        out[V] = sigma_t;
        return out;
    }
    if (alpha_t >= 1.0)
        throw schedule_degeneracy_error("alpha_t == 1 with a masked position");
    double unmask = (alpha_s - (1.0 - sigma_t) * alpha_t) / (1.0 - alpha_t);
    double stay = (1.0 - alpha_s - sigma_t * alpha_t) / (1.0 - alpha_t);
    if (unmask < -1e-12 || unmask > 1.0 + 1e-12 || stay < -1e-12 || stay > 1.0 + 1e-12)
        throw schedule_validity_error("remdm mixture coefficient outside [0,1]; sigma breaks its bound");
    unmask = std::clamp(unmask, 0.0, 1.0);
    stay = std::clamp(stay, 0.0, 1.0);
    for (size_t v = 0; v < V; ++v) out[v] = unmask * row[v];
    out[V] = stay;
    return out;
}

namespace {

int32_t sample_branch(std::span<const double> probs, const Vocab& vocab, RngStream& rng) {
    const int idx = rng.next_categorical(probs);
    return idx == vocab.size ? vocab.mask_id : static_cast<int32_t>(idx);
}

}  // namespace

SequenceState backward_step_mdlm(const DenoiserOutput& denoiser_out, const SequenceState& xt,
                                 int t, int T, const NoiseSchedule& schedule, const Vocab& vocab,
                                 RngStream& rng) {
    const double alpha_t = schedule.alpha_step(t, T);
    const double alpha_s = schedule.alpha_step(t - 1, T);
    SequenceState xs = xt;
    for (int i = 0; i < xt.length(); ++i) {
        if (!vocab.is_mask(xt.tokens[static_cast<size_t>(i)])) continue;  // copied verbatim
        const auto probs = backward_branch_probs_mdlm(denoiser_out.row(i),
                                                      xt.tokens[static_cast<size_t>(i)], vocab,
                                                      alpha_s, alpha_t);
        xs.tokens[static_cast<size_t>(i)] = sample_branch(probs, vocab, rng);
    }
    return xs;
}

SequenceState backward_step_remdm(const DenoiserOutput& denoiser_out, const SequenceState& xt,
                                  int t, int T, const NoiseSchedule& schedule,
                                  const RemaskSchedule& remask, const Vocab& vocab,
                                  RngStream& rng) {
    const double alpha_t = schedule.alpha_step(t, T);
    const double alpha_s = schedule.alpha_step(t - 1, T);
    const double sigma_t = remask.sigma_at(schedule, t, T);
    SequenceState xs = xt;
    for (int i = 0; i < xt.length(); ++i) {
        const auto probs = backward_branch_probs_remdm(denoiser_out.row(i),
                                                       xt.tokens[static_cast<size_t>(i)], vocab,
                                                       alpha_s, alpha_t, sigma_t);
        xs.tokens[static_cast<size_t>(i)] = sample_branch(probs, vocab, rng);
    }
    return xs;
}

SequenceState BackwardKernel::step(const DenoiserOutput& denoiser_out, const SequenceState& xt,
                                   int t, const Vocab& vocab, RngStream& rng) const {
    if (proposal == Proposal::mdlm)
        return backward_step_mdlm(denoiser_out, xt, t, T, schedule, vocab, rng);
    return backward_step_remdm(denoiser_out, xt, t, T, schedule, remask, vocab, rng);
}

double BackwardKernel::log_transition_prob(const DenoiserOutput& denoiser_out,
                                           const SequenceState& xt, const SequenceState& xs,
                                           int t, const Vocab& vocab) const {
    const double alpha_t = schedule.alpha_step(t, T);
    const double alpha_s = schedule.alpha_step(t - 1, T);
    const double sigma_t =
        proposal == Proposal::remdm ? remask.sigma_at(schedule, t, T) : 0.0;
    double lp = 0.0;
    for (int i = 0; i < xt.length(); ++i) {
        const int32_t cur = xt.tokens[static_cast<size_t>(i)];
        const int32_t nxt = xs.tokens[static_cast<size_t>(i)];
        std::vector<double> probs =
            proposal == Proposal::mdlm
                ? backward_branch_probs_mdlm(denoiser_out.row(i), cur, vocab, alpha_s, alpha_t)
                : backward_branch_probs_remdm(denoiser_out.row(i), cur, vocab, alpha_s, alpha_t,
                                              sigma_t);
        const size_t idx = vocab.is_mask(nxt) ? static_cast<size_t>(vocab.size)
                                              : static_cast<size_t>(nxt);
        const double p = probs[idx];
        if (p <= 0.0) return kNegInf;
        lp += std::log(p);
    }
    return lp;
}

std::vector<Candidate> decode_candidates(const DenoiserOutput& denoiser_out,
                                         const SequenceState& xt, const Vocab& vocab,
                                         DecodeMode mode, int phi, RngStream* rng) {
    if (mode != DecodeMode::greedy && phi < 1)
        throw std::domain_error("decode_candidates: phi must be >= 1");
    check_state(vocab, xt);
    const size_t V = static_cast<size_t>(vocab.size);

    std::vector<int> masked;
    for (int i = 0; i < xt.length(); ++i)
        if (vocab.is_mask(xt.tokens[static_cast<size_t>(i)])) masked.push_back(i);

    if (mode == DecodeMode::greedy) {
        Candidate c{xt, 1.0};
        for (int i : masked) {
            const auto row = denoiser_out.row(i);
            size_t best = 0;
            for (size_t v = 1; v < V; ++v)
                if (row[v] > row[best]) best = v;
            c.x0.tokens[static_cast<size_t>(i)] = static_cast<int32_t>(best);
            c.score *= row[best];
        }
        return {std::move(c)};
    }

    if (mode == DecodeMode::random) {
        if (!rng) throw std::invalid_argument("random decode needs an RNG stream");
        std::vector<Candidate> out;
        out.reserve(static_cast<size_t>(phi));
        for (int s = 0; s < phi; ++s) {
            Candidate c{xt, 1.0};
            for (int i : masked) {
                const auto row = denoiser_out.row(i);
                const size_t v = static_cast<size_t>(rng->next_categorical(row));
                c.x0.tokens[static_cast<size_t>(i)] = static_cast<int32_t>(v);
                c.score *= row[v];
            }
            out.push_back(std::move(c));
        }
        return out;
    }

    // Beam over masked positions in ascending index order. Expansion in token
    // order plus stable sorting makes ranking ties deterministic
    // (lexicographically smallest completion wins).
    std::vector<Candidate> beam{{xt, 1.0}};
    for (int i : masked) {
        const auto row = denoiser_out.row(i);
        std::vector<Candidate> next;
        next.reserve(beam.size() * V);
        for (const auto& c : beam)
            for (size_t v = 0; v < V; ++v) {
                Candidate e = c;
                e.x0.tokens[static_cast<size_t>(i)] = static_cast<int32_t>(v);
                e.score *= row[v];
                next.push_back(std::move(e));
            }
        std::stable_sort(next.begin(), next.end(),
                         [](const Candidate& a, const Candidate& b) { return a.score > b.score; });
        if (next.size() > static_cast<size_t>(phi)) next.resize(static_cast<size_t>(phi));
        beam = std::move(next);
    }
    return beam;
}

}  // namespace pgddm
