#pragma once

#include <span>
#include <vector>

#include "pgddm/data_model.hpp"
#include "pgddm/rng.hpp"
#include "pgddm/schedule.hpp"
#include "pgddm/vocab.hpp"

namespace pgddm {

// Forward noising: keep each position of x0 with probability alpha_t,
// replace it with MASK otherwise. x0 must be fully unmasked.
SequenceState forward_sample(const SequenceState& x0, double t, const NoiseSchedule& schedule,
                             const Vocab& vocab, RngStream& rng);

// Per-position backward transition distribution over V+1 outcomes (index V
// means MASK), given the denoiser row for that position and the current
// token. Step t uses alpha_t = alpha(t/T), alpha_s = alpha((t-1)/T).
//
// MDLM: unmasked tokens are copied; a masked position unmasks with
// probability (alpha_s - alpha_t) / (1 - alpha_t), drawing from the row.
std::vector<double> backward_branch_probs_mdlm(std::span<const double> row, int32_t cur,
                                               const Vocab& vocab, double alpha_s, double alpha_t);

// ReMDM: an unmasked position remasks with probability sigma_t and otherwise
// redraws from the row; a masked position unmasks with mixture coefficient
// (alpha_s - (1 - sigma_t) alpha_t) / (1 - alpha_t) and keeps MASK with the
// complementary coefficient. sigma_t == 0 reduces this to MDLM exactly.
std::vector<double> backward_branch_probs_remdm(std::span<const double> row, int32_t cur,
                                                const Vocab& vocab, double alpha_s, double alpha_t,
                                                double sigma_t);

// One backward step x_t -> x_{t-1}, factorized over positions.
SequenceState backward_step_mdlm(const DenoiserOutput& denoiser_out, const SequenceState& xt,
                                 int t, int T, const NoiseSchedule& schedule, const Vocab& vocab,
                                 RngStream& rng);
SequenceState backward_step_remdm(const DenoiserOutput& denoiser_out, const SequenceState& xt,
                                  int t, int T, const NoiseSchedule& schedule,
                                  const RemaskSchedule& remask, const Vocab& vocab,
                                  RngStream& rng);

enum class Proposal { mdlm, remdm };

// Bundles the proposal choice with its schedules so samplers can step and
// score transitions without caring which kernel is active.
struct BackwardKernel {
    Proposal proposal = Proposal::mdlm;
    NoiseSchedule schedule = NoiseSchedule::linear();
    RemaskSchedule remask;
    int T = 1;

    SequenceState step(const DenoiserOutput& denoiser_out, const SequenceState& xt, int t,
                       const Vocab& vocab, RngStream& rng) const;
    // Exact log p(xs | xt) from the per-position branch probabilities; -inf
    // for unreachable transitions. Used by PGAS ancestor weights.
    double log_transition_prob(const DenoiserOutput& denoiser_out, const SequenceState& xt,
                               const SequenceState& xs, int t, const Vocab& vocab) const;
};

// Candidate completions of the masked positions of xt.
struct Candidate {
    SequenceState x0;
    double score = 1.0;  // product of denoiser row probabilities over masked positions
};

enum class DecodeMode { greedy, beam, random };

// greedy: single argmax completion. beam(phi): top-phi joint completions by
// product score, masked positions filled in ascending index order, truncated
// to the full enumeration when phi exceeds it. random(phi): phi i.i.d.
// completions with each masked position drawn from its row. Ties in argmax
// and beam ranking break toward lower token ids.
std::vector<Candidate> decode_candidates(const DenoiserOutput& denoiser_out,
                                         const SequenceState& xt, const Vocab& vocab,
                                         DecodeMode mode, int phi, RngStream* rng);

}  // namespace pgddm
