#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "pgddm/data_model.hpp"
#include "pgddm/estimator.hpp"
#include "pgddm/kernels.hpp"
#include "pgddm/nfe.hpp"
#include "pgddm/parallel.hpp"
#include "pgddm/reward.hpp"
#include "pgddm/rng.hpp"
#include "pgddm/schedule.hpp"

namespace pgddm {

// Complete denoising trajectory. states[t] holds x_t for t in [0, T], so
// states[T] is the all-MASK start and states[0] the generated sequence.
// partial_rewards[t] records the estimate made at x_t (NaN where none was).
struct Trajectory {
    std::vector<SequenceState> states;
    std::vector<double> partial_rewards;
    double terminal = std::numeric_limits<double>::quiet_NaN();

    int steps() const { return static_cast<int>(states.size()) - 1; }
    const SequenceState& x0() const { return states.front(); }
    const SequenceState& state_at(int t) const { return states[static_cast<size_t>(t)]; }
};

// k weighted trajectories-in-progress plus their cached partial rewards.
struct ParticleSet {
    std::vector<Trajectory> particles;
    std::vector<double> log_weights;
    std::vector<double> cached_partial;
    int cursor_t = 0;

    int count() const { return static_cast<int>(particles.size()); }
};

enum class Method { bon, smc, pg, pgas };
enum class SelectionRule { uniform, argmax_reward };
enum class ResampleScheme { multinomial, systematic };

Method method_from_name(const std::string& name);
std::string method_name(Method m);
Proposal proposal_from_name(const std::string& name);
std::string proposal_name(Proposal p);

// The four scaling axes (m, k, T, phi) plus beta, resampling frequency,
// proposal/estimator choices and the base seed.
struct SamplerConfig {
    Method method = Method::smc;
    int m = 1;                // particle Gibbs iterations
    int k = 1;                // particle count (n for best-of-n)
    int steps = 8;            // T, denoising steps
    int phi = 1;              // reward-estimation samples
    double beta = 1.0;
    int resample_every = 1;   // f; resample steps are {T, T-f, ...} plus {1}
    Proposal proposal = Proposal::mdlm;
    EstimatorMode estimator = EstimatorMode::beam;
    SelectionRule selection = SelectionRule::uniform;
    ResampleScheme resample_scheme = ResampleScheme::multinomial;
    // Draw the new reference proportional to final weights (skipping the
    // final resampling) instead of uniformly from the resampled set.
    bool weighted_reference_selection = false;
    uint64_t seed = 0;
    NoiseSchedule schedule = NoiseSchedule::linear();
    RemaskSchedule remask;

    void validate() const;  // throws std::invalid_argument / config_error
    BackwardKernel kernel() const { return BackwardKernel{proposal, schedule, remask, steps}; }
    uint64_t nominal_nfe() const;
};

// Resample-step layout for frequency f.
bool is_resample_step(int t, int T, int every);
int count_resample_steps(int T, int every);

// Effective sample size (sum w)^2 / sum w^2 of normalized weights, in [1, k].
// Throws degenerate_weights_error when every weight is -inf.
double ess(std::span<const double> log_weights);

// Ancestor draws with replacement proportional to normalized weights.
std::vector<int> resample_indices(std::span<const double> probs, int count, ResampleScheme scheme,
                                  RngStream& rng);

// Full importance resampling of a particle set: k draws with replacement,
// weights reset to uniform (log 0), cached partial rewards copied with their
// ancestors.
ParticleSet resample(const ParticleSet& set, ResampleScheme scheme, RngStream& rng);

// PGAS ancestor index: draws proportional to exp(log_w[i] + log_trans[i]).
// Returns -1 when every combined weight is -inf (caller keeps the current
// ancestor).
int sample_ancestor_index(std::span<const double> log_w, std::span<const double> log_trans,
                          RngStream& rng);

// Unconditioned backward rollout (the k = 1 sampler): all-MASK start, one
// kernel step per t from T down to 1.
Trajectory rollout_trajectory(const SamplerConfig& cfg, const AnalyticDenoiser& denoiser,
                              uint64_t seed, uint64_t iteration, uint64_t particle);

// Forward-noising construction of a trajectory from a clean sequence:
// positions mask progressively, so the result is a valid backward path.
Trajectory forward_noise_trajectory(const SequenceState& x0, const NoiseSchedule& schedule, int T,
                                    const Vocab& vocab, RngStream& rng);

// Test/diagnostic hook into the sweep internals.
struct SweepObserver {
    virtual ~SweepObserver() = default;
    virtual void after_propagate(int t_next, const std::vector<Trajectory>& particles) {
        (void)t_next; (void)particles;
    }
    virtual void after_resample(int t_next, const std::vector<Trajectory>& particles) {
        (void)t_next; (void)particles;
    }
};

struct SmcResult {
    Trajectory selected;
    ParticleSet finals;
    NfeCounter nfe;
    std::vector<double> ess_trace;
};

struct SweepResult {
    Trajectory new_reference;
    ParticleSet finals;
    std::vector<double> ess_trace;
    int selected_index = 0;      // slot the new reference was drawn from
    int ancestor_switches = 0;   // PGAS: reference history replaced
    int ancestor_keeps = 0;      // PGAS: zero total ancestor weight fallback
};

struct PgIterationMetrics {
    double reference_reward = 0.0;
    double ess_min = 0.0;
    int ancestor_switches = 0;
    int ancestor_keeps = 0;
};

struct PgResult {
    Trajectory reference;
    std::vector<PgIterationMetrics> iterations;
    NfeCounter nfe;
};

struct BonResult {
    Trajectory best;
    NfeCounter nfe;
};

// Sequential Monte Carlo over the backward process (Feynman-Kac potentials
// from partial-reward differences), with multinomial resampling at the
// configured steps and uniform (or argmax-reward) final selection.
SmcResult smc_run(const SamplerConfig& cfg, const AnalyticDenoiser& denoiser,
                  const RewardModel& reward, const PartialRewardEstimator& estimator,
                  const ExecPolicy& exec = {});

// One conditional-SMC pass: the reference occupies the last slot at every
// step, resampling redraws only the k-1 free slots, and the new reference is
// drawn from the k final trajectories.
SweepResult csmc_sweep(const Trajectory& reference, const SamplerConfig& cfg,
                       const AnalyticDenoiser& denoiser, const RewardModel& reward,
                       const PartialRewardEstimator& estimator, uint64_t iteration,
                       NfeCounter& nfe, const ExecPolicy& exec = {},
                       SweepObserver* observer = nullptr);

// csmc_sweep plus ancestor sampling: at each resample step the reference
// slot's history is redrawn proportional to w_i * p(x'_{t-1} | x_t^(i)).
SweepResult pgas_sweep(const Trajectory& reference, const SamplerConfig& cfg,
                       const AnalyticDenoiser& denoiser, const RewardModel& reward,
                       const PartialRewardEstimator& estimator, uint64_t iteration,
                       NfeCounter& nfe, const ExecPolicy& exec = {},
                       SweepObserver* observer = nullptr);

// Particle Gibbs: reference initialized by a single-particle run, then m
// conditional-SMC (or PGAS) refinement sweeps.
PgResult pg_run(const SamplerConfig& cfg, const AnalyticDenoiser& denoiser,
                const RewardModel& reward, const PartialRewardEstimator& estimator,
                const ExecPolicy& exec = {});

// n independent rollouts, returns the terminal-reward argmax (first drawn
// wins ties).
BonResult best_of_n(const SamplerConfig& cfg, const AnalyticDenoiser& denoiser,
                    const RewardModel& reward, const ExecPolicy& exec = {});

}  // namespace pgddm
