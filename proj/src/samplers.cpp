#include "pgddm/samplers.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "pgddm/errors.hpp"
#include "pgddm/logmath.hpp"

namespace pgddm {

namespace {
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
}

Method method_from_name(const std::string& name) {
    if (name == "bon") return Method::bon;
    if (name == "smc") return Method::smc;
    if (name == "pg") return Method::pg;
    if (name == "pgas") return Method::pgas;
    throw std::invalid_argument("unknown method: " + name);
}

std::string method_name(Method m) {
    switch (m) {
        case Method::bon: return "bon";
        case Method::smc: return "smc";
        case Method::pg: return "pg";
        case Method::pgas: return "pgas";
    }
    return "?";
}

Proposal proposal_from_name(const std::string& name) {
    if (name == "mdlm") return Proposal::mdlm;
    if (name == "remdm") return Proposal::remdm;
    throw std::invalid_argument("unknown proposal: " + name);
}

std::string proposal_name(Proposal p) { return p == Proposal::mdlm ? "mdlm" : "remdm"; }

void SamplerConfig::validate() const {
    if (m < 1) throw std::invalid_argument("m must be >= 1");
    if (k < 1) throw std::invalid_argument("k must be >= 1");
    if (steps < 1) throw std::invalid_argument("T must be >= 1");
    if (phi < 1) throw std::invalid_argument("phi must be >= 1");
    if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
    if (resample_every < 1) throw std::invalid_argument("resample_every must be >= 1");
    if ((method == Method::pg || method == Method::pgas) && k < 2)
        throw std::invalid_argument("particle Gibbs requires k >= 2");
}

uint64_t SamplerConfig::nominal_nfe() const {
    const uint64_t eff_m = (method == Method::pg || method == Method::pgas)
                               ? static_cast<uint64_t>(m)
                               : 1;
    return count_nfe(eff_m, static_cast<uint64_t>(k), static_cast<uint64_t>(steps),
                     static_cast<uint64_t>(phi));
}

bool is_resample_step(int t, int T, int every) {
    return (T - t) % every == 0 || t == 1;
}

int count_resample_steps(int T, int every) {
    int n = 0;
    for (int t = T; t >= 1; --t) n += is_resample_step(t, T, every) ? 1 : 0;
    return n;
}

double ess(std::span<const double> log_weights) {
    std::vector<double> probs(log_weights.size(), 0.0);
    if (!normalize_log_weights(log_weights, probs))
        throw degenerate_weights_error("ess: all log-weights are -inf", -1);
    double sq = 0.0;
    for (double p : probs) sq += p * p;
    return 1.0 / sq;
}

std::vector<int> resample_indices(std::span<const double> probs, int count, ResampleScheme scheme,
                                  RngStream& rng) {
    std::vector<int> out(static_cast<size_t>(count), 0);
    const int k = static_cast<int>(probs.size());
    if (scheme == ResampleScheme::multinomial) {
        for (int i = 0; i < count; ++i) out[static_cast<size_t>(i)] = rng.next_categorical(probs);
        return out;
    }
    // Systematic: one uniform offset, stratified positions, single CDF scan.
    const double u0 = rng.next_double() / count;
    double acc = probs[0];
    int j = 0;
    for (int i = 0; i < count; ++i) {
        const double u = u0 + static_cast<double>(i) / count;
        while (u >= acc && j + 1 < k) acc += probs[static_cast<size_t>(++j)];
        out[static_cast<size_t>(i)] = j;
    }
    return out;
}

ParticleSet resample(const ParticleSet& set, ResampleScheme scheme, RngStream& rng) {
    std::vector<double> probs(set.log_weights.size(), 0.0);
    if (!normalize_log_weights(set.log_weights, probs))
        throw degenerate_weights_error("resample: all particle weights are -inf", set.cursor_t);
    const auto idx = resample_indices(probs, set.count(), scheme, rng);
    ParticleSet out;
    out.cursor_t = set.cursor_t;
    out.particles.reserve(idx.size());
    out.cached_partial.reserve(idx.size());
    for (int a : idx) {
        out.particles.push_back(set.particles[static_cast<size_t>(a)]);
        out.cached_partial.push_back(set.cached_partial[static_cast<size_t>(a)]);
    }
    out.log_weights.assign(idx.size(), 0.0);
    return out;
}

int sample_ancestor_index(std::span<const double> log_w, std::span<const double> log_trans,
                          RngStream& rng) {
    std::vector<double> combined(log_w.size());
    for (size_t i = 0; i < log_w.size(); ++i) combined[i] = log_w[i] + log_trans[i];
    std::vector<double> probs(combined.size(), 0.0);
    if (!normalize_log_weights(combined, probs)) return -1;
    return rng.next_categorical(probs);
}

Trajectory rollout_trajectory(const SamplerConfig& cfg, const AnalyticDenoiser& denoiser,
                              uint64_t seed, uint64_t iteration, uint64_t particle) {
    const Vocab& vocab = denoiser.model().vocab();
    const int T = cfg.steps;
    const BackwardKernel kernel = cfg.kernel();
    Trajectory traj;
    traj.states.assign(static_cast<size_t>(T) + 1, SequenceState{});
    traj.partial_rewards.assign(static_cast<size_t>(T) + 1, kNaN);
    traj.states[static_cast<size_t>(T)] = all_mask_state(vocab, denoiser.model().length());
    for (int t = T; t >= 1; --t) {
        RngStream rng = derive_stream(seed, StreamPurpose::rollout, iteration, particle,
                                      static_cast<uint64_t>(t));
        const DenoiserOutput dout = denoiser(traj.states[static_cast<size_t>(t)]);
        traj.states[static_cast<size_t>(t - 1)] =
            kernel.step(dout, traj.states[static_cast<size_t>(t)], t, vocab, rng);
    }
    return traj;
}

Trajectory forward_noise_trajectory(const SequenceState& x0, const NoiseSchedule& schedule, int T,
                                    const Vocab& vocab, RngStream& rng) {
    if (!fully_unmasked(vocab, x0))
        throw std::invalid_argument("forward_noise_trajectory: x0 must be fully unmasked");
    Trajectory traj;
    traj.states.assign(static_cast<size_t>(T) + 1, SequenceState{});
    traj.partial_rewards.assign(static_cast<size_t>(T) + 1, kNaN);
    traj.states[0] = x0;
    for (int t = 1; t <= T; ++t) {
        const double a_prev = schedule.alpha_step(t - 1, T);
        const double a_cur = schedule.alpha_step(t, T);
        const double survive = a_prev > 0.0 ? a_cur / a_prev : 0.0;
        SequenceState next = traj.states[static_cast<size_t>(t - 1)];
        for (auto& tok : next.tokens)
            if (!vocab.is_mask(tok) && !rng.next_bernoulli(survive)) tok = vocab.mask_id;
        traj.states[static_cast<size_t>(t)] = std::move(next);
    }
    return traj;
}

namespace {

// Shared engine behind smc_run / csmc_sweep / pgas_sweep. When `reference`
// is non-null it is pinned to the last slot at every step and only the k-1
// free slots are redrawn at resample steps; ancestor sampling additionally
// re-draws the reference's history.
struct SweepEngine {
    const SamplerConfig& cfg;
    const AnalyticDenoiser& denoiser;
    const RewardModel& reward;
    const PartialRewardEstimator& estimator;
    const Vocab& vocab;
    const Trajectory* reference;
    bool ancestor_sampling;
    uint64_t iteration;
    NfeCounter* nfe;
    const ExecPolicy& exec;
    SweepObserver* observer;

    ParticleSet particles;
    std::vector<double> ess_trace;
    int ancestor_switches = 0;
    int ancestor_keeps = 0;

    SweepEngine(const SamplerConfig& cfg_, const AnalyticDenoiser& denoiser_,
                const RewardModel& reward_, const PartialRewardEstimator& estimator_,
                const Vocab& vocab_, const Trajectory* reference_, bool ancestor_sampling_,
                uint64_t iteration_, NfeCounter* nfe_, const ExecPolicy& exec_,
                SweepObserver* observer_)
        : cfg(cfg_), denoiser(denoiser_), reward(reward_), estimator(estimator_), vocab(vocab_),
          reference(reference_), ancestor_sampling(ancestor_sampling_), iteration(iteration_),
          nfe(nfe_), exec(exec_), observer(observer_) {}

    void run() {
        const int k = cfg.k;
        const int T = cfg.steps;
        const uint64_t seed = cfg.seed;
        const BackwardKernel kernel = cfg.kernel();
        const int ref_slot = k - 1;
        const int free_n = reference ? k - 1 : k;
        const SequenceState masked0 = all_mask_state(vocab, denoiser.model().length());

        particles.particles.assign(static_cast<size_t>(k), Trajectory{});
        for (auto& p : particles.particles) {
            p.states.assign(static_cast<size_t>(T) + 1, masked0);
            p.partial_rewards.assign(static_cast<size_t>(T) + 1, kNaN);
        }
        if (reference) particles.particles[static_cast<size_t>(ref_slot)] = *reference;
        particles.log_weights.assign(static_cast<size_t>(k), 0.0);

        // All particles start at the same all-MASK state, so one shared
        // estimate seeds every cache; any shared constant cancels in the
        // first weight normalization.
        uint64_t rc0 = 0;
        RngStream rng0 = derive_stream(seed, StreamPurpose::estimate, iteration,
                                       static_cast<uint64_t>(k), static_cast<uint64_t>(T));
        const double r_top = estimate_partial_reward(estimator, denoiser, reward, vocab, masked0,
                                                     rng0, &rc0);
        nfe->reward_calls += rc0;
        particles.cached_partial.assign(static_cast<size_t>(k), r_top);
        for (auto& p : particles.particles) p.partial_rewards[static_cast<size_t>(T)] = r_top;

        std::vector<DenoiserOutput> douts(static_cast<size_t>(k));
        for (int t = T; t >= 1; --t) {
            particles.cursor_t = t - 1;
            // Propagate every slot; the reference slot's next state is
            // pinned but its denoiser output is still evaluated (it is the
            // per-step charge, and PGAS scores transitions with it).
            parallel_for(k, exec, [&](int64_t i) {
                auto& traj = particles.particles[static_cast<size_t>(i)];
                const SequenceState& cur = traj.states[static_cast<size_t>(t)];
                douts[static_cast<size_t>(i)] = denoiser(cur);
                if (reference && i == ref_slot) return;
                RngStream rng = derive_stream(seed, StreamPurpose::propagate, iteration,
                                              static_cast<uint64_t>(i), static_cast<uint64_t>(t));
                traj.states[static_cast<size_t>(t - 1)] =
                    kernel.step(douts[static_cast<size_t>(i)], cur, t, vocab, rng);
            });
            nfe->denoiser_calls += static_cast<uint64_t>(k);
            if (observer) observer->after_propagate(t - 1, particles.particles);

            if (!is_resample_step(t, T, cfg.resample_every)) continue;

            // Fresh partial-reward estimates at the new states.
            std::vector<double> r_new(static_cast<size_t>(k), 0.0);
            std::vector<uint64_t> rcalls(static_cast<size_t>(k), 0);
            parallel_for(k, exec, [&](int64_t i) {
                RngStream rng = derive_stream(seed, StreamPurpose::estimate, iteration,
                                              static_cast<uint64_t>(i), static_cast<uint64_t>(t));
                r_new[static_cast<size_t>(i)] = estimate_partial_reward(
                    estimator, denoiser, reward, vocab,
                    particles.particles[static_cast<size_t>(i)].states[static_cast<size_t>(t - 1)],
                    rng, &rcalls[static_cast<size_t>(i)]);
            });
            for (uint64_t c : rcalls) nfe->reward_calls += c;
            for (int i = 0; i < k; ++i) {
                particles.log_weights[static_cast<size_t>(i)] += incremental_log_weight(
                    particles.cached_partial[static_cast<size_t>(i)], r_new[static_cast<size_t>(i)],
                    cfg.beta);
                particles.cached_partial[static_cast<size_t>(i)] = r_new[static_cast<size_t>(i)];
                particles.particles[static_cast<size_t>(i)]
                    .partial_rewards[static_cast<size_t>(t - 1)] = r_new[static_cast<size_t>(i)];
            }

            std::vector<double> probs(static_cast<size_t>(k), 0.0);
            if (!normalize_log_weights(particles.log_weights, probs))
                throw degenerate_weights_error(
                    "all particle weights are -inf at resample step " + std::to_string(t), t);
            double sq = 0.0;
            for (double p : probs) sq += p * p;
            ess_trace.push_back(1.0 / sq);

            if (ancestor_sampling) {
                // Reference-history redraw: weight each particle by how
                // plausibly it transitions into the reference's next state.
                const SequenceState& ref_next = reference->states[static_cast<size_t>(t - 1)];
                std::vector<double> log_trans(static_cast<size_t>(k), 0.0);
                parallel_for(k, exec, [&](int64_t i) {
                    log_trans[static_cast<size_t>(i)] = kernel.log_transition_prob(
                        douts[static_cast<size_t>(i)],
                        particles.particles[static_cast<size_t>(i)].states[static_cast<size_t>(t)],
                        ref_next, t, vocab);
                });
                RngStream arng = derive_stream(seed, StreamPurpose::ancestor, iteration, 0,
                                               static_cast<uint64_t>(t));
                const int j = sample_ancestor_index(particles.log_weights, log_trans, arng);
                if (j < 0) {
                    ++ancestor_keeps;
                } else if (j != ref_slot) {
                    ++ancestor_switches;
                    auto& ref_traj = particles.particles[static_cast<size_t>(ref_slot)];
                    const auto& src = particles.particles[static_cast<size_t>(j)];
                    for (int u = t; u <= T; ++u) {
                        ref_traj.states[static_cast<size_t>(u)] = src.states[static_cast<size_t>(u)];
                        ref_traj.partial_rewards[static_cast<size_t>(u)] =
                            src.partial_rewards[static_cast<size_t>(u)];
                    }
                }
            }

            // With weight-proportional reference selection the final-step
            // weights are kept for the draw instead of being resampled away.
            const bool skip_final = cfg.weighted_reference_selection && t == 1;
            if (!skip_final) {
                RngStream rrng = derive_stream(seed, StreamPurpose::resample, iteration, 0,
                                               static_cast<uint64_t>(t));
                const auto ancestors = resample_indices(probs, free_n, cfg.resample_scheme, rrng);
                std::vector<Trajectory> new_parts;
                std::vector<double> new_cached;
                new_parts.reserve(static_cast<size_t>(k));
                new_cached.reserve(static_cast<size_t>(k));
                for (int a : ancestors) {
                    new_parts.push_back(particles.particles[static_cast<size_t>(a)]);
                    new_cached.push_back(particles.cached_partial[static_cast<size_t>(a)]);
                }
                if (reference) {
                    new_parts.push_back(std::move(particles.particles[static_cast<size_t>(ref_slot)]));
                    new_cached.push_back(particles.cached_partial[static_cast<size_t>(ref_slot)]);
                }
                particles.particles = std::move(new_parts);
                particles.cached_partial = std::move(new_cached);
                particles.log_weights.assign(static_cast<size_t>(k), 0.0);
            }
            if (observer) observer->after_resample(t - 1, particles.particles);
        }

        // Caches now hold estimates at x_0, which are exact terminal rewards.
        for (int i = 0; i < k; ++i)
            particles.particles[static_cast<size_t>(i)].terminal =
                particles.cached_partial[static_cast<size_t>(i)];
    }
};

int argmax_terminal(const ParticleSet& set) {
    int best = 0;
    for (int i = 1; i < set.count(); ++i)
        if (set.particles[static_cast<size_t>(i)].terminal >
            set.particles[static_cast<size_t>(best)].terminal)
            best = i;
    return best;
}

}  // namespace

SmcResult smc_run(const SamplerConfig& cfg, const AnalyticDenoiser& denoiser,
                  const RewardModel& reward, const PartialRewardEstimator& estimator,
                  const ExecPolicy& exec) {
    cfg.validate();
    const Vocab& vocab = denoiser.model().vocab();
    SmcResult result;
    result.nfe.nominal_nfe = cfg.nominal_nfe();

    if (cfg.k == 1) {
        // A single particle is never affected by weighting or resampling;
        // this is a plain backward rollout.
        Trajectory traj = rollout_trajectory(cfg, denoiser, cfg.seed, 0, 0);
        traj.terminal = terminal_reward(reward, vocab, traj.x0());
        result.nfe.denoiser_calls = static_cast<uint64_t>(cfg.steps);
        result.nfe.reward_calls = 1;
        result.finals.particles = {traj};
        result.finals.log_weights = {0.0};
        result.finals.cached_partial = {traj.terminal};
        result.selected = std::move(traj);
        return result;
    }

    SweepEngine engine(cfg, denoiser, reward, estimator, vocab, nullptr, false, 0, &result.nfe,
                       exec, nullptr);
    engine.run();
    result.finals = std::move(engine.particles);
    result.ess_trace = std::move(engine.ess_trace);

    int idx = 0;
    if (cfg.selection == SelectionRule::uniform) {
        RngStream srng = derive_stream(cfg.seed, StreamPurpose::select, 0, 0, 0);
        idx = static_cast<int>(srng.next_below(static_cast<uint64_t>(cfg.k)));
    } else {
        idx = argmax_terminal(result.finals);
    }
    result.selected = result.finals.particles[static_cast<size_t>(idx)];
    return result;
}

namespace {

SweepResult run_conditional_sweep(const Trajectory& reference, const SamplerConfig& cfg,
                                  const AnalyticDenoiser& denoiser, const RewardModel& reward,
                                  const PartialRewardEstimator& estimator, uint64_t iteration,
                                  NfeCounter& nfe, const ExecPolicy& exec, SweepObserver* observer,
                                  bool ancestor_sampling) {
    cfg.validate();
    if (cfg.k < 2) throw std::invalid_argument("conditional SMC requires k >= 2");
    if (reference.steps() != cfg.steps)
        throw std::invalid_argument("reference trajectory is on a different step grid");
    const Vocab& vocab = denoiser.model().vocab();

    SweepEngine engine(cfg, denoiser, reward, estimator, vocab, &reference, ancestor_sampling,
                       iteration, &nfe, exec, observer);
    engine.run();

    SweepResult out;
    out.ess_trace = std::move(engine.ess_trace);
    out.ancestor_switches = engine.ancestor_switches;
    out.ancestor_keeps = engine.ancestor_keeps;

    int idx = 0;
    RngStream srng = derive_stream(cfg.seed, StreamPurpose::select, iteration, 0, 0);
    if (cfg.weighted_reference_selection) {
        const auto probs = normalized_weights(engine.particles.log_weights);
        idx = srng.next_categorical(probs);
    } else {
        idx = static_cast<int>(srng.next_below(static_cast<uint64_t>(cfg.k)));
    }
    out.selected_index = idx;
    out.new_reference = engine.particles.particles[static_cast<size_t>(idx)];
    out.finals = std::move(engine.particles);
    return out;
}

}  // namespace

SweepResult csmc_sweep(const Trajectory& reference, const SamplerConfig& cfg,
                       const AnalyticDenoiser& denoiser, const RewardModel& reward,
                       const PartialRewardEstimator& estimator, uint64_t iteration,
                       NfeCounter& nfe, const ExecPolicy& exec, SweepObserver* observer) {
    return run_conditional_sweep(reference, cfg, denoiser, reward, estimator, iteration, nfe, exec,
                                 observer, false);
}

SweepResult pgas_sweep(const Trajectory& reference, const SamplerConfig& cfg,
                       const AnalyticDenoiser& denoiser, const RewardModel& reward,
                       const PartialRewardEstimator& estimator, uint64_t iteration,
                       NfeCounter& nfe, const ExecPolicy& exec, SweepObserver* observer) {
    return run_conditional_sweep(reference, cfg, denoiser, reward, estimator, iteration, nfe, exec,
                                 observer, true);
}

PgResult pg_run(const SamplerConfig& cfg, const AnalyticDenoiser& denoiser,
                const RewardModel& reward, const PartialRewardEstimator& estimator,
                const ExecPolicy& exec) {
    cfg.validate();
    if (cfg.method != Method::pg && cfg.method != Method::pgas)
        throw std::invalid_argument("pg_run needs method pg or pgas");
    const Vocab& vocab = denoiser.model().vocab();
    const bool ancestor = cfg.method == Method::pgas;

    PgResult result;
    result.nfe.nominal_nfe = cfg.nominal_nfe();

    // Reference initialization: a single-particle run (resampling is a no-op
    // at k = 1, so this is a plain rollout). Charged to the init counters,
    // outside the m*k*T sweep budget.
    Trajectory reference = rollout_trajectory(cfg, denoiser, cfg.seed, 0, 0);
    reference.terminal = terminal_reward(reward, vocab, reference.x0());
    result.nfe.init_denoiser_calls += static_cast<uint64_t>(cfg.steps);
    result.nfe.init_reward_calls += 1;

    for (int it = 1; it <= cfg.m; ++it) {
        SweepResult sweep = run_conditional_sweep(reference, cfg, denoiser, reward, estimator,
                                                  static_cast<uint64_t>(it), result.nfe, exec,
                                                  nullptr, ancestor);
        reference = std::move(sweep.new_reference);
        PgIterationMetrics metrics;
        metrics.reference_reward = reference.terminal;
        metrics.ess_min = sweep.ess_trace.empty()
                              ? kNaN
                              : *std::min_element(sweep.ess_trace.begin(), sweep.ess_trace.end());
        metrics.ancestor_switches = sweep.ancestor_switches;
        metrics.ancestor_keeps = sweep.ancestor_keeps;
        result.iterations.push_back(metrics);
    }
    result.reference = std::move(reference);
    return result;
}

BonResult best_of_n(const SamplerConfig& cfg, const AnalyticDenoiser& denoiser,
                    const RewardModel& reward, const ExecPolicy& exec) {
    cfg.validate();
    const Vocab& vocab = denoiser.model().vocab();
    const int n = cfg.k;

    std::vector<Trajectory> draws(static_cast<size_t>(n));
    parallel_for(n, exec, [&](int64_t i) {
        draws[static_cast<size_t>(i)] =
            rollout_trajectory(cfg, denoiser, cfg.seed, 0, static_cast<uint64_t>(i));
        draws[static_cast<size_t>(i)].terminal =
            terminal_reward(reward, vocab, draws[static_cast<size_t>(i)].x0());
    });

    // First drawn candidate wins ties.
    int best = 0;
    for (int i = 1; i < n; ++i)
        if (draws[static_cast<size_t>(i)].terminal > draws[static_cast<size_t>(best)].terminal)
            best = i;

    BonResult result;
    result.nfe.nominal_nfe = cfg.nominal_nfe();
    result.nfe.denoiser_calls = static_cast<uint64_t>(n) * static_cast<uint64_t>(cfg.steps);
    result.nfe.reward_calls = static_cast<uint64_t>(n);
    result.best = std::move(draws[static_cast<size_t>(best)]);
    return result;
}

}  // namespace pgddm
