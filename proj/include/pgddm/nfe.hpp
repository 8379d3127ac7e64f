#pragma once

#include <cstdint>
#include <stdexcept>

namespace pgddm {

// NFE = m * k * T * (1 + phi): one denoiser call plus phi reward calls per
// particle per timestep per iteration. This is the nominal budget; the
// instrumented counters below charge what a run actually spent.
inline uint64_t count_nfe(uint64_t m, uint64_t k, uint64_t T, uint64_t phi) {
    if (m < 1 || k < 1 || T < 1 || phi < 1)
        throw std::domain_error("count_nfe: all arguments must be >= 1");
    return m * k * T * (1 + phi);
}

// Instrumented call accounting.
//  - denoiser_calls charges one call per particle per step per sweep
//    (m*k*T for PG/PGAS, k*T for SMC and best-of-n). Denoiser reuse inside
//    the reward estimator is not charged, matching the nominal model where
//    the propagation forward pass is shared with estimation.
//  - reward_calls counts actual terminal-reward evaluations: phi per
//    estimate at a masked state, 1 at an unmasked state, 1 per exact-mode
//    lookup, plus one shared all-MASK estimate per sweep.
//  - The one-time PG reference initialization (a single-particle rollout) is
//    tracked separately in init_denoiser_calls and excluded from the
//    m*k*T identity, mirroring the nominal budget which covers only the
//    refinement sweeps.
struct NfeCounter {
    uint64_t denoiser_calls = 0;
    uint64_t reward_calls = 0;
    uint64_t nominal_nfe = 0;
    uint64_t init_denoiser_calls = 0;
    uint64_t init_reward_calls = 0;
};

}  // namespace pgddm
