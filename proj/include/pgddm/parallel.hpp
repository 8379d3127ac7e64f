#pragma once

#include <algorithm>
#include <cstdint>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pgddm {

// Execution policy threaded through samplers and the harness.
// threads == 1 forces the serial reference path; threads == 0 lets OpenMP
// pick. Outputs are identical either way: every loop body owns its output
// slot and its own counter-derived RNG stream.
struct ExecPolicy {
    int threads = 0;
    bool serial() const { return threads == 1; }
};

inline int hardware_threads() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

inline bool in_parallel_region() {
#ifdef _OPENMP
    return omp_in_parallel();
#else
    return false;
#endif
}

// Data-parallel index loop. Bodies must write only to disjoint slots.
// Falls back to the plain serial loop when already inside a parallel region
// (no nested parallelism) or when the policy asks for one thread.
template <typename Fn>
void parallel_for(int64_t n, const ExecPolicy& exec, Fn&& body) {
#ifdef _OPENMP
    if (!exec.serial() && !in_parallel_region() && n > 1) {
        if (exec.threads > 0) {
#pragma omp parallel for schedule(static) num_threads(exec.threads)
            for (int64_t i = 0; i < n; ++i) body(i);
        } else {
#pragma omp parallel for schedule(static)
            for (int64_t i = 0; i < n; ++i) body(i);
        }
        return;
    }
#endif
    for (int64_t i = 0; i < n; ++i) body(i);
}

// Chunked deterministic sum: per-chunk partial sums are computed in parallel
// but always over the same fixed chunk boundaries, then combined in chunk
// order. The floating-point result is therefore independent of the thread
// count, which plain omp reductions do not guarantee.
template <typename Fn>
double deterministic_sum(int64_t n, const ExecPolicy& exec, Fn&& term,
                         int64_t chunk = 4096) {
    const int64_t nchunks = (n + chunk - 1) / chunk;
    std::vector<double> partial(static_cast<size_t>(nchunks), 0.0);
    parallel_for(nchunks, exec, [&](int64_t c) {
        const int64_t lo = c * chunk;
        const int64_t hi = std::min(n, lo + chunk);
        double s = 0.0;
        for (int64_t i = lo; i < hi; ++i) s += term(i);
        partial[static_cast<size_t>(c)] = s;
    });
    double total = 0.0;
    for (double s : partial) total += s;
    return total;
}

}  // namespace pgddm
