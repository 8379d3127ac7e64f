#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <vector>

namespace pgddm {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Max-shifted log(sum(exp(v))). Returns -inf for an all-(-inf) input.
inline double log_sum_exp(std::span<const double> v) {
    double max_v = kNegInf;
    for (double x : v) max_v = std::max(max_v, x);
    if (max_v == kNegInf) return kNegInf;
    double sum = 0.0;
    for (double x : v) sum += std::exp(x - max_v);
    return max_v + std::log(sum);
}

// Normalizes log-weights into probabilities. Returns false when every entry
// is -inf (degenerate); callers decide whether that is an error.
inline bool normalize_log_weights(std::span<const double> log_w, std::span<double> out) {
    double max_v = kNegInf;
    for (double x : log_w) max_v = std::max(max_v, x);
    if (max_v == kNegInf) return false;
    double sum = 0.0;
    for (size_t i = 0; i < log_w.size(); ++i) {
        out[i] = std::exp(log_w[i] - max_v);
        sum += out[i];
    }
    for (auto& p : out) p /= sum;
    return true;
}

inline std::vector<double> normalized_weights(std::span<const double> log_w) {
    std::vector<double> probs(log_w.size(), 0.0);
    normalize_log_weights(log_w, probs);
    return probs;
}

}  // namespace pgddm
