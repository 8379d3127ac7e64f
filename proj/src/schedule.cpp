#include "pgddm/schedule.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "pgddm/errors.hpp"

namespace pgddm {

NoiseSchedule NoiseSchedule::linear() { return NoiseSchedule(Kind::linear, {}, {}); }
NoiseSchedule NoiseSchedule::cosine() { return NoiseSchedule(Kind::cosine, {}, {}); }

NoiseSchedule NoiseSchedule::table(std::vector<double> ts, std::vector<double> alphas) {
    if (ts.size() != alphas.size() || ts.size() < 2)
        throw std::invalid_argument("schedule table needs matching t/alpha knots");
    if (ts.front() != 0.0 || ts.back() != 1.0)
        throw std::invalid_argument("schedule table must span t in [0,1]");
    if (alphas.front() != 1.0 || alphas.back() != 0.0)
        throw std::invalid_argument("schedule table must satisfy alpha(0)=1, alpha(1)=0");
    for (size_t i = 1; i < ts.size(); ++i) {
        if (ts[i] <= ts[i - 1]) throw std::invalid_argument("schedule knots must be increasing in t");
        if (alphas[i] > alphas[i - 1])
            throw std::invalid_argument("schedule table must be non-increasing");
    }
    return NoiseSchedule(Kind::table, std::move(ts), std::move(alphas));
}

NoiseSchedule NoiseSchedule::from_name(const std::string& name) {
    if (name == "linear") return linear();
    if (name == "cosine") return cosine();
    throw std::invalid_argument("unknown schedule: " + name);
}

double NoiseSchedule::alpha_at(double t) const {
    if (!(t >= 0.0 && t <= 1.0)) throw std::domain_error("alpha_at: t outside [0,1]");
    // Endpoints are exact by contract, independent of the evaluator.
    if (t == 0.0) return 1.0;
    if (t == 1.0) return 0.0;
    switch (kind_) {
        case Kind::linear:
            return 1.0 - t;
        case Kind::cosine: {
            const double c = std::cos(0.5 * M_PI * t);
            return c * c;
        }
        case Kind::table: {
            auto it = std::upper_bound(ts_.begin(), ts_.end(), t);
            const size_t hi = static_cast<size_t>(it - ts_.begin());
            const size_t lo = hi - 1;
            const double w = (t - ts_[lo]) / (ts_[hi] - ts_[lo]);
            return alphas_[lo] + w * (alphas_[hi] - alphas_[lo]);
        }
    }
    return 0.0;  // unreachable
}

double NoiseSchedule::alpha_step(int t, int T) const {
    if (t < 0 || t > T) throw std::domain_error("alpha_step: step index outside [0,T]");
    return alpha_at(static_cast<double>(t) / static_cast<double>(T));
}

double alpha_at(const NoiseSchedule& schedule, double t) { return schedule.alpha_at(t); }

RemaskSchedule RemaskSchedule::constant(double eta) {
    if (eta < 0.0 || eta > 1.0) throw std::invalid_argument("remask eta must be in [0,1]");
    RemaskSchedule r;
    r.kind = Kind::constant;
    r.eta = eta;
    return r;
}

RemaskSchedule RemaskSchedule::max_cap() {
    RemaskSchedule r;
    r.kind = Kind::max_cap;
    return r;
}

RemaskSchedule RemaskSchedule::table(std::vector<double> values) {
    RemaskSchedule r;
    r.kind = Kind::table;
    r.values = std::move(values);
    return r;
}

double remask_bound(const NoiseSchedule& schedule, int t, int T) {
    const double alpha_t = schedule.alpha_step(t, T);
    const double alpha_s = schedule.alpha_step(t - 1, T);
    if (alpha_t <= 0.0) return 1.0;
    return std::min(1.0, (1.0 - alpha_s) / alpha_t);
}

double RemaskSchedule::sigma_at(const NoiseSchedule& schedule, int t, int T) const {
    if (t < 1 || t > T) throw std::domain_error("sigma_at: step index outside [1,T]");
    switch (kind) {
        case Kind::zero:
            return 0.0;
        case Kind::constant:
            return std::min(eta, remask_bound(schedule, t, T));
        case Kind::max_cap:
            return remask_bound(schedule, t, T);
        case Kind::table:
            if (static_cast<size_t>(t - 1) >= values.size())
                throw std::invalid_argument("remask table shorter than T");
            return values[static_cast<size_t>(t - 1)];
    }
    return 0.0;  // unreachable
}

void validate_remask_schedule(const RemaskSchedule& remask, const NoiseSchedule& schedule, int T) {
    for (int t = 1; t <= T; ++t) {
        const double sigma = remask.sigma_at(schedule, t, T);
        const double bound = remask_bound(schedule, t, T);
        if (sigma < 0.0 || sigma > bound + 1e-12)
            throw schedule_validity_error("sigma_" + std::to_string(t) + " = " +
                                          std::to_string(sigma) + " exceeds bound " +
                                          std::to_string(bound));
    }
}

}  // namespace pgddm
