#pragma once

#include <string>
#include <vector>

namespace pgddm {

// Masking-rate schedule alpha(t), t in [0,1], with alpha(0) = 1, alpha(1) = 0
// and alpha non-increasing. Step indices t in {1..T} map to continuous times
// t/T; the step preceding t is s = t-1 at time (t-1)/T.
class NoiseSchedule {
  public:
    enum class Kind { linear, cosine, table };

    static NoiseSchedule linear();
    static NoiseSchedule cosine();
    // Piecewise-linear interpolation through (t, alpha) knots. Knots must
    // start at (0,1), end at (1,0) and be non-increasing.
    static NoiseSchedule table(std::vector<double> ts, std::vector<double> alphas);
    static NoiseSchedule from_name(const std::string& name);

    double alpha_at(double t) const;
    Kind kind() const { return kind_; }
    // alpha at the discrete grid point t/T.
    double alpha_step(int t, int T) const;

  private:
    NoiseSchedule(Kind k, std::vector<double> ts, std::vector<double> alphas)
        : kind_(k), ts_(std::move(ts)), alphas_(std::move(alphas)) {}
    Kind kind_;
    std::vector<double> ts_, alphas_;  // only for Kind::table
};

double alpha_at(const NoiseSchedule& schedule, double t);

// Remasking rate sigma_t over discrete steps t in {1..T}. Validity requires
// 0 <= sigma_t <= min(1, (1 - alpha_{t-1}) / alpha_t); the zero / constant /
// max_cap kinds clamp themselves to that bound, an explicit table does not
// and is checked by validate_remask_schedule (and again by the kernel).
struct RemaskSchedule {
    enum class Kind { zero, constant, max_cap, table };
    Kind kind = Kind::zero;
    double eta = 0.0;            // constant kind
    std::vector<double> values;  // table kind, entry t-1 holds sigma_t

    static RemaskSchedule zero() { return {}; }
    static RemaskSchedule constant(double eta);
    static RemaskSchedule max_cap();
    static RemaskSchedule table(std::vector<double> values);

    double sigma_at(const NoiseSchedule& schedule, int t, int T) const;
};

// min(1, (1 - alpha_{t-1}) / alpha_t); 1 when alpha_t == 0.
double remask_bound(const NoiseSchedule& schedule, int t, int T);

// Throws schedule_validity_error if any sigma_t breaks its bound.
void validate_remask_schedule(const RemaskSchedule& remask, const NoiseSchedule& schedule, int T);

}  // namespace pgddm
