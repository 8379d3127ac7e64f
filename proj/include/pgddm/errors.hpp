#pragma once

#include <stdexcept>
#include <string>

namespace pgddm {

// Config / schema problems. The CLI maps these to exit code 2.
struct config_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Brute-force enumeration would exceed the configured state cap.
struct enumeration_cap_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// A conditional was requested on a state with zero probability mass.
struct zero_support_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// alpha_t == 1 while masked positions remain: the backward coefficients divide by zero.
struct schedule_degeneracy_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Remasking coefficients left [0,1]; the sigma schedule violates its bound.
struct schedule_validity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Every particle weight is -inf at a resample step.
struct degenerate_weights_error : std::runtime_error {
    degenerate_weights_error(const std::string& what, int step)
        : std::runtime_error(what), step(step) {}
    int step;
};

}  // namespace pgddm
