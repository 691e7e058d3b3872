#pragma once

#include <string>

#include "cesobuck/observer.hpp"

namespace cesobuck {

// Error-domain ADRC law: mu = (z3_hat + k^2*y + 2k*z2_hat) / b_hat, clamped to
// the duty range. The proportional term deliberately uses the measured error y,
// noise included, not z1_hat; the noise paths depend on it.
struct ControllerConfig {
    double k = 80.0;  // rad/s; k_p = k^2, k_d = 2k
    double b_hat = 2.0e6;
    double duty_min = 0.0;
    double duty_max = 1.0;

    double k_p() const { return k * k; }
    double k_d() const { return 2.0 * k; }
};

struct ControlOutput {
    double duty;        // clamped
    double duty_unsat;  // raw, for saturation accounting
};

ControlOutput control(double y, const ExtendedEstimate& est, const ControllerConfig& cfg);

std::string validate_controller(const ControllerConfig& cfg);

}  // namespace cesobuck
