#include "cesobuck/controller.hpp"

#include <algorithm>

namespace cesobuck {

ControlOutput control(double y, const ExtendedEstimate& est, const ControllerConfig& cfg) {
    const double unsat = (est.z3_hat + cfg.k_p() * y + cfg.k_d() * est.z2_hat) / cfg.b_hat;
    return {std::clamp(unsat, cfg.duty_min, cfg.duty_max), unsat};
}

std::string validate_controller(const ControllerConfig& cfg) {
    if (!(cfg.k > 0.0)) return "controller gain k must be positive";
    if (cfg.b_hat == 0.0) return "input gain estimate b_hat must be nonzero";
    if (!(cfg.duty_max > cfg.duty_min)) return "duty range must be nonempty";
    return {};
}

}  // namespace cesobuck
