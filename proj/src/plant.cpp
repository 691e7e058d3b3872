#include "cesobuck/plant.hpp"

#include <cmath>
#include <stdexcept>

namespace cesobuck {

PlantDeriv plant_derivative(const PlantParams& pp, const PlantState& s, double mu, double d) {
    if (!std::isfinite(s.v_o) || !std::isfinite(s.i_L) || !std::isfinite(mu) || !std::isfinite(d))
        throw std::invalid_argument("plant_derivative: non-finite input");
    return {s.i_L / pp.C - s.v_o / (pp.C * pp.R),
            (pp.v_in * (mu + d) - s.v_o) / pp.L};
}

Equilibrium plant_equilibrium(const PlantParams& pp, double v_o) {
    return {{v_o, v_o / pp.R}, v_o / pp.v_in};
}

double total_disturbance_truth(const PlantParams& pp, double v_o, double dv_o, double mu,
                               double d, double b_hat) {
    if (b_hat == 0.0) throw std::invalid_argument("total_disturbance_truth: b_hat must be nonzero");
    return pp.a2() * v_o + pp.a1() * dv_o + (pp.b() - b_hat) * mu + pp.b() * d;
}

PlantState rk4_step(const PlantParams& pp, const PlantState& s, double duty,
                    const std::function<double(double)>& d_of_t, double t0, double h) {
    auto f = [&](const PlantState& x, double t) { return plant_derivative(pp, x, duty, d_of_t(t)); };
    PlantDeriv k1 = f(s, t0);
    PlantDeriv k2 = f({s.v_o + 0.5 * h * k1.dv_o, s.i_L + 0.5 * h * k1.di_L}, t0 + 0.5 * h);
    PlantDeriv k3 = f({s.v_o + 0.5 * h * k2.dv_o, s.i_L + 0.5 * h * k2.di_L}, t0 + 0.5 * h);
    PlantDeriv k4 = f({s.v_o + h * k3.dv_o, s.i_L + h * k3.di_L}, t0 + h);
    return {s.v_o + h / 6.0 * (k1.dv_o + 2.0 * k2.dv_o + 2.0 * k3.dv_o + k4.dv_o),
            s.i_L + h / 6.0 * (k1.di_L + 2.0 * k2.di_L + 2.0 * k3.di_L + k4.di_L)};
}

}  // namespace cesobuck
