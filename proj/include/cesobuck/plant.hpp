#pragma once

#include <functional>

namespace cesobuck {

// Averaged buck converter. State (v_o, i_L); duty and external disturbance d
// enter together as (V_in/L)*(mu + d). Output form: vdd_o = a1*vd_o + a2*v_o + b*(mu+d).
struct PlantParams {
    double v_in = 20.0;  // V
    double L = 0.01;     // H
    double C = 0.001;    // F
    double R = 50.0;     // ohm

    double a1() const { return -1.0 / (R * C); }
    double a2() const { return -1.0 / (L * C); }
    double b() const { return v_in / (L * C); }
};

struct PlantState {
    double v_o = 0.0;
    double i_L = 0.0;
};

struct PlantDeriv {
    double dv_o;
    double di_L;
};

PlantDeriv plant_derivative(const PlantParams& pp, const PlantState& s, double mu, double d);

// Equilibrium holding v_o = v: i_L = v/R, duty = v/V_in. Valid for v in [0, V_in].
struct Equilibrium {
    PlantState state;
    double duty;
};
Equilibrium plant_equilibrium(const PlantParams& pp, double v_o);

// Ground-truth lumped disturbance a2*v_o + a1*vd_o + (b - b_hat)*mu + b*d, the
// quantity the observer's extended state should track (up to the reference
// acceleration term added by the caller). b_hat = 0 is rejected.
double total_disturbance_truth(const PlantParams& pp, double v_o, double dv_o, double mu,
                               double d, double b_hat);

// One RK4 step of length h with duty held (ZOH) and d(t) sampled at stage times.
PlantState rk4_step(const PlantParams& pp, const PlantState& s, double duty,
                    const std::function<double(double)>& d_of_t, double t0, double h);

}  // namespace cesobuck
