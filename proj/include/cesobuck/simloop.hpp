#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cesobuck/controller.hpp"
#include "cesobuck/observer.hpp"
#include "cesobuck/plant.hpp"
#include "cesobuck/signals.hpp"

namespace cesobuck {

struct SimConfig {
    double Ts = 1e-4;    // controller period, s
    int substeps = 10;   // plant RK4 substeps per Ts
    double duration = 3.0;
    std::uint64_t seed = 1;
    std::optional<PlantState> initial_state;  // default: equilibrium at reference bias
    double lpf_tau = 0.0;  // measurement low-pass time constant; 0 disables
    double divergence_threshold = 1e12;
    // Boundedness constants for the plant state. Crossing one is not an abort;
    // it is logged once per kind in SimResult::bound_events so tests can see the
    // assumption break. The reference bound r_vr lives on ReferenceConfig and is
    // checked here every sample for v_r, v_r_dot, v_r_ddot.
    double r_vo = 50.0;  // |v_o| bound, V
    double r_iL = 10.0;  // |i_L| bound, A
};

// One row per sampling instant, logged before the plant advances.
struct SimRecord {
    double t;
    double v_r;
    double v_o;
    double y_o;        // v_o + n, pre-filter
    double e;          // v_r - v_o, true error
    double y_meas;     // v_r - (filtered) y_o, what the loop sees
    double duty;
    double duty_unsat;
    double d;
    double z1_hat;
    double z2_hat;
    double z3_hat;
    double f_star_truth;  // vddot_r - (a2*v_o + a1*vdot_o + (b - b_hat)*mu + b*d)
};

struct SimResult {
    std::vector<SimRecord> records;
    bool diverged = false;
    std::string diagnostic;
    // First crossing of each boundedness constant (r_vo, r_iL, r_vr), one entry
    // per kind, e.g. "v_o bound: |v_o| = 51.2 > 50 at t = 0.0123".
    std::vector<std::string> bound_events;
};

// Hybrid loop. Per sample: (1) noise + measurement (low-pass if enabled),
// (2) observer Euler step with the previous duty (skipped at the first sample),
// (3) control from the fresh estimate, (4) log, (5) plant RK4 over substeps
// with the duty held and d(t) evaluated at stage times.
SimResult run_simulation(const PlantParams& pp, const ReferenceConfig& ref,
                         const DisturbanceProfile& dist, const NoiseConfig& noise,
                         const ObserverConfig& obs, const ControllerConfig& ctrl,
                         const SimConfig& sim);

// Forward-Euler first-order lag; the caller owns the state.
double lpf_step(double state, double input, double tau, double dt);

std::string validate_sim(const SimConfig& cfg, const ObserverConfig& obs);

}  // namespace cesobuck
