#include "cesobuck/simloop.hpp"

#include <cmath>
#include <cstdio>

namespace cesobuck {

namespace {

void log_bound_event(std::vector<std::string>& events, bool& fired, const char* what,
                     double value, double limit, double t) {
    if (fired) return;
    fired = true;
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s bound: |%.17g| > %.17g at t = %.17g", what, value, limit,
                  t);
    events.emplace_back(buf);
}

}  // namespace

double lpf_step(double state, double input, double tau, double dt) {
    return state + (dt / tau) * (input - state);
}

std::string validate_sim(const SimConfig& cfg, const ObserverConfig& obs) {
    if (!(cfg.Ts > 0.0)) return "sampling period Ts must be positive";
    if (cfg.substeps < 1) return "substeps must be at least 1";
    if (!(cfg.duration > 0.0)) return "duration must be positive";
    if (cfg.lpf_tau < 0.0) return "lpf_tau must be non-negative";
    if (cfg.lpf_tau > 0.0 && cfg.Ts >= 2.0 * cfg.lpf_tau) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "measurement filter too fast for the sampler: need Ts < 2*tau, got Ts = "
                      "%.17g, tau = %.17g",
                      cfg.Ts, cfg.lpf_tau);
        return buf;
    }
    if (obs.lambda * cfg.Ts >= 2.0) {
        char buf[160];
        std::snprintf(buf, sizeof buf,
                      "observer Euler step unstable: lambda*Ts = %.17g (needs < 2)",
                      obs.lambda * cfg.Ts);
        return buf;
    }
    return {};
}

SimResult run_simulation(const PlantParams& pp, const ReferenceConfig& ref,
                         const DisturbanceProfile& dist, const NoiseConfig& noise,
                         const ObserverConfig& obs, const ControllerConfig& ctrl,
                         const SimConfig& sim) {
    SimResult out;

    ReferenceGenerator vr(ref, sim.Ts);
    NoiseGenerator rng(noise, sim.seed);

    std::vector<std::array<double, 3>> gains;
    for (double w : bandwidths(obs.p, obs.lambda, obs.alpha)) gains.push_back(eso_gains(w));
    CascadeState xi(obs.p);

    PlantState plant = sim.initial_state ? *sim.initial_state
                                         : plant_equilibrium(pp, ref.bias).state;

    const long n_samples = std::lround(sim.duration / sim.Ts);
    out.records.reserve(n_samples);

    const double h = sim.Ts / sim.substeps;
    auto d_of_t = [&dist](double t) { return dist.at(t); };

    double mu_prev = 0.0;
    double lpf_state = 0.0;
    bool lpf_primed = false;
    bool vo_fired = false, il_fired = false, vr_fired = false;

    for (long k = 0; k < n_samples; ++k) {
        const double t = k * sim.Ts;

        // 1. Measure: corrupt the output, low-pass if enabled, form the error.
        const ReferenceSample r = vr.next();
        const double n = rng.next();
        const double y_o = plant.v_o + n;
        double y_f = y_o;
        if (sim.lpf_tau > 0.0) {
            if (!lpf_primed) {
                lpf_state = y_o;  // start settled on the first measurement
                lpf_primed = true;
            } else {
                lpf_state = lpf_step(lpf_state, y_o, sim.lpf_tau, sim.Ts);
            }
            y_f = lpf_state;
        }
        const double y_meas = r.v_r - y_f;

        // 2. Observer correction against y_meas, driven by the duty that was
        //    actually applied over the past interval. Nothing to correct at k=0.
        if (k > 0) observer_step(gains, obs.b_hat, xi, y_meas, mu_prev, sim.Ts);
        const ExtendedEstimate est = select_estimate(xi);

        // 3. Fresh control.
        const ControlOutput u = control(y_meas, est, ctrl);

        // 4. Log before the plant moves; f_star_truth from the plant state.
        const double dist_now = dist.at(t);
        const PlantDeriv pd = plant_derivative(pp, plant, u.duty, dist_now);
        const double f_star = r.v_r_ddot -
            total_disturbance_truth(pp, plant.v_o, pd.dv_o, u.duty, dist_now, obs.b_hat);
        out.records.push_back({t, r.v_r, plant.v_o, y_o, r.v_r - plant.v_o, y_meas, u.duty,
                               u.duty_unsat, dist_now, est.z1_hat, est.z2_hat, est.z3_hat,
                               f_star});

        const double mag = std::max({std::fabs(r.v_r), std::fabs(r.v_r_dot),
                                     std::fabs(r.v_r_ddot)});
        if (std::fabs(plant.v_o) > sim.r_vo)
            log_bound_event(out.bound_events, vo_fired, "v_o", plant.v_o, sim.r_vo, t);
        if (std::fabs(plant.i_L) > sim.r_iL)
            log_bound_event(out.bound_events, il_fired, "i_L", plant.i_L, sim.r_iL, t);
        if (mag > ref.r_vr)
            log_bound_event(out.bound_events, vr_fired, "v_r derivatives", mag, ref.r_vr, t);

        // 5. Advance the plant under the held duty. Stop integrating the moment the
        //    state overflows; the divergence check below turns that into a diagnostic.
        for (int s = 0; s < sim.substeps; ++s) {
            plant = rk4_step(pp, plant, u.duty, d_of_t, t + s * h, h);
            if (!std::isfinite(plant.v_o) || !std::isfinite(plant.i_L)) break;
        }
        mu_prev = u.duty;

        bool finite = std::isfinite(plant.v_o) && std::isfinite(plant.i_L);
        double worst = 0.0;
        for (const auto& level : xi.xi)
            for (double x : level) {
                if (!std::isfinite(x)) finite = false;
                worst = std::max(worst, std::fabs(x));
            }
        if (!finite || worst > sim.divergence_threshold) {
            out.diverged = true;
            char buf[160];
            std::snprintf(buf, sizeof buf,
                          "observer diverged at t = %.17g (largest |xi| = %.17g)", t, worst);
            out.diagnostic = buf;
            break;
        }
    }
    return out;
}

}  // namespace cesobuck
