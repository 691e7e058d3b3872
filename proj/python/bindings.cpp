#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "cesobuck/analysis.hpp"
#include "cesobuck/config.hpp"

namespace py = pybind11;
using namespace cesobuck;

namespace {

py::dict result_dict(const SimResult& res, const RunCriteria& crit) {
    std::vector<double> t, v_r, v_o, y_o, e, y_meas, duty, duty_unsat, d, z1, z2, z3, f_star;
    for (const auto& r : res.records) {
        t.push_back(r.t);
        v_r.push_back(r.v_r);
        v_o.push_back(r.v_o);
        y_o.push_back(r.y_o);
        e.push_back(r.e);
        y_meas.push_back(r.y_meas);
        duty.push_back(r.duty);
        duty_unsat.push_back(r.duty_unsat);
        d.push_back(r.d);
        z1.push_back(r.z1_hat);
        z2.push_back(r.z2_hat);
        z3.push_back(r.z3_hat);
        f_star.push_back(r.f_star_truth);
    }
    py::dict out;
    out["t"] = t;
    out["v_r"] = v_r;
    out["v_o"] = v_o;
    out["y_o"] = y_o;
    out["e"] = e;
    out["y_meas"] = y_meas;
    out["duty"] = duty;
    out["duty_unsat"] = duty_unsat;
    out["d"] = d;
    out["z1_hat"] = z1;
    out["z2_hat"] = z2;
    out["z3_hat"] = z3;
    out["f_star_truth"] = f_star;
    out["diverged"] = res.diverged;
    out["diagnostic"] = res.diagnostic;
    py::dict c;
    c["iae"] = crit.iae;
    c["effort"] = crit.effort;
    c["jitter"] = crit.jitter;
    c["saturation_fraction"] = crit.saturation_fraction;
    c["ripple_amplitude"] = crit.ripple_amplitude;
    c["duty_ripple"] = crit.duty_ripple;
    c["diverged"] = crit.diverged;
    out["criteria"] = c;
    return out;
}

}  // namespace

PYBIND11_MODULE(_cesobuck, m) {
    m.doc() = "Buck converter disturbance-rejection loop: simulation and frequency analysis";

    py::register_exception_translator([](std::exception_ptr p) {
        try {
            if (p) std::rethrow_exception(p);
        } catch (const ConfigError& e) {
            PyErr_SetString(PyExc_ValueError, e.message.c_str());
        }
    });

    m.def(
        "simulate",
        [](const std::string& config, py::object seed) {
            ExperimentSpec spec = parse_spec_text(config, ".");
            if (!seed.is_none()) spec.base.sim.seed = seed.cast<std::uint64_t>();
            const FullConfig& c = spec.base;
            const SimResult res = run_simulation(c.plant, c.reference, c.disturbance, c.noise,
                                                 c.observer, c.controller, c.sim);
            return result_dict(
                res, summarize(res, c.windows, c.controller.duty_min, c.controller.duty_max));
        },
        py::arg("config") = "{}", py::arg("seed") = py::none(),
        "Run one closed-loop simulation from a JSON config string. Returns the\n"
        "sampled columns plus the per-run summary metrics under 'criteria'.\n"
        "An empty config runs the nominal setup.");

    m.def(
        "validate",
        [](const std::string& config) {
            return validate_spec(parse_spec_text(config, "."));
        },
        py::arg("config"),
        "Parse and validate a JSON config string. Raises ValueError on hard\n"
        "violations and returns the list of soft warnings otherwise.");

    m.def("bandwidths", &bandwidths, py::arg("p"), py::arg("lam") = 3600.0,
          py::arg("alpha") = 3.0,
          "Observer bandwidth ladder, slowest level first, top anchored at lam.");

    m.def(
        "eso_gains", [](double omega) { return eso_gains(omega); }, py::arg("omega"),
        "Single-level observer gains (3w, 3w^2, w^3).");

    m.def(
        "control_gain_mag",
        [](double w, int p, double lam, double alpha, double k, double b_hat) {
            ControllerConfig ctrl;
            ctrl.k = k;
            ctrl.b_hat = b_hat;
            return control_from_measurement_mag(bandwidths(p, lam, alpha), ctrl, w);
        },
        py::arg("w"), py::arg("p") = 3, py::arg("lam") = 3600.0, py::arg("alpha") = 3.0,
        py::arg("k") = 80.0, py::arg("b_hat") = 2.0e6,
        "|G_uy(jw)|: measurement-to-duty magnitude of the closed observer and\n"
        "control law, the noise amplification curve.");

    m.def(
        "noise_error_mag",
        [](double w, int p, double lam, double alpha, double lpf_tau) {
            return noise_to_disturbance_error_mag(
                aggregated_error_system(bandwidths(p, lam, alpha)), w, lpf_tau);
        },
        py::arg("w"), py::arg("p") = 3, py::arg("lam") = 3600.0, py::arg("alpha") = 3.0,
        py::arg("lpf_tau") = 0.0,
        "Noise-to-disturbance-estimate-error magnitude, optionally with the\n"
        "first-order measurement filter in series.");
}
