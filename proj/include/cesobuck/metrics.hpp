#pragma once

#include <cstddef>
#include <vector>

#include "cesobuck/simloop.hpp"

namespace cesobuck {

// Trapezoidal integral of |x| over uniformly sampled (t, x).
double integral_abs(const std::vector<double>& t, const std::vector<double>& x);

// Discrete total variation sum |x_{i+1} - x_i|; the natural discretization of
// the control-activity integral.
double total_variation(const std::vector<double>& x);

// Half peak-to-peak of x over [t0, t1) after removing the window mean. The
// window should sit on a steady segment: constant reference, no disturbance
// transition.
double ripple_amplitude(const std::vector<double>& t, const std::vector<double>& x,
                        double t0, double t1);

// Fraction of samples whose unsaturated duty left the admissible range.
double saturation_fraction(const std::vector<double>& duty_unsat, double lo, double hi);

struct MetricWindows {
    double ripple_t0 = 2.7;
    double ripple_t1 = 3.0;
};

// Per-run summary emitted as criteria JSON. iae/effort/jitter run over the full
// record; ripple metrics use the configured window. duty_ripple carries the
// ripple metric applied to the control signal, where noise amplification
// actually shows in this model.
struct RunCriteria {
    double iae = 0.0;
    double effort = 0.0;
    double jitter = 0.0;
    double saturation_fraction = 0.0;
    double ripple_amplitude = 0.0;
    double duty_ripple = 0.0;
    bool diverged = false;
};

RunCriteria summarize(const SimResult& res, const MetricWindows& win, double duty_lo = 0.0,
                      double duty_hi = 1.0);

}  // namespace cesobuck
