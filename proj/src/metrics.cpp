#include "cesobuck/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cesobuck {

double integral_abs(const std::vector<double>& t, const std::vector<double>& x) {
    if (t.size() != x.size()) throw std::invalid_argument("integral_abs: length mismatch");
    if (t.size() < 2) throw std::invalid_argument("integral_abs: needs at least 2 samples");
    double acc = 0.0;
    for (std::size_t i = 1; i < t.size(); ++i)
        acc += 0.5 * (std::fabs(x[i - 1]) + std::fabs(x[i])) * (t[i] - t[i - 1]);
    return acc;
}

double total_variation(const std::vector<double>& x) {
    if (x.size() < 2) throw std::invalid_argument("total_variation: needs at least 2 samples");
    double acc = 0.0;
    for (std::size_t i = 1; i < x.size(); ++i) acc += std::fabs(x[i] - x[i - 1]);
    return acc;
}

double ripple_amplitude(const std::vector<double>& t, const std::vector<double>& x, double t0,
                        double t1) {
    if (t.size() != x.size()) throw std::invalid_argument("ripple_amplitude: length mismatch");
    double lo = 0.0, hi = 0.0;
    bool any = false;
    for (std::size_t i = 0; i < t.size(); ++i) {
        if (t[i] < t0 || t[i] >= t1) continue;
        if (!any) {
            lo = hi = x[i];
            any = true;
        } else {
            lo = std::min(lo, x[i]);
            hi = std::max(hi, x[i]);
        }
    }
    if (!any) throw std::invalid_argument("ripple_amplitude: window holds no samples");
    // Half peak-to-peak; the window mean drops out of the difference.
    return 0.5 * (hi - lo);
}

double saturation_fraction(const std::vector<double>& duty_unsat, double lo, double hi) {
    if (duty_unsat.empty()) return 0.0;
    std::size_t out = 0;
    for (double u : duty_unsat)
        if (u < lo || u > hi) ++out;
    return static_cast<double>(out) / static_cast<double>(duty_unsat.size());
}

RunCriteria summarize(const SimResult& res, const MetricWindows& win, double duty_lo,
                      double duty_hi) {
    RunCriteria c;
    c.diverged = res.diverged;
    if (res.records.size() < 2) return c;

    std::vector<double> t, e, duty, unsat;
    t.reserve(res.records.size());
    e.reserve(res.records.size());
    duty.reserve(res.records.size());
    unsat.reserve(res.records.size());
    for (const auto& r : res.records) {
        t.push_back(r.t);
        e.push_back(r.e);
        duty.push_back(r.duty);
        unsat.push_back(r.duty_unsat);
    }
    c.iae = integral_abs(t, e);
    c.effort = integral_abs(t, duty);
    c.jitter = total_variation(duty);
    c.saturation_fraction = saturation_fraction(unsat, duty_lo, duty_hi);
    // A diverged run can end before the ripple window opens; leave the ripple
    // fields zero then (the diverged flag explains them) instead of refusing
    // to summarize what was measured.
    if (t.back() >= win.ripple_t0) {
        c.ripple_amplitude = ripple_amplitude(t, e, win.ripple_t0, win.ripple_t1);
        c.duty_ripple = ripple_amplitude(t, duty, win.ripple_t0, win.ripple_t1);
    }
    return c;
}

}  // namespace cesobuck
