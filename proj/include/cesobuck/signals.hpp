#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cesobuck {

// Reference: biased square wave shaped by a second-order unit-DC-gain filter.
// The filter runs in controllable canonical form so vddot_r comes from the state
// equation exactly, never from numeric differentiation.
struct ReferenceConfig {
    double bias = 7.0;              // V
    double square_amplitude = 6.0;  // V, toggles +/-A about zero before filtering
    double period = 1.0;            // s
    bool amplitude_is_peak_to_peak = false;  // halves the toggle if set
    double filter_num = 4.0;
    std::array<double, 3> filter_den = {0.025, 0.6, 4.0};  // s^2, s^1, s^0
    // Bound every |v_r^(j)| must respect: j in {0,1,2} checked per sample in the
    // sim loop, j=3 checked analytically from the filter coefficients at config
    // validation. Default clears the shipped profile's worst case (46080 V/s^3,
    // the jump right after a square toggle) with margin.
    double r_vr = 5e4;
};

struct ReferenceSample {
    double v_r;
    double v_r_dot;
    double v_r_ddot;
};

// Steps the filter with a zero-order-hold exact discretization at dt, so samples
// are exact up to the square's toggles landing on the sample grid.
class ReferenceGenerator {
  public:
    ReferenceGenerator(const ReferenceConfig& cfg, double dt);

    // Sample at the current time, then advance one step of dt.
    ReferenceSample next();
    double time() const { return k_ * dt_; }

    // Largest |third derivative| the filter can emit for this config (analytic,
    // from the state equation applied to the bounded square input).
    double third_derivative_bound() const;

  private:
    double square_input(double t) const;

    double dt_;
    double bias_;
    double amp_;
    double period_;
    double a0_, a1_, c_;  // normalized filter: xdd = c*u - a1*xd - a0*x
    double phi_[2][2];    // ZOH transition of the filter state
    double psi_[2];       // ZOH input map
    double x1_ = 0.0, x2_ = 0.0;
    long k_ = 0;
};

// Validates invariants (Hurwitz, unit DC gain, positive period) and returns a
// human-readable message on failure.
std::string validate_reference(const ReferenceConfig& cfg, double dt);

// Piecewise disturbance. Outside all segments d = 0. Segments must be
// non-overlapping and time-ordered, with |d| and |d'| bounded away from the
// segment boundaries (r_d, r_d_dot).
struct DisturbanceSegment {
    enum class Kind { constant, step, sine, ramp };
    Kind kind = Kind::constant;
    double t_start = 0.0;
    double t_end = 0.0;
    // constant/step
    double value = 0.0;
    // sine: offset + amplitude*sin(2*pi*freq_hz*(t - t_start) + phase)
    double amplitude = 0.0;
    double freq_hz = 0.0;
    double offset = 0.0;
    double phase = 0.0;
    // ramp: linear from `from` at t_start to `to` at t_end
    double from = 0.0;
    double to = 0.0;
};

struct DisturbanceProfile {
    std::vector<DisturbanceSegment> segments;
    double r_d = 1.0;        // bound on |d|
    double r_d_dot = 100.0;  // bound on |d'| away from boundaries

    double at(double t) const;
};

// The shipped default: a step phase then a harmonic phase, amplitudes sized so
// the duty never rails at either reference level, ending before the final
// analysis window.
DisturbanceProfile default_disturbance();

std::string validate_disturbance(const DisturbanceProfile& d);

// Bounded measurement noise, |n| <= r_n. Values are mapped from raw mt19937_64
// draws through an explicit 53-bit scaling so output bytes do not depend on the
// standard library's distribution implementation. The truncated-gaussian flavor
// is Box-Muller with sigma = r_n/3, redrawing past the 3-sigma cut.
struct NoiseConfig {
    enum class Distribution { uniform, truncated_gaussian };
    double r_n = 0.02;  // V
    Distribution distribution = Distribution::uniform;
};

class NoiseGenerator {
  public:
    NoiseGenerator(const NoiseConfig& cfg, std::uint64_t seed)
        : r_n_(cfg.r_n), dist_(cfg.distribution), eng_(seed) {}
    double next();

  private:
    double uniform01();  // [0, 1), 53-bit

    double r_n_;
    NoiseConfig::Distribution dist_;
    std::mt19937_64 eng_;
};

}  // namespace cesobuck
