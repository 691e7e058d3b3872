#include "cesobuck/signals.hpp"

#include <cmath>
#include <cstdio>

namespace cesobuck {

namespace {

void mat3_mul(const double a[3][3], const double b[3][3], double out[3][3]) {
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) {
            double s = 0.0;
            for (int k = 0; k < 3; ++k) s += a[i][k] * b[k][j];
            out[i][j] = s;
        }
}

// exp(M) by scaling-and-squaring on the Taylor series. The scaled norm is below
// 0.5, where 18 terms exhaust double precision.
void mat3_exp(const double M[3][3], double out[3][3]) {
    double norm = 0.0;
    for (int i = 0; i < 3; ++i) {
        double row = 0.0;
        for (int j = 0; j < 3; ++j) row += std::fabs(M[i][j]);
        norm = std::max(norm, row);
    }
    int squarings = 0;
    double scale = 1.0;
    while (norm * scale > 0.5) {
        scale *= 0.5;
        ++squarings;
    }

    double A[3][3];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) A[i][j] = M[i][j] * scale;

    double acc[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};  // running sum
    double term[3][3] = {{1, 0, 0}, {0, 1, 0}, {0, 0, 1}};
    for (int n = 1; n <= 18; ++n) {
        double next[3][3];
        mat3_mul(term, A, next);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) {
                term[i][j] = next[i][j] / n;
                acc[i][j] += term[i][j];
            }
    }
    for (int s = 0; s < squarings; ++s) {
        double sq[3][3];
        mat3_mul(acc, acc, sq);
        for (int i = 0; i < 3; ++i)
            for (int j = 0; j < 3; ++j) acc[i][j] = sq[i][j];
    }
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) out[i][j] = acc[i][j];
}

std::string bound_msg(const char* what, double have, double limit) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%s: %.17g exceeds %.17g", what, have, limit);
    return buf;
}

}  // namespace

ReferenceGenerator::ReferenceGenerator(const ReferenceConfig& cfg, double dt)
    : dt_(dt),
      bias_(cfg.bias),
      amp_(cfg.amplitude_is_peak_to_peak ? 0.5 * cfg.square_amplitude : cfg.square_amplitude),
      period_(cfg.period) {
    a0_ = cfg.filter_den[2] / cfg.filter_den[0];
    a1_ = cfg.filter_den[1] / cfg.filter_den[0];
    c_ = cfg.filter_num / cfg.filter_den[0];
    // Exact hold-equivalent of the filter over dt, via the augmented matrix
    // [[A, B], [0, 0]] whose exponential stacks the transition and input maps.
    double M[3][3] = {{0, dt, 0}, {-a0_ * dt, -a1_ * dt, c_ * dt}, {0, 0, 0}};
    double E[3][3];
    mat3_exp(M, E);
    phi_[0][0] = E[0][0];
    phi_[0][1] = E[0][1];
    phi_[1][0] = E[1][0];
    phi_[1][1] = E[1][1];
    psi_[0] = E[0][2];
    psi_[1] = E[1][2];
}

double ReferenceGenerator::square_input(double t) const {
    if (amp_ == 0.0) return 0.0;
    const double phase = t - period_ * std::floor(t / period_);
    return phase < 0.5 * period_ ? amp_ : -amp_;
}

ReferenceSample ReferenceGenerator::next() {
    const double u = square_input(k_ * dt_);
    ReferenceSample s{bias_ + x1_, x2_, c_ * u - a1_ * x2_ - a0_ * x1_};
    const double nx1 = phi_[0][0] * x1_ + phi_[0][1] * x2_ + psi_[0] * u;
    const double nx2 = phi_[1][0] * x1_ + phi_[1][1] * x2_ + psi_[1] * u;
    x1_ = nx1;
    x2_ = nx2;
    ++k_;
    return s;
}

double ReferenceGenerator::third_derivative_bound() const {
    // Between toggles u is constant, so x^(3) = -a1*xdd - a0*xd. The worst case
    // for a well-damped filter is the instant after a toggle of 2*amp from the
    // settled state, where xd = 0 and xdd jumps to -2*c*amp. Verified against a
    // dense evaluation of the post-toggle free response for the shipped
    // coefficients (decay establishes within the half period).
    return 2.0 * c_ * std::fabs(amp_) * a1_;
}

std::string validate_reference(const ReferenceConfig& cfg, double dt) {
    if (!(cfg.period > 0.0)) return "reference period must be positive";
    if (!(dt > 0.0)) return "sample period must be positive";
    if (!(cfg.filter_den[0] > 0.0) || !(cfg.filter_den[1] > 0.0) || !(cfg.filter_den[2] > 0.0))
        return "reference filter must be second order and Hurwitz (all denominator "
               "coefficients positive)";
    const double dc = cfg.filter_num / cfg.filter_den[2];
    if (std::fabs(dc - 1.0) > 1e-9)
        return bound_msg("reference filter DC gain must be 1, |gain - 1|", std::fabs(dc - 1.0),
                         1e-9);
    ReferenceGenerator gen(cfg, dt);
    const double j3 = gen.third_derivative_bound();
    if (j3 > cfg.r_vr)
        return bound_msg("reference third-derivative bound exceeds r_vr", j3, cfg.r_vr);
    return {};
}

double DisturbanceProfile::at(double t) const {
    for (const auto& s : segments) {
        if (t < s.t_start || t >= s.t_end) continue;
        switch (s.kind) {
            case DisturbanceSegment::Kind::constant:
            case DisturbanceSegment::Kind::step:
                return s.value;
            case DisturbanceSegment::Kind::sine:
                return s.offset +
                       s.amplitude * std::sin(2.0 * M_PI * s.freq_hz * (t - s.t_start) + s.phase);
            case DisturbanceSegment::Kind::ramp:
                return s.from + (s.to - s.from) * (t - s.t_start) / (s.t_end - s.t_start);
        }
    }
    return 0.0;
}

DisturbanceProfile default_disturbance() {
    DisturbanceSegment hold;
    hold.kind = DisturbanceSegment::Kind::step;
    hold.t_start = 1.0;
    hold.t_end = 2.0;
    hold.value = -0.05;

    DisturbanceSegment wobble;
    wobble.kind = DisturbanceSegment::Kind::sine;
    wobble.t_start = 2.0;
    wobble.t_end = 2.6;
    wobble.amplitude = 0.04;
    wobble.freq_hz = 10.0;

    DisturbanceProfile p;
    p.segments = {hold, wobble};
    return p;
}

std::string validate_disturbance(const DisturbanceProfile& d) {
    double prev_end = -1e300;
    for (std::size_t i = 0; i < d.segments.size(); ++i) {
        const auto& s = d.segments[i];
        char where[48];
        std::snprintf(where, sizeof where, "disturbance segment %zu", i);
        if (!(s.t_end > s.t_start)) return std::string(where) + ": t_end must exceed t_start";
        if (s.t_start < prev_end)
            return std::string(where) + ": overlaps or reorders the previous segment";
        prev_end = s.t_end;

        double peak = 0.0, slope = 0.0;
        switch (s.kind) {
            case DisturbanceSegment::Kind::constant:
            case DisturbanceSegment::Kind::step:
                peak = std::fabs(s.value);
                break;
            case DisturbanceSegment::Kind::sine:
                peak = std::fabs(s.offset) + std::fabs(s.amplitude);
                slope = std::fabs(s.amplitude) * 2.0 * M_PI * s.freq_hz;
                break;
            case DisturbanceSegment::Kind::ramp:
                peak = std::max(std::fabs(s.from), std::fabs(s.to));
                slope = std::fabs(s.to - s.from) / (s.t_end - s.t_start);
                break;
        }
        if (peak > d.r_d) return std::string(where) + ": " + bound_msg("|d| bound", peak, d.r_d);
        if (slope > d.r_d_dot)
            return std::string(where) + ": " + bound_msg("|d'| bound", slope, d.r_d_dot);
    }
    return {};
}

double NoiseGenerator::uniform01() {
    return (eng_() >> 11) * 0x1.0p-53;
}

double NoiseGenerator::next() {
    if (r_n_ == 0.0) return 0.0;
    if (dist_ == NoiseConfig::Distribution::uniform) return r_n_ * (2.0 * uniform01() - 1.0);
    // Box-Muller with the 3-sigma tail redrawn, so |n| <= r_n holds exactly.
    const double sigma = r_n_ / 3.0;
    for (;;) {
        double u1 = uniform01();
        while (u1 == 0.0) u1 = uniform01();
        const double u2 = uniform01();
        const double n = sigma * std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
        if (std::fabs(n) <= r_n_) return n;
    }
}

}  // namespace cesobuck
