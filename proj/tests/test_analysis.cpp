#include "doctest.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <random>
#include <stdexcept>
#include <vector>

#include "cesobuck/analysis.hpp"

using namespace cesobuck;

namespace {

// Characteristic polynomial coefficients of a 3x3 block: trace, sum of 2x2
// principal minors, determinant. For A - l c^T with l = (3w, 3w^2, w^3) these
// are exactly -3w, 3w^2, -w^3: the coefficients of (s + w)^3.
struct Poly3 {
    double tr, m2, det;
};

Poly3 block_poly(const Eigen::Matrix3d& B) {
    Poly3 p;
    p.tr = B(0, 0) + B(1, 1) + B(2, 2);
    p.m2 = B(0, 0) * B(1, 1) - B(0, 1) * B(1, 0) + B(0, 0) * B(2, 2) - B(0, 2) * B(2, 0) +
           B(1, 1) * B(2, 2) - B(1, 2) * B(2, 1);
    p.det = B.determinant();
    return p;
}

double uniform_pm1(std::mt19937_64& eng) {
    return 2.0 * ((eng() >> 11) * 0x1.0p-53) - 1.0;
}

// Sinusoidal steady-state gain of the discrete observer + control law at rate
// dt: drive y = A sin(w t), fit the raw duty to sin/cos quadrature plus offset
// and ramp after the transient, and return the quadrature amplitude over A.
// The offset/ramp regressors absorb the loop's marginally stable homogeneous
// mode (the control channel integrates, doubly so for p >= 2, so a plain
// peak-to-peak read would grow with the measurement window instead of
// converging). The duty clamp is opened up so the loop stays linear.
double discrete_loop_gain(const std::vector<double>& omegas, ControllerConfig ctrl, double w,
                          double dt) {
    ctrl.duty_min = -1e18;
    ctrl.duty_max = 1e18;
    std::vector<std::array<double, 3>> gains;
    for (double o : omegas) gains.push_back(eso_gains(o));
    CascadeState st(static_cast<int>(omegas.size()));

    const double A = 1e-3;
    const double period = 2.0 * M_PI / w;
    const long n_settle = std::lround(std::ceil(std::max(0.3, 6.0 * period) / dt));
    const long n_measure =
        std::lround(std::max(3.0, std::ceil(0.3 / period)) * std::lround(period / dt));

    Eigen::MatrixXd M(n_measure, 4);
    Eigen::VectorXd mus(n_measure);
    double mu_prev = 0.0;
    for (long k = 0; k < n_settle + n_measure; ++k) {
        const double t = k * dt;
        const double y = A * std::sin(w * t);
        if (k > 0) observer_step(gains, ctrl.b_hat, st, y, mu_prev, dt);
        const ControlOutput u = control(y, select_estimate(st), ctrl);
        mu_prev = u.duty;
        if (k >= n_settle) {
            const long r = k - n_settle;
            M(r, 0) = std::sin(w * t);
            M(r, 1) = std::cos(w * t);
            M(r, 2) = 1.0;
            M(r, 3) = r * dt;
            mus(r) = u.duty_unsat;
        }
    }
    const Eigen::Vector4d c = M.colPivHouseholderQr().solve(mus);
    return std::hypot(c(0), c(1)) / A;
}

}  // namespace

TEST_CASE("single-level error matrix, written out") {
    const ErrorSystem es = aggregated_error_system({1.0});
    REQUIRE(es.H.rows() == 3);
    Eigen::Matrix3d want;
    want << -3, 1, 0, -3, 0, 1, -1, 0, 0;
    CHECK((es.H - want).cwiseAbs().maxCoeff() == 0.0);
    CHECK(es.delta(0) == 0.0);
    CHECK(es.delta(1) == 0.0);
    CHECK(es.delta(2) == 1.0);
    CHECK(es.gamma(0) == -3.0);
    CHECK(es.gamma(1) == -3.0);
    CHECK(es.gamma(2) == -1.0);
    CHECK(es.z3_row() == 2);

    // triple eigenvalue at -1; a defective triple splits by ~eps^(1/3) under
    // QR, so assert the cluster, not the individuals
    double mean = 0.0;
    for (const auto& ev : eigenvalues(es.H)) {
        CHECK(std::abs(ev - std::complex<double>(-1.0, 0.0)) < 2e-4);
        mean += ev.real() / 3.0;
    }
    CHECK(mean == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("two-level structure: inputs and couplings") {
    const ErrorSystem es = aggregated_error_system({1.0, 3.0});
    REQUIRE(es.H.rows() == 6);

    // delta stacks the input column once per level
    for (int i = 0; i < 6; ++i) CHECK(es.delta(i) == ((i % 3 == 2) ? 1.0 : 0.0));
    // noise hits level 1 through -l1 and every deeper level through -w1^3
    CHECK(es.gamma(0) == -3.0);
    CHECK(es.gamma(1) == -3.0);
    CHECK(es.gamma(2) == -1.0);
    CHECK(es.gamma(3) == 0.0);
    CHECK(es.gamma(4) == 0.0);
    CHECK(es.gamma(5) == -1.0);

    // upper-right block is exactly zero: block lower triangular by structure
    CHECK(es.H.block(0, 3, 3, 3).cwiseAbs().maxCoeff() == 0.0);

    // sub-diagonal block: l2 c^T with the first-level w^3 removed from row 3
    CHECK(es.H(3, 0) == 9.0);
    CHECK(es.H(4, 0) == 27.0);
    CHECK(es.H(5, 0) == 27.0 - 1.0);

    // spectrum: {-1 x3, -3 x3} via cluster means. Whole-matrix QR splits the
    // defective triples noticeably (the coupling blocks magnify the usual
    // eps^(1/3) splitting), so the full-matrix clusters only localize to ~1e-4;
    // the sharp per-block placement check lives in the cascade spectrum test.
    std::vector<double> re;
    for (const auto& ev : eigenvalues(es.H)) re.push_back(ev.real());
    std::sort(re.begin(), re.end());
    const double hi = (re[0] + re[1] + re[2]) / 3.0;  // most negative first
    const double lo = (re[3] + re[4] + re[5]) / 3.0;
    CHECK(hi == doctest::Approx(-3.0).epsilon(1e-4));
    CHECK(lo == doctest::Approx(-1.0).epsilon(1e-4));
}

TEST_CASE("error system matches direct differentiation of the observer") {
    // Random state, noise, control, and disturbance rate: the transformed
    // coordinates zeta_i = z - xi_i - b*sum_{j<i} xi_j3 must satisfy
    // zeta_dot = H zeta + delta*Fdot - gamma*n identically, with the observer
    // fed the noisy measurement y = z1 - n.
    std::mt19937_64 eng(12345);
    for (int p = 1; p <= 3; ++p) {
        const std::vector<double> omegas = bandwidths(p, 9.0, 3.0);
        const ErrorSystem es = aggregated_error_system(omegas);
        std::vector<std::array<double, 3>> gains;
        for (double o : omegas) gains.push_back(eso_gains(o));

        for (int trial = 0; trial < 20; ++trial) {
            const double b_hat = 1.5 + uniform_pm1(eng);
            const double mu = uniform_pm1(eng);
            const double n = uniform_pm1(eng);
            const double fdot = uniform_pm1(eng);
            const std::array<double, 3> z = {uniform_pm1(eng), uniform_pm1(eng),
                                             uniform_pm1(eng)};
            CascadeState st(p);
            for (auto& level : st.xi)
                for (double& x : level) x = uniform_pm1(eng);

            const auto dxi = observer_derivatives(gains, b_hat, st, z[0] - n, mu);
            const std::array<double, 3> zdot = {z[1], z[2] - b_hat * mu, fdot};

            Eigen::VectorXd zeta(3 * p), zeta_dot(3 * p);
            double acc = 0.0, acc_dot = 0.0;
            for (int i = 0; i < p; ++i) {
                for (int k = 0; k < 3; ++k) {
                    zeta(3 * i + k) = z[k] - st.xi[i][k] - (k == 2 ? acc : 0.0);
                    zeta_dot(3 * i + k) = zdot[k] - dxi[i][k] - (k == 2 ? acc_dot : 0.0);
                }
                acc += st.xi[i][2];
                acc_dot += dxi[i][2];
            }

            const Eigen::VectorXd pred = es.H * zeta + es.delta * fdot - es.gamma * n;
            CHECK((zeta_dot - pred).cwiseAbs().maxCoeff() < 1e-9);
        }
    }
}

TEST_CASE("eigenvalue plumbing") {
    CHECK_THROWS_AS(eigenvalues(Eigen::MatrixXd::Zero(2, 3)), std::invalid_argument);

    const auto id = eigenvalues(Eigen::MatrixXd::Identity(3, 3));
    for (const auto& ev : id) CHECK(std::abs(ev - std::complex<double>(1.0, 0.0)) < 1e-12);

    // closed-loop error dynamics of the control law: double pole at -k
    Eigen::MatrixXd K(2, 2);
    K << 0.0, 1.0, -6400.0, -160.0;
    double mean = 0.0;
    for (const auto& ev : eigenvalues(K)) {
        CHECK(std::abs(ev - std::complex<double>(-80.0, 0.0)) < 1e-3);
        mean += ev.real() / 2.0;
    }
    CHECK(mean == doctest::Approx(-80.0).epsilon(1e-9));
}

TEST_CASE("cascade spectrum sits on the block bandwidths") {
    // Table I ladder. Block lower triangularity makes the spectrum the union
    // of the diagonal blocks'; each block carries (s + w)^3 exactly in its
    // characteristic coefficients.
    const std::vector<double> omegas = bandwidths(3, 3600.0, 3.0);
    const ErrorSystem es = aggregated_error_system(omegas);

    for (int i = 0; i < 3; ++i)
        for (int j = i + 1; j < 3; ++j)
            CHECK(es.H.block(3 * i, 3 * j, 3, 3).cwiseAbs().maxCoeff() == 0.0);

    for (int i = 0; i < 3; ++i) {
        const double w = omegas[i];
        const Poly3 c = block_poly(es.H.block<3, 3>(3 * i, 3 * i));
        CHECK(c.tr == -(3.0 * w));
        CHECK(c.m2 == 3.0 * w * w);
        CHECK(c.det == -(w * w * w));

        // and the numerical cluster agrees to high accuracy per block
        double mean = 0.0;
        for (const auto& ev : eigenvalues(es.H.block<3, 3>(3 * i, 3 * i)))
            mean += ev.real() / 3.0;
        CHECK(mean == doctest::Approx(-w).epsilon(1e-7));
    }
}

TEST_CASE("bandwidth scaling is a similarity by powers of the factor") {
    // H(c*W) * S == c * S * H(W) with S = blockdiag(1, c, c^2) per level;
    // exact in floating point for c = 2. Eigenvalues therefore scale by c.
    const std::vector<double> w1 = bandwidths(3, 450.0, 3.0);
    std::vector<double> w2 = w1;
    for (double& w : w2) w *= 2.0;
    const ErrorSystem a = aggregated_error_system(w1);
    const ErrorSystem b = aggregated_error_system(w2);

    Eigen::VectorXd s(9);
    for (int i = 0; i < 3; ++i) {
        s(3 * i) = 1.0;
        s(3 * i + 1) = 2.0;
        s(3 * i + 2) = 4.0;
    }
    const Eigen::MatrixXd lhs = b.H * s.asDiagonal();
    const Eigen::MatrixXd rhs = 2.0 * (s.asDiagonal() * a.H);
    CHECK((lhs - rhs).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("control transfer: scalar closure equals state-space closure") {
    const ControllerConfig ctrl;
    for (int p = 1; p <= 3; ++p) {
        const std::vector<double> omegas = bandwidths(p, 3600.0, 3.0);
        for (double w : {10.0, 500.0, 2.0 * M_PI * 1e4, 3e5}) {
            const double a = control_from_measurement_mag(omegas, ctrl, w);
            const double b = control_from_measurement_mag_ss(omegas, ctrl, w);
            CHECK(a == doctest::Approx(b).epsilon(1e-9));
        }
    }
}

TEST_CASE("noise amplification ordering at the sampling frequency") {
    const ControllerConfig ctrl;
    const double ws = 2.0 * M_PI * 1e4;
    const double g1 = control_from_measurement_mag(bandwidths(1, 3600.0, 3.0), ctrl, ws);
    const double g2 = control_from_measurement_mag(bandwidths(2, 3600.0, 3.0), ctrl, ws);
    const double g3 = control_from_measurement_mag(bandwidths(3, 3600.0, 3.0), ctrl, ws);
    CHECK(g1 > g2);
    CHECK(g2 > g3);
    const double gap12 = 20.0 * std::log10(g1 / g2);
    const double gap23 = 20.0 * std::log10(g2 / g3);
    CHECK(gap12 == doctest::Approx(23.82).epsilon(0.01));
    CHECK(gap23 == doctest::Approx(19.54).epsilon(0.01));
}

TEST_CASE("control transfer limits") {
    const ControllerConfig ctrl;  // k = 80, b_hat = 2e6
    // far beyond every observer pole only the direct k^2/b_hat path survives
    const double inf_mag = control_from_measurement_mag(bandwidths(3, 3600.0, 3.0), ctrl, 1e9);
    CHECK(inf_mag == doctest::Approx(ctrl.k_p() / ctrl.b_hat).epsilon(1e-4));

    // with k = 0 the observer path is strictly proper: the response rolls off
    // as 1/w past the poles instead of flooring at k^2/b_hat
    ControllerConfig pd0 = ctrl;
    pd0.k = 1e-30;
    const std::vector<double> w1 = bandwidths(1, 3600.0, 3.0);
    const double m7 = control_from_measurement_mag(w1, pd0, 1e7);
    const double m8 = control_from_measurement_mag(w1, pd0, 1e8);
    const double m9 = control_from_measurement_mag(w1, pd0, 1e9);
    CHECK(m8 < m7);
    CHECK(m9 < m8);
    CHECK(m9 < 1e-4);
    CHECK(m9 == doctest::Approx(0.1 * m8).epsilon(0.02));  // one decade, one slope
}

TEST_CASE("frequency response matches the discrete loop in the time domain") {
    // Refine the loop rate 40x below the sampler so the oracle's own Euler
    // phase lag is negligible (at Ts itself a 500 Hz drive leaves only 20
    // samples per period and the one-step duty delay skews the gain by tens
    // of percent near the loop resonance). Every depth is checked because the
    // two analytic routes share the observer realization and cannot catch a
    // bad cascade assembly alone.
    const ControllerConfig ctrl;
    const double dt = 1e-4 / 40.0;
    for (int p : {1, 2, 3}) {
        const std::vector<double> omegas = bandwidths(p, 3600.0, 3.0);
        for (double w : {100.0, 500.0, 2.0 * M_PI * 1e4 / 20.0}) {
            CAPTURE(p);
            CAPTURE(w);
            const double analytic = control_from_measurement_mag(omegas, ctrl, w);
            const double measured = discrete_loop_gain(omegas, ctrl, w, dt);
            CHECK(measured == doctest::Approx(analytic).epsilon(0.02));
        }
    }
}

TEST_CASE("noise to disturbance-estimate error: limits and ordering") {
    const ErrorSystem one = aggregated_error_system({1.0});
    CHECK(noise_to_disturbance_error_mag(one, 0.0) < 1e-12);  // bias absorbed by level 1

    // strictly proper: one net slope past the poles (w^3 injection into three
    // first-order rolloffs), so a decade drops the response tenfold
    const double m7 = noise_to_disturbance_error_mag(one, 1e7);
    const double m8 = noise_to_disturbance_error_mag(one, 1e8);
    CHECK(m8 < 1e-6);
    CHECK(m8 == doctest::Approx(0.1 * m7).epsilon(0.01));

    const std::vector<double> grid = log_grid(1.0, 1e6, 400);
    auto peak = [&](int p, double tau) {
        const FrequencyResponse fr =
            noise_to_disturbance_error_response(bandwidths(p, 3600.0, 3.0), grid, tau);
        return *std::max_element(fr.mag.begin(), fr.mag.end());
    };
    const double p1 = peak(1, 0.0), p2 = peak(2, 0.0), p3 = peak(3, 0.0);
    CHECK(p3 <= p2);
    CHECK(p2 <= p1);
    CHECK(p1 > 0.0);

    // output filtering helps everywhere, more at higher frequency
    const ErrorSystem es3 = aggregated_error_system(bandwidths(3, 3600.0, 3.0));
    for (double w : grid) {
        const double bare = noise_to_disturbance_error_mag(es3, w, 0.0);
        const double t1 = noise_to_disturbance_error_mag(es3, w, 1e-3);
        const double t2 = noise_to_disturbance_error_mag(es3, w, 1e-2);
        CHECK(t1 <= bare);
        CHECK(t2 <= t1 * (1.0 + 1e-12));
    }
}

TEST_CASE("filter leak channel") {
    const ErrorSystem es = aggregated_error_system(bandwidths(3, 3600.0, 3.0));
    const double tau = 1e-3;
    for (double w : {1.0, 100.0, 1e4, 1e6}) {
        const double base = noise_to_disturbance_error_mag(es, w, 0.0);
        const std::complex<double> gf = 1.0 / std::complex<double>(1.0, w * tau);
        CHECK(z1_leak_mag(es, w, tau) ==
              doctest::Approx(base * std::abs(1.0 - gf)).epsilon(1e-12));
    }
    // no filter, no leak
    CHECK(z1_leak_mag(es, 1e3, 0.0) == 0.0);
}

TEST_CASE("log grid") {
    const std::vector<double> g = log_grid(1.0, 1e6, 400);
    REQUIRE(g.size() == 400);
    CHECK(g.front() == 1.0);
    CHECK(g.back() == 1e6);
    for (std::size_t i = 1; i < g.size(); ++i) CHECK(g[i] > g[i - 1]);

    CHECK_THROWS_AS(log_grid(1.0, 1e6, 1), std::invalid_argument);
    CHECK_THROWS_AS(log_grid(0.0, 1e6, 10), std::invalid_argument);
    CHECK_THROWS_AS(log_grid(10.0, 10.0, 10), std::invalid_argument);
}
