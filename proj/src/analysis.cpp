#include "cesobuck/analysis.hpp"

#include <cmath>
#include <cstdio>
#include <stdexcept>

namespace cesobuck {

namespace {

using Cplx = std::complex<double>;

// Observer LTI with separate measurement and control inputs, plus the control
// readout row g so that mu = (g . xi + k^2 y) / b_hat. Shared by both G_uy
// routes.
struct ObserverLti {
    Eigen::MatrixXd Ao;
    Eigen::VectorXd By;   // measurement injection, level 1 only
    Eigen::VectorXd Bmu;  // control drive, every level
    Eigen::VectorXd g;    // selector row of the control law without the y term
};

ObserverLti observer_lti(const std::vector<double>& omegas, const ControllerConfig& ctrl) {
    const int p = static_cast<int>(omegas.size());
    const int n = 3 * p;
    ObserverLti s;
    s.Ao = Eigen::MatrixXd::Zero(n, n);
    s.By = Eigen::VectorXd::Zero(n);
    s.Bmu = Eigen::VectorXd::Zero(n);
    s.g = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < p; ++i) {
        const auto l = eso_gains(omegas[i]);
        const int r = 3 * i;
        // A - l c^T on the diagonal
        s.Ao(r, r + 1) = 1.0;
        s.Ao(r + 1, r + 2) = 1.0;
        for (int k = 0; k < 3; ++k) s.Ao(r + k, r) -= l[k];
        s.Bmu(r + 1) = -ctrl.b_hat;
        if (i == 0) {
            for (int k = 0; k < 3; ++k) s.By(k) = l[k];
        } else {
            // innovation against the level below, plus the lower thirds summed
            // into the drive channel
            for (int k = 0; k < 3; ++k) s.Ao(r + k, 3 * (i - 1)) += l[k];
            for (int j = 0; j < i; ++j) s.Ao(r + 1, 3 * j + 2) += 1.0;
        }
        s.g(r + 2) = 1.0;
    }
    s.g(3 * (p - 1) + 1) += ctrl.k_d();
    return s;
}

Eigen::VectorXcd solve_shifted(const Eigen::MatrixXd& A, double w, const Eigen::VectorXd& rhs) {
    const int n = static_cast<int>(A.rows());
    Eigen::MatrixXcd M = Eigen::MatrixXcd::Identity(n, n) * Cplx(0.0, w);
    M -= A.cast<Cplx>();
    return M.partialPivLu().solve(rhs.cast<Cplx>());
}

}  // namespace

ErrorSystem aggregated_error_system(const std::vector<double>& omegas) {
    const int p = static_cast<int>(omegas.size());
    if (p < 1) throw std::invalid_argument("error system needs at least one level");
    const int n = 3 * p;
    ErrorSystem es;
    es.p = p;
    es.H = Eigen::MatrixXd::Zero(n, n);
    es.gamma = Eigen::VectorXd::Zero(n);
    es.delta = Eigen::VectorXd::Zero(n);

    std::vector<std::array<double, 3>> l(p);
    for (int i = 0; i < p; ++i) l[i] = eso_gains(omegas[i]);

    for (int i = 0; i < p; ++i) {
        const int r = 3 * i;
        es.H(r, r + 1) = 1.0;
        es.H(r + 1, r + 2) = 1.0;
        for (int k = 0; k < 3; ++k) es.H(r + k, r) -= l[i][k];
        es.delta(r + 2) = 1.0;
        if (i == 0) continue;
        // first sub-diagonal block: (l_i - w_{i-1}^3 b) c^T
        es.H(r, 3 * (i - 1)) += l[i][0];
        es.H(r + 1, 3 * (i - 1)) += l[i][1];
        es.H(r + 2, 3 * (i - 1)) += l[i][2] - l[i - 1][2];
        // deeper blocks: (w_{j+1}^3 - w_j^3) b c^T
        for (int j = 0; j + 1 < i; ++j) es.H(r + 2, 3 * j) += l[j + 1][2] - l[j][2];
    }
    // Printed form carries -l1 on the noise channel; with the physically
    // measured y = e - n this makes zeta_dot = H zeta + delta Fdot - gamma n
    // hold identically (checked by direct differentiation in the tests).
    for (int k = 0; k < 3; ++k) es.gamma(k) = -l[0][k];
    for (int i = 1; i < p; ++i) es.gamma(3 * i + 2) = -l[0][2];
    return es;
}

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M) {
    if (M.rows() != M.cols()) throw std::invalid_argument("eigenvalues: matrix must be square");
    Eigen::EigenSolver<Eigen::MatrixXd> solver(M, /*computeEigenvectors=*/false);
    std::vector<std::complex<double>> out(M.rows());
    for (int i = 0; i < M.rows(); ++i) out[i] = solver.eigenvalues()(i);
    return out;
}

double control_from_measurement_mag(const std::vector<double>& omegas,
                                    const ControllerConfig& ctrl, double w) {
    const ObserverLti s = observer_lti(omegas, ctrl);
    const Eigen::VectorXcd xy = solve_shifted(s.Ao, w, s.By);
    const Eigen::VectorXcd xmu = solve_shifted(s.Ao, w, s.Bmu);
    const Cplx t_mu_y = (s.g.cast<Cplx>().dot(xy) + ctrl.k_p()) / ctrl.b_hat;
    const Cplx t_mu_mu = s.g.cast<Cplx>().dot(xmu) / ctrl.b_hat;
    const Cplx denom = 1.0 - t_mu_mu;
    if (std::abs(denom) < 1e-300) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "control loop closure singular at w = %.17g rad/s", w);
        throw std::runtime_error(buf);
    }
    return std::abs(t_mu_y / denom);
}

FrequencyResponse control_from_measurement_response(const std::vector<double>& omegas,
                                                    const ControllerConfig& ctrl,
                                                    const std::vector<double>& grid) {
    FrequencyResponse fr;
    fr.omega = grid;
    fr.mag.reserve(grid.size());
    for (double w : grid) fr.mag.push_back(control_from_measurement_mag(omegas, ctrl, w));
    return fr;
}

double control_from_measurement_mag_ss(const std::vector<double>& omegas,
                                       const ControllerConfig& ctrl, double w) {
    const ObserverLti s = observer_lti(omegas, ctrl);
    const Eigen::MatrixXd Acl = s.Ao + s.Bmu * s.g.transpose() / ctrl.b_hat;
    const Eigen::VectorXd Bcl = s.By + s.Bmu * (ctrl.k_p() / ctrl.b_hat);
    const Eigen::VectorXcd x = solve_shifted(Acl, w, Bcl);
    const Cplx G = s.g.cast<Cplx>().dot(x) / ctrl.b_hat + ctrl.k_p() / ctrl.b_hat;
    return std::abs(G);
}

double noise_to_disturbance_error_mag(const ErrorSystem& es, double w, double lpf_tau) {
    const Eigen::VectorXcd x = solve_shifted(es.H, w, es.gamma);
    double mag = std::abs(x(es.z3_row()));
    if (lpf_tau > 0.0) mag /= std::abs(Cplx(1.0, w * lpf_tau));  // series 1/(jw tau + 1)
    return mag;
}

FrequencyResponse noise_to_disturbance_error_response(const std::vector<double>& omegas,
                                                      const std::vector<double>& grid,
                                                      double lpf_tau) {
    const ErrorSystem es = aggregated_error_system(omegas);
    FrequencyResponse fr;
    fr.omega = grid;
    fr.mag.reserve(grid.size());
    for (double w : grid) fr.mag.push_back(noise_to_disturbance_error_mag(es, w, lpf_tau));
    return fr;
}

double z1_leak_mag(const ErrorSystem& es, double w, double lpf_tau) {
    const Eigen::VectorXcd x = solve_shifted(es.H, w, es.gamma);
    const Cplx gf = 1.0 / Cplx(1.0, w * lpf_tau);
    return std::abs(x(es.z3_row())) * std::abs(1.0 - gf);
}

std::vector<double> log_grid(double w_lo, double w_hi, int n) {
    if (n < 2 || !(w_hi > w_lo) || !(w_lo > 0.0))
        throw std::invalid_argument("log_grid: need n >= 2 and 0 < w_lo < w_hi");
    std::vector<double> g(n);
    const double step = std::log10(w_hi / w_lo) / (n - 1);
    for (int i = 0; i < n; ++i) g[i] = w_lo * std::pow(10.0, i * step);
    g.back() = w_hi;
    return g;
}

}  // namespace cesobuck
