#pragma once

#include <complex>
#include <vector>

#include <Eigen/Dense>

#include "cesobuck/controller.hpp"
#include "cesobuck/observer.hpp"

namespace cesobuck {

// Aggregated observation-error dynamics for the whole cascade, in the
// transformed coordinates zeta_i = z - xi_i - b_col * sum_{j<i} xi_j3:
//   zeta_dot = H * zeta + delta * Fdot_star - gamma * n
// H is block lower triangular with A - l_i c^T on the diagonal,
// (l_i - w_{i-1}^3 b_col) c^T on the first sub-diagonal and
// (w_{j+1}^3 - w_j^3) b_col c^T below that; its spectrum is {-w_oj, each x3}.
struct ErrorSystem {
    Eigen::MatrixXd H;
    Eigen::VectorXd gamma;  // noise input, signed so zeta_dot = H z + delta Fd - gamma n
    Eigen::VectorXd delta;  // Fdot_star input (stacked b columns)
    int p;

    // Row index of the level-p third state = overall disturbance-estimate error.
    int z3_row() const { return 3 * p - 1; }
    int z2_row() const { return 3 * p - 2; }
};

ErrorSystem aggregated_error_system(const std::vector<double>& omegas);

std::vector<std::complex<double>> eigenvalues(const Eigen::MatrixXd& M);

struct FrequencyResponse {
    std::vector<double> omega;
    std::vector<double> mag;
};

// |G_uy(jw)|: measured error to control, observer and PD closed over the
// controller equation. Built per frequency as T_mu_y / (1 - T_mu_mu), the
// scalar loop closure around the open observer.
double control_from_measurement_mag(const std::vector<double>& omegas,
                                    const ControllerConfig& ctrl, double w);
FrequencyResponse control_from_measurement_response(const std::vector<double>& omegas,
                                                    const ControllerConfig& ctrl,
                                                    const std::vector<double>& grid);

// Same transfer assembled as a closed state-space system and evaluated
// directly; independent route used to cross-check the scalar closure.
double control_from_measurement_mag_ss(const std::vector<double>& omegas,
                                       const ControllerConfig& ctrl, double w);

// |G_{z3err,n}(jw)|, the noise to disturbance-estimate-error transfer
// selector_row * (jwI - H)^-1 * gamma. With lpf_tau > 0 the measurement path
// is composed in series with 1/(jw tau + 1).
double noise_to_disturbance_error_mag(const ErrorSystem& es, double w, double lpf_tau = 0.0);
FrequencyResponse noise_to_disturbance_error_response(const std::vector<double>& omegas,
                                                      const std::vector<double>& grid,
                                                      double lpf_tau = 0.0);

// The companion term the filter introduces: the true error signal leaks into
// the innovation through (1 - G_LPF); same injection column, complementary
// filter factor.
double z1_leak_mag(const ErrorSystem& es, double w, double lpf_tau);

// log-spaced grid helper for Bode outputs
std::vector<double> log_grid(double w_lo, double w_hi, int n);

}  // namespace cesobuck
