#include "cesobuck/observer.hpp"

#include <cmath>
#include <stdexcept>

namespace cesobuck {

std::vector<double> bandwidths(int p, double lambda, double alpha) {
    std::vector<double> w(p);
    for (int j = 0; j < p; ++j) w[j] = lambda / std::pow(alpha, p - 1 - j);
    return w;
}

std::array<double, 3> eso_gains(double omega) {
    return {3.0 * omega, 3.0 * omega * omega, omega * omega * omega};
}

std::vector<std::array<double, 3>> observer_derivatives(
    const std::vector<std::array<double, 3>>& gains, double b_hat, const CascadeState& st,
    double y, double mu) {
    if (gains.size() != st.xi.size())
        throw std::invalid_argument("observer gains/state dimension mismatch");
    std::vector<std::array<double, 3>> dxi(st.xi.size());
    double sum_thirds = 0.0;  // running sum of lower levels' disturbance states
    for (std::size_t i = 0; i < st.xi.size(); ++i) {
        const auto& l = gains[i];
        const auto& x = st.xi[i];
        const double innov = (i == 0 ? y : st.xi[i - 1][0]) - x[0];
        dxi[i][0] = x[1] + l[0] * innov;
        // Level 1 sees only its own drive; the expression is kept free of the
        // (zero) cascade sum so the p=1 reduction is bit-exact against a
        // standalone extended state observer.
        dxi[i][1] = (i == 0) ? x[2] - b_hat * mu + l[1] * innov
                             : x[2] - b_hat * mu + sum_thirds + l[1] * innov;
        dxi[i][2] = l[2] * innov;
        sum_thirds += x[2];
    }
    return dxi;
}

void observer_step(const std::vector<std::array<double, 3>>& gains, double b_hat,
                   CascadeState& st, double y, double mu_prev, double dt) {
    const auto dxi = observer_derivatives(gains, b_hat, st, y, mu_prev);
    for (std::size_t i = 0; i < st.xi.size(); ++i)
        for (int k = 0; k < 3; ++k) st.xi[i][k] += dt * dxi[i][k];
}

ExtendedEstimate select_estimate(const CascadeState& st) {
    const auto& top = st.xi.back();
    double z3 = 0.0;
    for (const auto& level : st.xi) z3 += level[2];
    return {top[0], top[1], z3};
}

std::string validate_observer(const ObserverConfig& cfg) {
    if (cfg.p < 1) return "observer needs at least one level";
    if (!(cfg.lambda > 0.0)) return "observer bandwidth lambda must be positive";
    if (!(cfg.alpha > 1.0)) return "observer level ratio alpha must exceed 1";
    if (cfg.b_hat == 0.0) return "input gain estimate b_hat must be nonzero";
    return {};
}

}  // namespace cesobuck
