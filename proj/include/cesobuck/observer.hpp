#pragma once

#include <array>
#include <string>
#include <vector>

namespace cesobuck {

// Cascade of p third-order high-gain observers. Level 1 corrects against the
// measured error; level i>1 corrects against level i-1's first state and
// carries the lower levels' third states in its input channel. For p=1 this is
// the standard extended state observer.
struct ObserverConfig {
    int p = 3;
    double lambda = 3600.0;  // top-level bandwidth, rad/s
    double alpha = 3.0;      // level-to-level ratio, must exceed 1
    double b_hat = 2.0e6;    // input gain estimate
};

// omega_oj = lambda / alpha^(p-j): the top level sits at lambda, lower levels
// are slower by powers of alpha.
std::vector<double> bandwidths(int p, double lambda, double alpha);

// l = (3w, 3w^2, w^3): places the level's error poles at -w (triple).
std::array<double, 3> eso_gains(double omega);

struct CascadeState {
    std::vector<std::array<double, 3>> xi;  // xi[i] = level i+1 states

    explicit CascadeState(int p = 0) : xi(p, {0.0, 0.0, 0.0}) {}
};

// Continuous-time right-hand side. y is the measured error fed to level 1;
// level i>1 is fed by level i-1's first state and the running sum of the lower
// levels' third states. Throws on a gains/state dimension mismatch.
std::vector<std::array<double, 3>> observer_derivatives(
    const std::vector<std::array<double, 3>>& gains, double b_hat, const CascadeState& st,
    double y, double mu);

// In-place forward-Euler update with the previous control held.
void observer_step(const std::vector<std::array<double, 3>>& gains, double b_hat,
                   CascadeState& st, double y, double mu_prev, double dt);

struct ExtendedEstimate {
    double z1_hat;  // error estimate
    double z2_hat;  // error-rate estimate
    double z3_hat;  // total-disturbance estimate
};

// z1, z2 from the top level; z3 is the sum of every level's third state.
ExtendedEstimate select_estimate(const CascadeState& st);

std::string validate_observer(const ObserverConfig& cfg);

}  // namespace cesobuck
