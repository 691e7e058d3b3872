#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "cesobuck/controller.hpp"
#include "cesobuck/metrics.hpp"
#include "cesobuck/observer.hpp"
#include "cesobuck/plant.hpp"
#include "cesobuck/signals.hpp"
#include "cesobuck/simloop.hpp"

namespace cesobuck {

// Everything a single run needs. An empty config file yields the nominal
// parameter set unchanged.
struct FullConfig {
    PlantParams plant;
    ReferenceConfig reference;
    DisturbanceProfile disturbance = default_disturbance();
    NoiseConfig noise;
    ObserverConfig observer;
    ControllerConfig controller;
    SimConfig sim;
    MetricWindows windows;
};

struct ExperimentSpec {
    std::string id = "custom";  // e1, e2a, e2b, e2c, e3, custom
    FullConfig base;
    // named sweep axes; the cross product of all axes times seeds is executed
    std::vector<std::pair<std::string, std::vector<double>>> sweep;
    std::vector<std::uint64_t> seeds = {1, 2, 3, 4, 5};
    std::string output_dir;
};

// Thrown for schema violations (field path included) and physical invariant
// violations. The CLI maps it to exit code 2.
struct ConfigError {
    std::string message;
};

// Parses JSON with an `include` mechanism (string or list, resolved relative to
// the file) and duplicate-key detection. Unknown fields are schema errors.
ExperimentSpec load_spec(const std::string& path);
ExperimentSpec parse_spec_text(const std::string& text, const std::string& base_dir);

// Applies one sweep-axis value to a config. Axes: p, lambda, alpha, k, lpf_tau,
// r_n. Throws ConfigError for anything else.
void apply_axis(FullConfig& cfg, const std::string& name, double value);

// Full cross-module validation; returns warnings (lambda*Ts stability margin
// and similar), throws ConfigError on hard violations.
std::vector<std::string> validate_spec(const ExperimentSpec& spec);

}  // namespace cesobuck
