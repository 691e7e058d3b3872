#pragma once

#include <string>
#include <vector>

#include "cesobuck/config.hpp"

namespace cesobuck {

// One planned run: a fully resolved config plus identifying labels. Run ids are
// the sorted label string, so aggregation order never depends on scheduling.
struct PlannedRun {
    std::string id;
    FullConfig config;
    std::vector<std::pair<std::string, std::string>> labels;
};

std::vector<PlannedRun> plan_runs(const ExperimentSpec& spec);

// Built-in experiment presets mirroring the study's procedure:
//   e1  p in {1,2,3} at the nominal bandwidths
//   e2a lambda sweep, e2b k sweep, e2c alpha sweep (p in {2,3})
//   e3  {p1, p1+LPF, p3, p3+LPF} at tau = 1e-3, constant reference
ExperimentSpec preset(const std::string& id);

struct RunOutcome {
    std::string id;
    RunCriteria criteria;
    bool diverged = false;
};

// Executes all runs (optionally on `jobs` worker threads), writes per-run
// time-series CSV + criteria JSON, an aggregate CSV sorted by run id, and a
// metadata sidecar (the only file carrying timestamps). Returns 3 if any run
// diverged, else 0.
int run_experiment(const ExperimentSpec& spec, const std::string& out_dir, int jobs);

// Bode data files: |G_uy| per p, |G_{z3err,n}| with an LPF tau band, plus
// vertical-marker metadata at w = k and w = w_s.
void emit_bode(const ExperimentSpec& spec, const std::string& out_dir,
               const std::vector<double>& lpf_taus);

// Shared CSV/JSON emission helpers (deterministic %.17g formatting).
void write_timeseries_csv(const std::string& path, const SimResult& res);
void write_criteria_json(const std::string& path, const RunCriteria& c);

}  // namespace cesobuck
