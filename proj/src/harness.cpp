#include "cesobuck/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <set>
#include <thread>

#include "cesobuck/analysis.hpp"

namespace cesobuck {

namespace {

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string fmt_label(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);  // plain \n everywhere
    if (!out) throw ConfigError{"cannot write " + path};
    return out;
}

SimResult execute(const FullConfig& c) {
    return run_simulation(c.plant, c.reference, c.disturbance, c.noise, c.observer,
                          c.controller, c.sim);
}

}  // namespace

std::vector<PlannedRun> plan_runs(const ExperimentSpec& spec) {
    std::vector<PlannedRun> runs;
    std::vector<std::size_t> idx(spec.sweep.size(), 0);
    for (;;) {
        FullConfig cfg = spec.base;
        std::vector<std::pair<std::string, std::string>> labels;
        for (std::size_t a = 0; a < spec.sweep.size(); ++a) {
            const double v = spec.sweep[a].second[idx[a]];
            apply_axis(cfg, spec.sweep[a].first, v);
            labels.emplace_back(spec.sweep[a].first, fmt_label(v));
        }
        for (std::uint64_t seed : spec.seeds) {
            PlannedRun run;
            run.config = cfg;
            run.config.sim.seed = seed;
            run.labels = labels;
            run.labels.emplace_back("seed", std::to_string(seed));
            for (const auto& [k, v] : run.labels) {
                if (!run.id.empty()) run.id += '_';
                run.id += k + '=' + v;
            }
            runs.push_back(std::move(run));
        }
        // odometer over the sweep axes
        std::size_t a = 0;
        for (; a < idx.size(); ++a) {
            if (++idx[a] < spec.sweep[a].second.size()) break;
            idx[a] = 0;
        }
        if (a == idx.size()) break;
    }
    std::sort(runs.begin(), runs.end(),
              [](const PlannedRun& x, const PlannedRun& y) { return x.id < y.id; });
    return runs;
}

ExperimentSpec preset(const std::string& id) {
    ExperimentSpec spec;
    spec.id = id;
    spec.seeds = {1};  // presets are single-seed; ordering tests sweep seeds themselves
    if (id == "e1") {
        spec.sweep = {{"p", {1, 2, 3}}};
    } else if (id == "e2a") {
        spec.sweep = {{"p", {1, 2, 3}}, {"lambda", {1200, 2400, 3600, 4800}}};
    } else if (id == "e2b") {
        spec.sweep = {{"p", {1, 2, 3}}, {"k", {40, 80, 160}}};
    } else if (id == "e2c") {
        spec.sweep = {{"p", {2, 3}}, {"alpha", {2, 3, 4}}};
    } else if (id == "e3") {
        // Constant reference at the bias, four observer/filter pairings.
        spec.base.reference.square_amplitude = 0.0;
        spec.sweep = {{"p", {1, 3}}, {"lpf_tau", {0.0, 1e-3}}};
    } else {
        throw ConfigError{"unknown experiment preset \"" + id + "\" (e1, e2a, e2b, e2c, e3)"};
    }
    return spec;
}

void write_timeseries_csv(const std::string& path, const SimResult& res) {
    std::ofstream out = open_out(path);
    out << "t,v_r,v_o,y_o,e,y_meas,duty,duty_unsat,d,z1_hat,z2_hat,z3_hat,f_star_truth\n";
    for (const auto& r : res.records) {
        out << fmt(r.t) << ',' << fmt(r.v_r) << ',' << fmt(r.v_o) << ',' << fmt(r.y_o) << ','
            << fmt(r.e) << ',' << fmt(r.y_meas) << ',' << fmt(r.duty) << ','
            << fmt(r.duty_unsat) << ',' << fmt(r.d) << ',' << fmt(r.z1_hat) << ','
            << fmt(r.z2_hat) << ',' << fmt(r.z3_hat) << ',' << fmt(r.f_star_truth) << '\n';
    }
}

void write_criteria_json(const std::string& path, const RunCriteria& c) {
    std::ofstream out = open_out(path);
    out << "{\n"
        << "  \"iae\": " << fmt(c.iae) << ",\n"
        << "  \"effort\": " << fmt(c.effort) << ",\n"
        << "  \"jitter\": " << fmt(c.jitter) << ",\n"
        << "  \"saturation_fraction\": " << fmt(c.saturation_fraction) << ",\n"
        << "  \"ripple_amplitude\": " << fmt(c.ripple_amplitude) << ",\n"
        << "  \"duty_ripple\": " << fmt(c.duty_ripple) << ",\n"
        << "  \"diverged\": " << (c.diverged ? "true" : "false") << "\n"
        << "}\n";
}

int run_experiment(const ExperimentSpec& spec, const std::string& out_dir, int jobs) {
    const std::vector<PlannedRun> plan = plan_runs(spec);
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError{"cannot create output directory " + out_dir};

    struct Trace {
        std::vector<double> t, e, duty;
    };
    std::vector<RunOutcome> outcomes(plan.size());
    std::vector<Trace> traces(plan.size());
    std::vector<std::string> failures(plan.size());

    std::atomic<std::size_t> next{0};
    auto worker = [&] {
        for (;;) {
            const std::size_t i = next.fetch_add(1);
            if (i >= plan.size()) return;
            const PlannedRun& run = plan[i];
            try {
                const SimResult res = execute(run.config);
                const RunCriteria crit =
                    summarize(res, run.config.windows, run.config.controller.duty_min,
                              run.config.controller.duty_max);
                write_timeseries_csv(out_dir + "/" + run.id + ".csv", res);
                write_criteria_json(out_dir + "/" + run.id + ".criteria.json", crit);
                Trace& tr = traces[i];
                tr.t.reserve(res.records.size());
                for (const auto& r : res.records) {
                    tr.t.push_back(r.t);
                    tr.e.push_back(r.e);
                    tr.duty.push_back(r.duty);
                }
                outcomes[i] = {run.id, crit, res.diverged};
            } catch (const std::exception& e) {
                failures[i] = e.what();
            } catch (const ConfigError& e) {
                failures[i] = e.message;
            }
        }
    };
    const int n_workers =
        std::max(1, std::min<int>(jobs < 1 ? 1 : jobs, static_cast<int>(plan.size())));
    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    for (std::size_t i = 0; i < plan.size(); ++i)
        if (!failures[i].empty())
            throw ConfigError{"run " + plan[i].id + " failed: " + failures[i]};

    // Aggregate, rows in run-id order (the plan is already sorted).
    {
        std::ofstream out = open_out(out_dir + "/aggregate.csv");
        out << "run_id";
        for (const auto& [k, v] : plan.front().labels) out << ',' << k;
        out << ",iae,effort,jitter,saturation_fraction,ripple_amplitude,duty_ripple,diverged\n";
        for (std::size_t i = 0; i < plan.size(); ++i) {
            const RunCriteria& c = outcomes[i].criteria;
            out << outcomes[i].id;
            for (const auto& [k, v] : plan[i].labels) out << ',' << v;
            out << ',' << fmt(c.iae) << ',' << fmt(c.effort) << ',' << fmt(c.jitter) << ','
                << fmt(c.saturation_fraction) << ',' << fmt(c.ripple_amplitude) << ','
                << fmt(c.duty_ripple) << ',' << (c.diverged ? "true" : "false") << '\n';
        }
    }

    // Plot data: one column per run for the error and duty traces.
    for (const char* which : {"error_traces.csv", "duty_traces.csv"}) {
        std::ofstream out = open_out(out_dir + "/" + which);
        std::size_t longest = 0, tcol = 0;
        for (std::size_t i = 0; i < plan.size(); ++i)
            if (traces[i].t.size() > longest) {
                longest = traces[i].t.size();
                tcol = i;
            }
        out << "t";
        for (const auto& o : outcomes) out << ',' << o.id;
        out << '\n';
        const bool error_file = std::string(which) == "error_traces.csv";
        for (std::size_t r = 0; r < longest; ++r) {
            out << fmt(traces[tcol].t[r]);
            for (const auto& tr : traces) {
                out << ',';
                const auto& col = error_file ? tr.e : tr.duty;
                if (r < col.size()) out << fmt(col[r]);
            }
            out << '\n';
        }
    }

    // Bode data for the spec's configurations.
    std::set<double> taus;
    for (const auto& run : plan)
        if (run.config.sim.lpf_tau > 0.0) taus.insert(run.config.sim.lpf_tau);
    emit_bode(spec, out_dir + "/bode", std::vector<double>(taus.begin(), taus.end()));

    // The metadata sidecar is the single place a timestamp appears.
    {
        std::ofstream out = open_out(out_dir + "/meta.json");
        char stamp[32];
        const std::time_t now = std::time(nullptr);
        std::tm tm_utc{};
        gmtime_r(&now, &tm_utc);
        std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", &tm_utc);
        out << "{\n  \"id\": \"" << spec.id << "\",\n  \"runs\": " << plan.size()
            << ",\n  \"generated_at\": \"" << stamp << "\"\n}\n";
    }

    for (const auto& o : outcomes)
        if (o.diverged) return 3;
    return 0;
}

void emit_bode(const ExperimentSpec& spec, const std::string& out_dir,
               const std::vector<double>& lpf_taus) {
    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) throw ConfigError{"cannot create output directory " + out_dir};

    std::set<int> ps{spec.base.observer.p};
    for (const auto& axis : spec.sweep)
        if (axis.first == "p") {
            ps.clear();
            for (double v : axis.second) ps.insert(static_cast<int>(v));
        }

    const std::vector<double> grid = log_grid(1.0, 1e6, 400);
    auto write_curve = [&](const std::string& name, const FrequencyResponse& fr) {
        std::ofstream out = open_out(out_dir + "/" + name);
        out << "omega_rad_s,magnitude_db\n";
        for (std::size_t i = 0; i < fr.omega.size(); ++i)
            out << fmt(fr.omega[i]) << ',' << fmt(20.0 * std::log10(fr.mag[i])) << '\n';
    };

    for (int p : ps) {
        const std::vector<double> omegas =
            bandwidths(p, spec.base.observer.lambda, spec.base.observer.alpha);
        char stem[32];
        std::snprintf(stem, sizeof stem, "guy_p%d.csv", p);
        write_curve(stem, control_from_measurement_response(omegas, spec.base.controller, grid));

        std::snprintf(stem, sizeof stem, "znoise_p%d.csv", p);
        write_curve(stem, noise_to_disturbance_error_response(omegas, grid));

        const ErrorSystem es = aggregated_error_system(omegas);
        for (double tau : lpf_taus) {
            char name[64];
            std::snprintf(name, sizeof name, "znoise_p%d_tau%s.csv", p, fmt_label(tau).c_str());
            write_curve(name, noise_to_disturbance_error_response(omegas, grid, tau));
            FrequencyResponse leak;
            leak.omega = grid;
            for (double w : grid) leak.mag.push_back(z1_leak_mag(es, w, tau));
            std::snprintf(name, sizeof name, "z1leak_p%d_tau%s.csv", p, fmt_label(tau).c_str());
            write_curve(name, leak);
        }
    }

    std::ofstream out = open_out(out_dir + "/markers.csv");
    out << "name,omega_rad_s\n";
    out << "k," << fmt(spec.base.controller.k) << '\n';
    out << "omega_s," << fmt(2.0 * M_PI / spec.base.sim.Ts) << '\n';
}

}  // namespace cesobuck
