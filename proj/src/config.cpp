#include "cesobuck/config.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include "json.hpp"

namespace cesobuck {

using ojson = nlohmann::ordered_json;

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError{path.empty() ? what : path + ": " + what};
}

double want_number(const ojson& v, const std::string& path) {
    if (!v.is_number()) fail(path, "expected a number");
    return v.get<double>();
}

std::int64_t want_integer(const ojson& v, const std::string& path) {
    if (v.is_number_integer()) return v.get<std::int64_t>();
    if (v.is_number_float()) {
        const double d = v.get<double>();
        if (d == std::floor(d)) return static_cast<std::int64_t>(d);
    }
    fail(path, "expected an integer");
}

bool want_bool(const ojson& v, const std::string& path) {
    if (!v.is_boolean()) fail(path, "expected a boolean");
    return v.get<bool>();
}

std::string want_string(const ojson& v, const std::string& path) {
    if (!v.is_string()) fail(path, "expected a string");
    return v.get<std::string>();
}

// Walks an object's keys against a dispatch table; anything unmatched is a
// schema error carrying the full field path.
struct Section {
    const ojson& obj;
    std::string path;

    template <class F>
    void field(const char* name, F&& apply) {
        auto it = obj.find(name);
        if (it != obj.end()) {
            apply(*it, path + "." + name);
            seen.insert(name);
        }
    }
    void finish() const {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!seen.count(it.key())) fail(path + "." + it.key(), "unknown field");
    }

    std::set<std::string> seen;
};

void apply_plant(const ojson& j, PlantParams& p, const std::string& path) {
    Section s{j, path};
    s.field("v_in", [&](const ojson& v, const std::string& fp) { p.v_in = want_number(v, fp); });
    s.field("L", [&](const ojson& v, const std::string& fp) { p.L = want_number(v, fp); });
    s.field("C", [&](const ojson& v, const std::string& fp) { p.C = want_number(v, fp); });
    s.field("R", [&](const ojson& v, const std::string& fp) { p.R = want_number(v, fp); });
    s.finish();
}

void apply_reference(const ojson& j, ReferenceConfig& r, const std::string& path) {
    Section s{j, path};
    s.field("bias", [&](const ojson& v, const std::string& fp) { r.bias = want_number(v, fp); });
    s.field("square_amplitude", [&](const ojson& v, const std::string& fp) {
        r.square_amplitude = want_number(v, fp);
    });
    s.field("period",
            [&](const ojson& v, const std::string& fp) { r.period = want_number(v, fp); });
    s.field("amplitude_is_peak_to_peak", [&](const ojson& v, const std::string& fp) {
        r.amplitude_is_peak_to_peak = want_bool(v, fp);
    });
    s.field("filter_num",
            [&](const ojson& v, const std::string& fp) { r.filter_num = want_number(v, fp); });
    s.field("filter_den", [&](const ojson& v, const std::string& fp) {
        if (!v.is_array() || v.size() != 3) fail(fp, "expected 3 denominator coefficients");
        for (int i = 0; i < 3; ++i) r.filter_den[i] = want_number(v[i], fp);
    });
    s.field("r_vr", [&](const ojson& v, const std::string& fp) { r.r_vr = want_number(v, fp); });
    s.finish();
}

DisturbanceSegment::Kind segment_kind(const std::string& name, const std::string& path) {
    if (name == "constant") return DisturbanceSegment::Kind::constant;
    if (name == "step") return DisturbanceSegment::Kind::step;
    if (name == "sine") return DisturbanceSegment::Kind::sine;
    if (name == "ramp") return DisturbanceSegment::Kind::ramp;
    fail(path, "unknown segment kind \"" + name + "\" (constant, step, sine, ramp)");
}

void apply_disturbance(const ojson& j, DisturbanceProfile& d, const std::string& path) {
    Section s{j, path};
    s.field("r_d", [&](const ojson& v, const std::string& fp) { d.r_d = want_number(v, fp); });
    s.field("r_d_dot",
            [&](const ojson& v, const std::string& fp) { d.r_d_dot = want_number(v, fp); });
    s.field("segments", [&](const ojson& v, const std::string& fp) {
        if (!v.is_array()) fail(fp, "expected a list of segments");
        d.segments.clear();
        for (std::size_t i = 0; i < v.size(); ++i) {
            char idx[32];
            std::snprintf(idx, sizeof idx, "[%zu]", i);
            const std::string sp = fp + idx;
            if (!v[i].is_object()) fail(sp, "expected a segment object");
            DisturbanceSegment seg;
            Section ss{v[i], sp};
            ss.field("kind", [&](const ojson& kv, const std::string& kp) {
                seg.kind = segment_kind(want_string(kv, kp), kp);
            });
            ss.field("t_start", [&](const ojson& kv, const std::string& kp) {
                seg.t_start = want_number(kv, kp);
            });
            ss.field("t_end", [&](const ojson& kv, const std::string& kp) {
                seg.t_end = want_number(kv, kp);
            });
            ss.field("value", [&](const ojson& kv, const std::string& kp) {
                seg.value = want_number(kv, kp);
            });
            ss.field("amplitude", [&](const ojson& kv, const std::string& kp) {
                seg.amplitude = want_number(kv, kp);
            });
            ss.field("freq_hz", [&](const ojson& kv, const std::string& kp) {
                seg.freq_hz = want_number(kv, kp);
            });
            ss.field("offset", [&](const ojson& kv, const std::string& kp) {
                seg.offset = want_number(kv, kp);
            });
            ss.field("phase", [&](const ojson& kv, const std::string& kp) {
                seg.phase = want_number(kv, kp);
            });
            ss.field("from", [&](const ojson& kv, const std::string& kp) {
                seg.from = want_number(kv, kp);
            });
            ss.field("to", [&](const ojson& kv, const std::string& kp) {
                seg.to = want_number(kv, kp);
            });
            ss.finish();
            d.segments.push_back(seg);
        }
    });
    s.finish();
}

void apply_noise(const ojson& j, NoiseConfig& n, const std::string& path) {
    Section s{j, path};
    s.field("r_n", [&](const ojson& v, const std::string& fp) { n.r_n = want_number(v, fp); });
    s.field("distribution", [&](const ojson& v, const std::string& fp) {
        const std::string name = want_string(v, fp);
        if (name == "uniform")
            n.distribution = NoiseConfig::Distribution::uniform;
        else if (name == "truncated_gaussian")
            n.distribution = NoiseConfig::Distribution::truncated_gaussian;
        else
            fail(fp, "unknown distribution \"" + name + "\" (uniform, truncated_gaussian)");
    });
    s.finish();
}

void apply_observer(const ojson& j, ObserverConfig& o, const std::string& path) {
    Section s{j, path};
    s.field("p", [&](const ojson& v, const std::string& fp) {
        o.p = static_cast<int>(want_integer(v, fp));
    });
    s.field("lambda",
            [&](const ojson& v, const std::string& fp) { o.lambda = want_number(v, fp); });
    s.field("alpha", [&](const ojson& v, const std::string& fp) { o.alpha = want_number(v, fp); });
    s.field("b_hat", [&](const ojson& v, const std::string& fp) { o.b_hat = want_number(v, fp); });
    s.finish();
}

void apply_controller(const ojson& j, ControllerConfig& c, const std::string& path) {
    Section s{j, path};
    s.field("k", [&](const ojson& v, const std::string& fp) { c.k = want_number(v, fp); });
    s.field("b_hat", [&](const ojson& v, const std::string& fp) { c.b_hat = want_number(v, fp); });
    s.field("duty_min",
            [&](const ojson& v, const std::string& fp) { c.duty_min = want_number(v, fp); });
    s.field("duty_max",
            [&](const ojson& v, const std::string& fp) { c.duty_max = want_number(v, fp); });
    s.finish();
}

void apply_sim(const ojson& j, SimConfig& c, const std::string& path) {
    Section s{j, path};
    s.field("Ts", [&](const ojson& v, const std::string& fp) { c.Ts = want_number(v, fp); });
    s.field("substeps", [&](const ojson& v, const std::string& fp) {
        c.substeps = static_cast<int>(want_integer(v, fp));
    });
    s.field("duration",
            [&](const ojson& v, const std::string& fp) { c.duration = want_number(v, fp); });
    s.field("seed", [&](const ojson& v, const std::string& fp) {
        c.seed = static_cast<std::uint64_t>(want_integer(v, fp));
    });
    s.field("lpf_tau",
            [&](const ojson& v, const std::string& fp) { c.lpf_tau = want_number(v, fp); });
    s.field("divergence_threshold", [&](const ojson& v, const std::string& fp) {
        c.divergence_threshold = want_number(v, fp);
    });
    s.field("r_vo", [&](const ojson& v, const std::string& fp) { c.r_vo = want_number(v, fp); });
    s.field("r_iL", [&](const ojson& v, const std::string& fp) { c.r_iL = want_number(v, fp); });
    s.field("initial_state", [&](const ojson& v, const std::string& fp) {
        if (v.is_null()) {
            c.initial_state.reset();
            return;
        }
        PlantState st{0.0, 0.0};
        Section ss{v, fp};
        ss.field("v_o",
                 [&](const ojson& kv, const std::string& kp) { st.v_o = want_number(kv, kp); });
        ss.field("i_L",
                 [&](const ojson& kv, const std::string& kp) { st.i_L = want_number(kv, kp); });
        ss.finish();
        c.initial_state = st;
    });
    s.finish();
}

void apply_windows(const ojson& j, MetricWindows& w, const std::string& path) {
    Section s{j, path};
    s.field("ripple_t0",
            [&](const ojson& v, const std::string& fp) { w.ripple_t0 = want_number(v, fp); });
    s.field("ripple_t1",
            [&](const ojson& v, const std::string& fp) { w.ripple_t1 = want_number(v, fp); });
    s.finish();
}

// Objects merge key-wise (overlay wins inside), everything else is replaced.
void deep_merge(ojson& base, const ojson& overlay) {
    if (!base.is_object() || !overlay.is_object()) {
        base = overlay;
        return;
    }
    for (auto it = overlay.begin(); it != overlay.end(); ++it) {
        if (base.contains(it.key()))
            deep_merge(base[it.key()], it.value());
        else
            base[it.key()] = it.value();
    }
}

ojson parse_with_duplicate_check(const std::string& text) {
    std::vector<std::set<std::string>> scopes;
    auto cb = [&scopes](int, ojson::parse_event_t event, ojson& parsed) {
        if (event == ojson::parse_event_t::object_start) {
            scopes.emplace_back();
        } else if (event == ojson::parse_event_t::object_end) {
            scopes.pop_back();
        } else if (event == ojson::parse_event_t::key) {
            const std::string key = parsed.get<std::string>();
            if (!scopes.back().insert(key).second)
                throw ConfigError{"duplicate key \"" + key + "\""};
        }
        return true;
    };
    try {
        return ojson::parse(text, cb);
    } catch (const ojson::parse_error& e) {
        throw ConfigError{std::string("config parse error: ") + e.what()};
    }
}

ojson load_merged_json(const std::string& path, std::vector<std::string>& stack);

ojson resolve_includes(ojson doc, const std::string& base_dir, std::vector<std::string>& stack) {
    auto inc = doc.find("include");
    if (inc == doc.end()) return doc;
    std::vector<std::string> files;
    if (inc->is_string()) {
        files.push_back(inc->get<std::string>());
    } else if (inc->is_array()) {
        for (const auto& v : *inc) {
            if (!v.is_string()) fail("include", "expected a file name or list of file names");
            files.push_back(v.get<std::string>());
        }
    } else {
        fail("include", "expected a file name or list of file names");
    }
    doc.erase("include");
    ojson merged = ojson::object();
    for (const auto& f : files) {
        const std::string full =
            (!f.empty() && f.front() == '/') ? f : (base_dir.empty() ? f : base_dir + "/" + f);
        deep_merge(merged, load_merged_json(full, stack));
    }
    deep_merge(merged, doc);  // the including file wins
    return merged;
}

std::string dir_of(const std::string& path) {
    const auto slash = path.find_last_of('/');
    return slash == std::string::npos ? std::string() : path.substr(0, slash);
}

ojson load_merged_json(const std::string& path, std::vector<std::string>& stack) {
    for (const auto& seen : stack)
        if (seen == path) fail(path, "include cycle");
    if (stack.size() > 16) fail(path, "include nesting too deep");
    std::ifstream in(path);
    if (!in) fail(path, "cannot open config file");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    if (text.find_first_not_of(" \t\r\n") == std::string::npos) text = "{}";
    stack.push_back(path);
    ojson doc = resolve_includes(parse_with_duplicate_check(text), dir_of(path), stack);
    stack.pop_back();
    return doc;
}

ExperimentSpec spec_from_json(const ojson& doc) {
    if (!doc.is_object()) throw ConfigError{"config root must be an object"};
    ExperimentSpec spec;
    Section s{doc, ""};
    s.field("id", [&](const ojson& v, const std::string& fp) {
        spec.id = want_string(v, fp);
        static const std::set<std::string> known{"e1", "e2a", "e2b", "e2c", "e3", "custom"};
        if (!known.count(spec.id))
            fail(fp, "unknown experiment id \"" + spec.id + "\" (e1, e2a, e2b, e2c, e3, custom)");
    });
    s.field("output_dir",
            [&](const ojson& v, const std::string& fp) { spec.output_dir = want_string(v, fp); });
    s.field("seeds", [&](const ojson& v, const std::string& fp) {
        if (!v.is_array() || v.empty()) fail(fp, "expected a non-empty list of integers");
        spec.seeds.clear();
        for (const auto& e : v)
            spec.seeds.push_back(static_cast<std::uint64_t>(want_integer(e, fp)));
    });
    s.field("sweep", [&](const ojson& v, const std::string& fp) {
        if (!v.is_object()) fail(fp, "expected an object of axis name to value list");
        for (auto it = v.begin(); it != v.end(); ++it) {
            const std::string ap = fp + "." + it.key();
            if (!it.value().is_array() || it.value().empty())
                fail(ap, "expected a non-empty value list");
            std::vector<double> vals;
            for (const auto& e : it.value()) vals.push_back(want_number(e, ap));
            for (const auto& axis : spec.sweep)
                if (axis.first == it.key()) fail(ap, "duplicate sweep axis");
            spec.sweep.emplace_back(it.key(), vals);
        }
    });
    s.field("plant", [&](const ojson& v, const std::string& fp) {
        apply_plant(v, spec.base.plant, fp);
    });
    s.field("reference", [&](const ojson& v, const std::string& fp) {
        apply_reference(v, spec.base.reference, fp);
    });
    s.field("disturbance", [&](const ojson& v, const std::string& fp) {
        apply_disturbance(v, spec.base.disturbance, fp);
    });
    s.field("noise", [&](const ojson& v, const std::string& fp) {
        apply_noise(v, spec.base.noise, fp);
    });
    s.field("observer", [&](const ojson& v, const std::string& fp) {
        apply_observer(v, spec.base.observer, fp);
    });
    s.field("controller", [&](const ojson& v, const std::string& fp) {
        apply_controller(v, spec.base.controller, fp);
    });
    s.field("sim", [&](const ojson& v, const std::string& fp) {
        apply_sim(v, spec.base.sim, fp);
    });
    s.field("windows", [&](const ojson& v, const std::string& fp) {
        apply_windows(v, spec.base.windows, fp);
    });
    s.finish();
    return spec;
}

}  // namespace

void apply_axis(FullConfig& cfg, const std::string& name, double value) {
    if (name == "p") {
        if (value != std::floor(value) || value < 1)
            throw ConfigError{"sweep.p: values must be positive integers"};
        cfg.observer.p = static_cast<int>(value);
    } else if (name == "lambda") {
        cfg.observer.lambda = value;
    } else if (name == "alpha") {
        cfg.observer.alpha = value;
    } else if (name == "k") {
        cfg.controller.k = value;
    } else if (name == "lpf_tau") {
        cfg.sim.lpf_tau = value;
    } else if (name == "r_n") {
        cfg.noise.r_n = value;
    } else {
        throw ConfigError{"sweep." + name +
                          ": unknown axis (p, lambda, alpha, k, lpf_tau, r_n)"};
    }
}

ExperimentSpec parse_spec_text(const std::string& text, const std::string& base_dir) {
    std::vector<std::string> stack;
    std::string body = text;
    if (body.find_first_not_of(" \t\r\n") == std::string::npos) body = "{}";
    const ojson doc = resolve_includes(parse_with_duplicate_check(body), base_dir, stack);
    ExperimentSpec spec = spec_from_json(doc);
    validate_spec(spec);
    return spec;
}

ExperimentSpec load_spec(const std::string& path) {
    std::vector<std::string> stack;
    ExperimentSpec spec = spec_from_json(load_merged_json(path, stack));
    validate_spec(spec);
    return spec;
}

std::vector<std::string> validate_spec(const ExperimentSpec& spec) {
    std::vector<std::string> warnings;

    // Hard physical and schema invariants, on the base and on every sweep value
    // applied in isolation (axes are independent knobs).
    auto check_hard = [](const FullConfig& c) {
        if (!(c.plant.v_in > 0) || !(c.plant.L > 0) || !(c.plant.C > 0) || !(c.plant.R > 0))
            throw ConfigError{"plant: v_in, L, C, R must all be positive"};
        for (const auto& msg :
             {validate_reference(c.reference, c.sim.Ts), validate_disturbance(c.disturbance),
              validate_observer(c.observer), validate_controller(c.controller),
              validate_sim(c.sim, c.observer)})
            if (!msg.empty()) throw ConfigError{msg};
        if (c.noise.r_n < 0) throw ConfigError{"noise.r_n must be non-negative"};
        if (!(c.windows.ripple_t1 > c.windows.ripple_t0))
            throw ConfigError{"windows: ripple_t1 must exceed ripple_t0"};
        if (c.windows.ripple_t1 > c.sim.duration)
            throw ConfigError{"windows: ripple window must end within the run duration"};
    };
    check_hard(spec.base);
    for (const auto& axis : spec.sweep)
        for (double v : axis.second) {
            FullConfig c = spec.base;
            apply_axis(c, axis.first, v);
            check_hard(c);
        }

    // Soft checks.
    auto warn_lambda = [&warnings](double lambda, double Ts) {
        if (lambda * Ts > 0.5) {
            char buf[128];
            std::snprintf(buf, sizeof buf,
                          "observer discretization margin is thin: lambda*Ts = %.6g > 0.5",
                          lambda * Ts);
            warnings.emplace_back(buf);
        }
    };
    warn_lambda(spec.base.observer.lambda, spec.base.sim.Ts);
    for (const auto& axis : spec.sweep)
        if (axis.first == "lambda")
            for (double v : axis.second) warn_lambda(v, spec.base.sim.Ts);

    if (spec.base.observer.b_hat != spec.base.controller.b_hat)
        warnings.emplace_back(
            "observer.b_hat differs from controller.b_hat; frequency analysis uses the "
            "controller's value for both");

    // Disturbance discontinuities should land on substep boundaries so the RK4
    // stages never straddle a jump.
    const double h = spec.base.sim.Ts / spec.base.sim.substeps;
    for (std::size_t i = 0; i < spec.base.disturbance.segments.size(); ++i) {
        const auto& seg = spec.base.disturbance.segments[i];
        for (double edge : {seg.t_start, seg.t_end}) {
            const double r = std::fabs(edge / h - std::round(edge / h));
            if (r > 1e-6) {
                char buf[160];
                std::snprintf(buf, sizeof buf,
                              "disturbance segment %zu edge at t = %.6g does not land on the "
                              "integration substep grid",
                              i, edge);
                warnings.emplace_back(buf);
            }
        }
    }
    return warnings;
}

}  // namespace cesobuck
