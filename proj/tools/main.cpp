#include <cstdio>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cesobuck/harness.hpp"

namespace {

void print_warnings(const std::vector<std::string>& warnings) {
    for (const auto& w : warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Buck-converter ADRC with a cascade extended state observer: simulation, "
                 "frequency analysis, experiment presets"};
    app.require_subcommand(1);

    std::string spec_path, out_dir, experiment_id;
    std::uint64_t seed = 0;
    bool seed_set = false;
    int jobs = 1;
    std::vector<double> lpf_taus;

    CLI::App* sim = app.add_subcommand("simulate", "Run the spec's sweep and write run data");
    sim->add_option("--spec", spec_path, "config file")->required();
    sim->add_option("--out", out_dir, "output directory")->required();
    sim->add_option("--seed", seed, "replace the spec's seed list with this one seed")
        ->each([&seed_set](const std::string&) { seed_set = true; });
    sim->add_option("--jobs", jobs, "worker threads");

    CLI::App* bode = app.add_subcommand("bode", "Write frequency-response data files");
    bode->add_option("--spec", spec_path, "config file")->required();
    bode->add_option("--out", out_dir, "output directory")->required();
    bode->add_option("--lpf-taus", lpf_taus, "measurement filter time constants")
        ->delimiter(',');

    CLI::App* exp = app.add_subcommand("experiment", "Run a built-in experiment preset");
    exp->add_option("id", experiment_id, "one of e1, e2a, e2b, e2c, e3")->required();
    exp->add_option("--out", out_dir, "output directory")->required();
    exp->add_option("--jobs", jobs, "worker threads");

    CLI::App* val = app.add_subcommand("validate", "Check a config file and print warnings");
    val->add_option("--spec", spec_path, "config file")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            cesobuck::ExperimentSpec spec = cesobuck::load_spec(spec_path);
            print_warnings(cesobuck::validate_spec(spec));
            if (seed_set) spec.seeds = {seed};
            return cesobuck::run_experiment(spec, out_dir, jobs);
        }
        if (bode->parsed()) {
            const cesobuck::ExperimentSpec spec = cesobuck::load_spec(spec_path);
            print_warnings(cesobuck::validate_spec(spec));
            cesobuck::emit_bode(spec, out_dir, lpf_taus);
            return 0;
        }
        if (exp->parsed()) {
            const cesobuck::ExperimentSpec spec = cesobuck::preset(experiment_id);
            return cesobuck::run_experiment(spec, out_dir, jobs);
        }
        if (val->parsed()) {
            const cesobuck::ExperimentSpec spec = cesobuck::load_spec(spec_path);
            print_warnings(cesobuck::validate_spec(spec));
            std::printf("ok: %zu runs planned\n", cesobuck::plan_runs(spec).size());
            return 0;
        }
    } catch (const cesobuck::ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.message.c_str());
        return 2;
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
