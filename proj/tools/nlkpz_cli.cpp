#include <CLI11.hpp>
#include <iostream>
#include <omp.h>

#include "nlkpz/config.hpp"
#include "nlkpz/error.hpp"
#include "nlkpz/experiments.hpp"

namespace {

int run_one(const nlkpz::ExperimentConfig& cfg, const std::string& out_dir) {
    const auto outcome = nlkpz::run_experiment(cfg);
    if (!out_dir.empty()) nlkpz::write_outputs(outcome, cfg, out_dir);
    std::cout << outcome.verdict_line() << '\n';
    for (const auto& n : outcome.notes) std::cout << "NOTE " << n << '\n';
    return outcome.pass ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Numerical lab for nonlocal convolution evolution equations"};
    app.require_subcommand(1);
    int threads = 0;
    app.add_option("--threads", threads, "OpenMP threads for the operator loop (0 keeps the default)");

    auto* run = app.add_subcommand("run", "Run one experiment and write its CSVs and verdict");
    std::string id, config_path, out_dir;
    run->add_option("experiment", id, "Experiment id (see 'list')")->required();
    run->add_option("--config", config_path, "JSON file overriding the experiment defaults");
    run->add_option("--out", out_dir, "Output directory")->required();

    auto* check = app.add_subcommand("check", "Run the property suite");
    std::string check_out;
    check->add_option("--config", config_path, "JSON file overriding the property suite defaults");
    check->add_option("--out", check_out, "Optional output directory");

    auto* list = app.add_subcommand("list", "List experiment ids");

    auto* defaults = app.add_subcommand("defaults", "Print the built-in configuration of an experiment as JSON");
    std::string defaults_id;
    defaults->add_option("experiment", defaults_id, "Experiment id")->required();

    CLI11_PARSE(app, argc, argv);
    if (threads > 0) omp_set_num_threads(threads);

    try {
        if (list->parsed()) {
            for (const auto& e : nlkpz::experiment_ids()) std::cout << e << '\n';
            return 0;
        }
        if (defaults->parsed()) {
            std::cout << nlkpz::to_json(nlkpz::default_config(defaults_id));
            return 0;
        }
        if (check->parsed()) {
            auto cfg = config_path.empty() ? nlkpz::default_config("property_suite") : nlkpz::load_config(config_path);
            if (cfg.id != "property_suite") throw nlkpz::ConfigError("check takes a property_suite config");
            return run_one(cfg, check_out);
        }
        auto cfg = config_path.empty() ? nlkpz::default_config(id) : nlkpz::load_config(config_path);
        if (cfg.id != id) throw nlkpz::ConfigError("config is for experiment '" + cfg.id + "', not '" + id + "'");
        return run_one(cfg, out_dir);
    } catch (const nlkpz::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
}
