// cbm: experiment runner for the shot-noise degradation / CBM model.
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "cbm/app/commands.hpp"
#include "cbm/errors.hpp"

namespace {

enum Exit { ok = 0, validation_failure = 1, numerical_failure = 2 };

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Condition-based maintenance under shot-noise degradation initiation"};
    app.require_subcommand(1);

    std::string config_path;
    std::string preset;
    std::uint64_t seed = 0;
    unsigned threads = 1;
    std::string out_dir = "out";
    bool deterministic = false;

    auto* cfg_opt = app.add_option("--config", config_path, "JSON config file")->check(CLI::ExistingFile);
    app.add_option("--preset", preset, "Start from a bundled preset (baseline_deterministic, baseline_random_effects)")
        ->excludes(cfg_opt);
    auto* seed_opt = app.add_option("--seed", seed, "Master seed (overrides the config)");
    app.add_option("--threads", threads, "Worker threads (0 = all cores)");
    app.add_option("--out", out_dir, "Output directory");
    app.add_flag("--deterministic", deterministic, "Omit timestamps and host details from the manifest");

    struct Sub {
        const char* name;
        const char* help;
        int (*run)(const cbm::app::RunContext&, std::ostream&);
    };
    const Sub subs[] = {
        {"simulate-arrivals", "Simulate arrival trajectories and check E[N*(t)]", cbm::app::cmd_simulate_arrivals},
        {"reliability", "System lifetime curve with a Monte Carlo overlay", cbm::app::cmd_reliability},
        {"fit", "Maximum likelihood for the random-effect half-width", cbm::app::cmd_fit},
        {"optimize", "Grid search over (T, M)", cbm::app::cmd_optimize},
        {"sensitivity", "Sensitivity table of the optimum", cbm::app::cmd_sensitivity},
        {"validate", "Analytic versus Monte Carlo invariant suite", cbm::app::cmd_validate},
    };
    for (const auto& s : subs) app.add_subcommand(s.name, s.help)->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? ok : validation_failure;
    }

    try {
        cbm::app::RunContext ctx;
        if (!config_path.empty()) {
            ctx.config = cbm::app::load_config(config_path);
            ctx.config_source = config_path;
        } else {
            const std::string name = preset.empty() ? "baseline_deterministic" : preset;
            ctx.config = cbm::app::parse_config(cbm::app::preset_json(name));
            ctx.config_source = "preset:" + name;
        }
        if (seed_opt->count() > 0) ctx.config.seed = seed;
        ctx.threads = threads;
        ctx.deterministic = deterministic;
        ctx.out_dir = out_dir;
        std::filesystem::create_directories(ctx.out_dir);

        for (const auto& s : subs)
            if (app.got_subcommand(s.name)) return s.run(ctx, std::cout);
    } catch (const cbm::ValidationError& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return validation_failure;
    } catch (const nlohmann::json::exception& e) {
        std::cerr << "validation error: config: " << e.what() << '\n';
        return validation_failure;
    } catch (const cbm::NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << '\n';
        return numerical_failure;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "validation error: " << e.what() << '\n';
        return validation_failure;
    }
    return validation_failure;
}
