#pragma once
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "cbm/app/config.hpp"

namespace cbm::app {

struct RunContext {
    ExperimentConfig config;
    std::filesystem::path out_dir;
    unsigned threads = 1;
    bool deterministic = false;
    std::string config_source;  // path or preset name, for the manifest
};

// Each command writes its outputs plus run_manifest.json into out_dir and
// returns the process exit code.
int cmd_simulate_arrivals(const RunContext& ctx, std::ostream& log);
int cmd_reliability(const RunContext& ctx, std::ostream& log);
int cmd_fit(const RunContext& ctx, std::ostream& log);
int cmd_optimize(const RunContext& ctx, std::ostream& log);
int cmd_sensitivity(const RunContext& ctx, std::ostream& log);
int cmd_validate(const RunContext& ctx, std::ostream& log);

struct CheckResult {
    std::string name;
    double value = 0.0;
    double reference = 0.0;
    double tolerance = 0.0;
    bool pass = false;
};

//! The invariant suite behind `validate`.
std::vector<CheckResult> run_checks(const ExperimentConfig& cfg, unsigned threads);

}  // namespace cbm::app
