#pragma once
// Experiment configuration: JSON with nested sections. Unknown keys are
// rejected with their dotted path.
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cbm/maintenance.hpp"

namespace cbm::app {

struct ArrivalRun {
    double horizon = 10.0;
    std::int64_t runs = 100000;
    std::vector<double> check_times{1.0, 2.0, 5.0, 10.0};
    int trajectories = 20;  // written to arrivals.csv
};

struct ReliabilityRun {
    double horizon = 20.0;
    int points = 201;
    std::int64_t runs = 100000;
};

struct FitRun {
    std::string data;  // CSV path; empty = simulate
    double shape_rate = 1.5;
    double center = 1.0;  // centre of the uniform law of 1/beta
    int processes = 26;
    double horizon = 30.0;
    double dt = 1.0;
    double true_half_width = 0.3;  // only when simulating
    std::vector<double> grid;      // half-width grid
};

struct ValidateRun {
    std::int64_t cycles = 100000;
    double sigma = 3.0;       // allowed |analytic - MC| in standard errors
    std::int64_t lifetime_runs = 20000;
};

struct ExperimentConfig {
    std::string preset;
    SystemSpec system{{1.0, 2.0, 0.5}, GammaModel::deterministic(1.1, 1.4), 10.0};
    CostRates costs{100.0, 200.0, 50.0, 60.0};
    std::optional<PolicyParams> policy;
    std::vector<double> t_grid;
    std::vector<double> m_grid;
    SimControl sim;
    std::int64_t n_cycles = 6000;
    std::uint64_t seed = 20240601;
    AnalyticOptions analytic;
    ArrivalRun arrivals;
    ReliabilityRun reliability;
    FitRun fit;
    SensitivityRequest sensitivity;
    ValidateRun validate_run;

    void validate() const;
};

std::vector<std::string> preset_names();
nlohmann::json preset_json(const std::string& name);

//! A config document may name a preset; its own keys are merged over it.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::string& path);
nlohmann::json to_json(const ExperimentConfig& cfg);

}  // namespace cbm::app
