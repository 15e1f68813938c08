#pragma once
// Periodic-inspection policy: inspect every T, replace preventively when a
// process is found at or above M, correctively when one is at or above L.
// Cycle simulation is the cost engine; the analytic cycle quantities are an
// independent cross-check.

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cbm/combined.hpp"

namespace cbm {

struct PolicyParams {
    double inspection_period = 1.0;     // T
    double preventive_threshold = 1.0;  // M
    //! 0 < M <= L. M = L disables preventive replacement.
    void validate(double failure_threshold) const;
};

struct CostRates {
    double preventive = 0.0;  // C_p
    double corrective = 0.0;  // C_c
    double inspection = 0.0;  // C_I
    double downtime = 0.0;    // C_d, per time unit
    void validate() const;
};

struct SimControl {
    int substeps = 16;          // path increments per inspection interval
    int max_inspections = 200;  // censoring cap per cycle
    //! Locate L-crossings exactly by gamma-bridge bisection inside the
    //! substep; when false the crossing is the first substep end at or
    //! above L.
    bool exact_crossing = true;
    void validate() const;
};

enum class CycleAction { preventive, corrective, censored };

struct CycleOutcome {
    double length = 0.0;
    int inspections = 0;
    CycleAction action = CycleAction::censored;
    double downtime = 0.0;
    double cycle_cost = 0.0;
    //! Time the first process reached M and L (if before the end of the
    //! cycle); negative when not reached.
    double first_m_crossing = -1.0;
    double first_l_crossing = -1.0;
};

double cycle_cost(const CycleOutcome& outcome, const CostRates& costs);

//! One renewal cycle; the stream seed fixes every random draw.
CycleOutcome simulate_cycle(const SystemSpec& spec, const PolicyParams& policy, const CostRates& costs,
                            const SimControl& sim, std::uint64_t stream_seed);

struct CostRateEstimate {
    double point = 0.0;      // sum(cost) / sum(length) over completed cycles
    double std_error = 0.0;  // delta method
    std::int64_t n_cycles = 0;
    std::int64_t n_censored = 0;
    double preventive_fraction = 0.0;
    double corrective_fraction = 0.0;
    double censored_fraction = 0.0;
    double mean_cycle_length = 0.0;
};

//! Seed of cycle i under a master seed. Identical across grid cells, which
//! gives common random numbers between cells.
std::uint64_t cycle_seed(std::uint64_t master_seed, std::uint64_t cycle_index);

std::vector<CycleOutcome> simulate_cycles(const SystemSpec& spec, const PolicyParams& policy,
                                          const CostRates& costs, std::int64_t n_cycles, const SimControl& sim,
                                          std::uint64_t master_seed, unsigned threads);
CostRateEstimate summarize_cycles(const std::vector<CycleOutcome>& outcomes);
CostRateEstimate estimate_cost_rate(const SystemSpec& spec, const PolicyParams& policy, const CostRates& costs,
                                    std::int64_t n_cycles, const SimControl& sim, std::uint64_t master_seed,
                                    unsigned threads = 1);

// -- analytic cross-check ----------------------------------------------------

enum class PreventiveForm {
    //! Laplace functional of the shot noise applied to the joint law of
    //! (X(kT), X(tau)) per process: exact for the model.
    exact,
    //! Product of the first-passage density and the no-failure probability
    //! g(u, tau), treating them as independent.
    factorized
};

struct AnalyticOptions {
    int k_max = 60;
    double tol = 1e-6;  // stop once the first-passage survival at kT is below
    PreventiveForm form = PreventiveForm::exact;
    int scale_nodes = 8;          // quadrature nodes over 1/beta (random effects)
    double curve_step = 0.01;     // RK4 step of the first-passage curves
    int rule_order = 10;          // Gauss-Legendre order per panel
    double panel_width = 1.0;     // target panel length for the inner integrals
    int downtime_nodes = 2;       // panels of the outer downtime integral
};

struct AnalyticCycleQuantities {
    double expected_length = 0.0;       // E[R]
    double expected_inspections = 0.0;  // E[N_I]
    //! Index k holds the replacement at (k+1)T.
    std::vector<double> preventive;
    std::vector<double> corrective;
    std::vector<double> downtime;  // E_d over (kT, (k+1)T]
    std::vector<double> survival;  // first-passage survival of M at kT
    double truncation_deficit = 0.0;
    bool truncated_early = false;
};

AnalyticCycleQuantities analytic_cycle_quantities(const SystemSpec& spec, const PolicyParams& policy,
                                                  const AnalyticOptions& options = {});
double cost_rate_analytic(const CostRates& costs, const AnalyticCycleQuantities& q);
double cost_rate_analytic(const SystemSpec& spec, const PolicyParams& policy, const CostRates& costs,
                          const AnalyticOptions& options = {});

// -- optimization -------------------------------------------------------------

struct SurfaceCell {
    double inspection_period = 0.0;
    double preventive_threshold = 0.0;
    CostRateEstimate estimate;
};

struct GridSearchResult {
    double t_opt = 0.0;
    double m_opt = 0.0;
    double cost = 0.0;
    std::vector<SurfaceCell> surface;  // T-major order
};

//! Uniform grid of n points on [lo, hi].
std::vector<double> linspace(double lo, double hi, int n);
//! n interior points of the open interval (lo, hi): lo + k (hi - lo)/(n + 1).
std::vector<double> open_linspace(double lo, double hi, int n);

GridSearchResult grid_search(const SystemSpec& spec, const CostRates& costs, const std::vector<double>& t_grid,
                             const std::vector<double>& m_grid, std::int64_t n_cycles, const SimControl& sim,
                             std::uint64_t master_seed, unsigned threads = 1);
void write_surface_csv(std::ostream& out, const GridSearchResult& result);

enum class SweepKind {
    shape_and_rate,          // axis1 = alpha, axis2 = beta
    shape_and_scale_center,  // axis1 = alpha, axis2 = centre of 1/beta, half-width kept
    corrective_and_preventive  // axis1 = C_c, axis2 = C_p at a fixed policy
};

struct SensitivityRow {
    double axis1 = 0.0;
    double axis2 = 0.0;
    double cost_opt = 0.0;
    double t_opt = 0.0;
    double m_opt = 0.0;
};

struct SensitivityRequest {
    SweepKind kind = SweepKind::shape_and_rate;
    std::vector<double> axis1;
    std::vector<double> axis2;
    std::vector<double> t_grid;
    std::vector<double> m_grid;
    std::optional<PolicyParams> fixed_policy;  // required for cost sweeps
    std::int64_t n_cycles = 1000;
};

std::vector<SensitivityRow> sensitivity_sweep(const SystemSpec& base, const CostRates& costs,
                                              const SensitivityRequest& request, const SimControl& sim,
                                              std::uint64_t master_seed, unsigned threads = 1);
void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityRow>& rows);

}  // namespace cbm
