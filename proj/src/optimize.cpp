#include <cmath>
#include <cstdio>
#include <ostream>

#include "cbm/errors.hpp"
#include "cbm/maintenance.hpp"

namespace cbm {

std::vector<double> linspace(double lo, double hi, int n) {
    detail::require(n >= 1, "linspace", "n must be >= 1");
    if (n == 1) return {lo};
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * i / (n - 1);
    out.back() = hi;
    return out;
}

std::vector<double> open_linspace(double lo, double hi, int n) {
    detail::require(n >= 1, "open_linspace", "n must be >= 1");
    std::vector<double> out(n);
    for (int i = 0; i < n; ++i) out[i] = lo + (hi - lo) * (i + 1) / (n + 1);
    return out;
}

GridSearchResult grid_search(const SystemSpec& spec, const CostRates& costs, const std::vector<double>& t_grid,
                             const std::vector<double>& m_grid, std::int64_t n_cycles, const SimControl& sim,
                             std::uint64_t master_seed, unsigned threads) {
    detail::require(!t_grid.empty() && !m_grid.empty(), "grid_search", "grids must be non-empty");
    for (double m : m_grid)
        detail::require(m > 0.0 && m <= spec.failure_threshold, "grid_search", "every M must satisfy 0 < M <= L");
    GridSearchResult result;
    bool have_best = false;
    for (double t : t_grid) {
        for (double m : m_grid) {
            const PolicyParams policy{t, m};
            SurfaceCell cell{t, m, estimate_cost_rate(spec, policy, costs, n_cycles, sim, master_seed, threads)};
            const double c = cell.estimate.point;
            const bool better = !have_best || c < result.cost ||
                                (c == result.cost && (t < result.t_opt || (t == result.t_opt && m < result.m_opt)));
            if (better) {
                result.t_opt = t;
                result.m_opt = m;
                result.cost = c;
                have_best = true;
            }
            result.surface.push_back(cell);
        }
    }
    return result;
}

void write_surface_csv(std::ostream& out, const GridSearchResult& result) {
    out << "T,M,cost_rate,std_error,preventive_fraction,corrective_fraction,censored_fraction,mean_cycle_length\n";
    char buf[256];
    for (const auto& c : result.surface) {
        const auto& e = c.estimate;
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n", c.inspection_period,
                      c.preventive_threshold, e.point, e.std_error, e.preventive_fraction, e.corrective_fraction,
                      e.censored_fraction, e.mean_cycle_length);
        out << buf;
    }
}

std::vector<SensitivityRow> sensitivity_sweep(const SystemSpec& base, const CostRates& costs,
                                              const SensitivityRequest& request, const SimControl& sim,
                                              std::uint64_t master_seed, unsigned threads) {
    const char* where = "sensitivity_sweep";
    detail::require(!request.axis1.empty() && !request.axis2.empty(), where, "axes must be non-empty");
    const bool cost_sweep = request.kind == SweepKind::corrective_and_preventive;
    if (cost_sweep) detail::require(request.fixed_policy.has_value(), where, "cost sweeps need a fixed policy");
    if (!request.fixed_policy)
        detail::require(!request.t_grid.empty() && !request.m_grid.empty(), where, "policy grids required");
    if (request.kind == SweepKind::shape_and_scale_center)
        detail::require(base.growth.has_random_effect(), where, "scale-centre sweep needs a random-effects model");

    std::vector<SensitivityRow> rows;
    for (double a1 : request.axis1) {
        for (double a2 : request.axis2) {
            SystemSpec spec = base;
            CostRates c = costs;
            switch (request.kind) {
                case SweepKind::shape_and_rate:
                    spec.growth = GammaModel::deterministic(a1, a2);
                    break;
                case SweepKind::shape_and_scale_center: {
                    const auto& u = std::get<UniformInverseScale>(base.growth.scale);
                    const double half = 0.5 * (u.upper - u.lower);
                    spec.growth = GammaModel::uniform_inverse(a1, a2 - half, a2 + half);
                    break;
                }
                case SweepKind::corrective_and_preventive:
                    c.corrective = a1;
                    c.preventive = a2;
                    break;
            }
            SensitivityRow row{a1, a2, 0.0, 0.0, 0.0};
            if (request.fixed_policy) {
                const auto est =
                    estimate_cost_rate(spec, *request.fixed_policy, c, request.n_cycles, sim, master_seed, threads);
                row.cost_opt = est.point;
                row.t_opt = request.fixed_policy->inspection_period;
                row.m_opt = request.fixed_policy->preventive_threshold;
            } else {
                const auto best = grid_search(spec, c, request.t_grid, request.m_grid, request.n_cycles, sim,
                                              master_seed, threads);
                row.cost_opt = best.cost;
                row.t_opt = best.t_opt;
                row.m_opt = best.m_opt;
            }
            rows.push_back(row);
        }
    }
    return rows;
}

void write_sensitivity_csv(std::ostream& out, const std::vector<SensitivityRow>& rows) {
    out << "axis1,axis2,cost_opt,T_opt,M_opt\n";
    char buf[192];
    for (const auto& r : rows) {
        std::snprintf(buf, sizeof buf, "%.10g,%.10g,%.12g,%.10g,%.10g\n", r.axis1, r.axis2, r.cost_opt, r.t_opt,
                      r.m_opt);
        out << buf;
    }
}

}  // namespace cbm
