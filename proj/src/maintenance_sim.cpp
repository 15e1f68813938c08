#include <algorithm>
#include <cmath>
#include <limits>
#include <span>

#include "cbm/errors.hpp"
#include "cbm/kernels.hpp"
#include "cbm/maintenance.hpp"
#include "cbm/parallel.hpp"

namespace cbm {
namespace {

// First time in (a, b] at which a gamma path with X(a) = xa < level <= X(b) = xb
// reaches `level`, located by bisection on gamma bridges: given the end
// values, X(m) - X(a) = (xb - xa) * Beta(alpha (m - a), alpha (b - m)).
double bridge_crossing(double a, double xa, double b, double xb, double level, double shape_rate, double tol,
                       Rng& rng) {
    while (b - a > tol) {
        const double m = 0.5 * (a + b);
        const double frac = rng.beta(shape_rate * (m - a), shape_rate * (b - m));
        const double xm = xa + (xb - xa) * frac;
        if (xm >= level) {
            b = m;
            xb = xm;
        } else {
            a = m;
            xa = xm;
        }
    }
    return b;
}

}  // namespace

void PolicyParams::validate(double failure_threshold) const {
    detail::require(inspection_period > 0.0 && std::isfinite(inspection_period), "PolicyParams",
                    "inspection_period must be > 0");
    detail::require(preventive_threshold > 0.0 && preventive_threshold <= failure_threshold, "PolicyParams",
                    "preventive_threshold must satisfy 0 < M <= L");
}

void CostRates::validate() const {
    detail::require(preventive >= 0.0 && corrective >= 0.0 && inspection >= 0.0 && downtime >= 0.0, "CostRates",
                    "costs must be >= 0");
}

void SimControl::validate() const {
    detail::require(substeps >= 1, "SimControl", "substeps must be >= 1");
    detail::require(max_inspections >= 1, "SimControl", "max_inspections must be >= 1");
}

double cycle_cost(const CycleOutcome& o, const CostRates& costs) {
    double c = costs.inspection * o.inspections + costs.downtime * o.downtime;
    if (o.action == CycleAction::preventive) c += costs.preventive;
    if (o.action == CycleAction::corrective) c += costs.corrective;
    return c;
}

CycleOutcome simulate_cycle(const SystemSpec& spec, const PolicyParams& policy, const CostRates& costs,
                            const SimControl& sim, std::uint64_t stream_seed) {
    const double L = spec.failure_threshold;
    const double M = policy.preventive_threshold;
    const double T = policy.inspection_period;
    const double alpha = spec.growth.shape_rate;
    const int n = sim.substeps;
    const double h = T / n;
    const double bridge_tol = 1e-10 * std::max(1.0, T);

    Rng arrival_rng(derive_seed(stream_seed, {0}));
    CoxArrivalSampler sampler(spec.arrivals);
    std::vector<double> levels, last_time, rates, increments, before, fresh;
    std::vector<Rng> streams;

    CycleOutcome out;
    double current_max = -std::numeric_limits<double>::infinity();
    for (int k = 0; k < sim.max_inspections; ++k) {
        const double start = k * T;
        for (int j = 1; j <= n; ++j) {
            const double t_end = (j == n) ? (k + 1) * T : start + j * h;
            fresh.clear();
            sampler.advance(t_end, arrival_rng, fresh);
            for (double s : fresh) {
                streams.emplace_back(derive_seed(stream_seed, {levels.size() + 1}));
                rates.push_back(realize_scale(spec.growth, streams.back()).rate);
                levels.push_back(0.0);
                last_time.push_back(s);
            }
            if (levels.empty()) continue;
            increments.resize(levels.size());
            for (std::size_t i = 0; i < levels.size(); ++i) {
                const double dt = t_end - last_time[i];
                increments[i] = dt > 0.0 ? streams[i].gamma(alpha * dt, rates[i]) : 0.0;
            }
            before.assign(levels.begin(), levels.end());
            current_max = kernels::add_and_max(levels, increments);
            if (out.first_m_crossing < 0.0 && current_max >= M) out.first_m_crossing = t_end;

            if (current_max >= L) {
                double crossing = t_end;
                if (sim.exact_crossing) {
                    crossing = std::numeric_limits<double>::infinity();
                    for (std::size_t i = 0; i < levels.size(); ++i) {
                        if (levels[i] < L) continue;
                        const double t = bridge_crossing(last_time[i], before[i], t_end, levels[i], L, alpha,
                                                         bridge_tol, streams[i]);
                        crossing = std::min(crossing, t);
                    }
                }
                out.first_l_crossing = crossing;
                out.inspections = k + 1;
                out.length = (k + 1) * T;
                out.action = CycleAction::corrective;
                out.downtime = std::clamp(out.length - crossing, 0.0, T);
                out.cycle_cost = cycle_cost(out, costs);
                return out;
            }
            std::fill(last_time.begin(), last_time.end(), t_end);
        }
        if (current_max >= M) {
            out.inspections = k + 1;
            out.length = (k + 1) * T;
            out.action = CycleAction::preventive;
            out.cycle_cost = cycle_cost(out, costs);
            return out;
        }
    }
    out.inspections = sim.max_inspections;
    out.length = sim.max_inspections * T;
    out.action = CycleAction::censored;
    out.cycle_cost = cycle_cost(out, costs);
    return out;
}

std::uint64_t cycle_seed(std::uint64_t master_seed, std::uint64_t cycle_index) {
    return derive_seed(master_seed, {cycle_index});
}

std::vector<CycleOutcome> simulate_cycles(const SystemSpec& spec, const PolicyParams& policy,
                                          const CostRates& costs, std::int64_t n_cycles, const SimControl& sim,
                                          std::uint64_t master_seed, unsigned threads) {
    spec.validate();
    policy.validate(spec.failure_threshold);
    costs.validate();
    sim.validate();
    detail::require(n_cycles >= 1, "estimate_cost_rate", "n_cycles must be >= 1");
    std::vector<CycleOutcome> outcomes(static_cast<std::size_t>(n_cycles));
    parallel_for(outcomes.size(), threads, [&](std::size_t i) {
        outcomes[i] = simulate_cycle(spec, policy, costs, sim, cycle_seed(master_seed, i));
    });
    return outcomes;
}

CostRateEstimate summarize_cycles(const std::vector<CycleOutcome>& outcomes) {
    CostRateEstimate est;
    est.n_cycles = static_cast<std::int64_t>(outcomes.size());
    std::vector<double> cost, length;
    std::int64_t preventive = 0, corrective = 0;
    for (const auto& o : outcomes) {
        if (o.action == CycleAction::censored) {
            ++est.n_censored;
            continue;
        }
        (o.action == CycleAction::preventive ? preventive : corrective) += 1;
        cost.push_back(o.cycle_cost);
        length.push_back(o.length);
    }
    if (est.n_cycles > 0) {
        const double n = static_cast<double>(est.n_cycles);
        est.preventive_fraction = static_cast<double>(preventive) / n;
        est.corrective_fraction = static_cast<double>(corrective) / n;
        est.censored_fraction = 1.0 - (est.preventive_fraction + est.corrective_fraction);
    }
    if (cost.empty()) detail::fail_numerical("estimate_cost_rate", "every cycle was censored");
    const double m = static_cast<double>(cost.size());
    const double total_cost = pairwise_sum(cost);
    const double total_length = pairwise_sum(length);
    est.point = total_cost / total_length;
    est.mean_cycle_length = total_length / m;
    if (cost.size() >= 2) {
        std::vector<double> sq(cost.size());
        for (std::size_t i = 0; i < cost.size(); ++i) {
            const double r = cost[i] - est.point * length[i];
            sq[i] = r * r;
        }
        const double var = pairwise_sum(sq) / (m - 1.0);
        est.std_error = std::sqrt(var / m) / est.mean_cycle_length;
    }
    return est;
}

CostRateEstimate estimate_cost_rate(const SystemSpec& spec, const PolicyParams& policy, const CostRates& costs,
                                    std::int64_t n_cycles, const SimControl& sim, std::uint64_t master_seed,
                                    unsigned threads) {
    return summarize_cycles(simulate_cycles(spec, policy, costs, n_cycles, sim, master_seed, threads));
}

}  // namespace cbm
