#include "cbm/app/commands.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <fstream>
#include <ostream>

#include "cbm/combined.hpp"
#include "cbm/errors.hpp"
#include "cbm/kernels.hpp"
#include "cbm/parallel.hpp"
#include "cbm/random.hpp"
#include "cbm/shock_arrivals.hpp"

#ifndef CBM_VERSION
#define CBM_VERSION "0.0.0"
#endif

namespace cbm::app {
namespace {

using nlohmann::json;

// Stream keys under the master seed, one per subcommand.
enum StreamKey : std::uint64_t { arrivals_key = 1, lifetime_key = 2, fit_key = 3, checks_key = 4 };

std::string num(double x) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", x);
    return buf;
}

std::ofstream open_out(const RunContext& ctx, const std::string& name) {
    std::ofstream out(ctx.out_dir / name);
    if (!out) detail::fail_validation("output", "cannot write " + (ctx.out_dir / name).string());
    return out;
}

void write_manifest(const RunContext& ctx, const std::string& command, const std::vector<std::string>& outputs,
                    json extra = json::object()) {
    json m;
    m["tool"] = "cbm";
    m["version"] = CBM_VERSION;
    m["command"] = command;
    m["seed"] = ctx.config.seed;
    m["config_source"] = ctx.config_source;
    m["config"] = to_json(ctx.config);
    m["outputs"] = outputs;
    m["results"] = std::move(extra);
    if (!ctx.deterministic) {
        m["threads"] = ctx.threads;
        m["kernel_backend"] = std::string(kernels::backend_name(kernels::active_backend()));
        const std::time_t now = std::time(nullptr);
        std::tm tm{};
        gmtime_r(&now, &tm);
        char buf[32];
        std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
        m["created"] = buf;
    }
    auto out = open_out(ctx, "run_manifest.json");
    out << m.dump(2) << '\n';
}

struct CountSummary {
    double mean = 0.0;
    double std_error = 0.0;
};

CountSummary summarize(const std::vector<double>& x) {
    const double n = static_cast<double>(x.size());
    const double mean = pairwise_sum(x) / n;
    std::vector<double> dev(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) dev[i] = (x[i] - mean) * (x[i] - mean);
    return {mean, std::sqrt(pairwise_sum(dev) / (n - 1.0) / n)};
}

// counts[j][r] = N*(check_times[j]) on run r.
std::vector<std::vector<double>> arrival_counts(const ExperimentConfig& cfg, unsigned threads,
                                                std::vector<ArrivalTrajectory>* keep) {
    const auto& a = cfg.arrivals;
    const std::size_t runs = static_cast<std::size_t>(a.runs);
    std::vector<std::vector<double>> counts(a.check_times.size(), std::vector<double>(runs));
    if (keep) keep->resize(static_cast<std::size_t>(std::min<std::int64_t>(a.trajectories, a.runs)));
    parallel_for(runs, threads, [&](std::size_t r) {
        Rng rng(derive_seed(cfg.seed, {arrivals_key, r}));
        const auto shocks = simulate_shocks(cfg.system.arrivals, a.horizon, rng);
        auto traj = simulate_arrivals(cfg.system.arrivals, shocks, a.horizon, rng);
        for (std::size_t j = 0; j < a.check_times.size(); ++j)
            counts[j][r] = static_cast<double>(traj.count_until(a.check_times[j]));
        if (keep && r < keep->size()) (*keep)[r] = std::move(traj);
    });
    return counts;
}

// Empirical survival of the first L-passage at `times`.
std::vector<double> empirical_lifetime(const ExperimentConfig& cfg, const std::vector<double>& times,
                                       std::int64_t runs, unsigned threads) {
    const double horizon = times.back();
    std::vector<double> fail(static_cast<std::size_t>(runs));
    parallel_for(fail.size(), threads, [&](std::size_t r) {
        Rng rng(derive_seed(cfg.seed, {lifetime_key, r}));
        const auto w = simulate_first_passage(cfg.system, cfg.system.failure_threshold, horizon, rng);
        fail[r] = w ? *w : INFINITY;
    });
    std::sort(fail.begin(), fail.end());
    std::vector<double> s;
    for (double t : times) {
        const auto alive = fail.end() - std::upper_bound(fail.begin(), fail.end(), t);
        s.push_back(static_cast<double>(alive) / static_cast<double>(runs));
    }
    return s;
}

std::vector<double> curve_times(const ReliabilityRun& r) { return linspace(0.0, r.horizon, r.points); }

void require_grids(const ExperimentConfig& cfg, const char* where) {
    detail::require(!cfg.t_grid.empty() && !cfg.m_grid.empty(), where, "grid.T and grid.M must be set");
}

}  // namespace

int cmd_simulate_arrivals(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.config;
    std::vector<ArrivalTrajectory> kept;
    const auto counts = arrival_counts(cfg, ctx.threads, &kept);

    auto traj = open_out(ctx, "arrivals.csv");
    traj << "run,time\n";
    for (std::size_t r = 0; r < kept.size(); ++r)
        for (double t : kept[r].arrival_times) traj << r << ',' << num(t) << '\n';

    auto check = open_out(ctx, "arrival_check.csv");
    check << "t,empirical_mean,std_error,analytic_mean,ratio,z\n";
    json results = json::array();
    for (std::size_t j = 0; j < counts.size(); ++j) {
        const double t = cfg.arrivals.check_times[j];
        const auto s = summarize(counts[j]);
        const double ref = expected_num_arrivals(cfg.system.arrivals, t);
        const double z = s.std_error > 0.0 ? (s.mean - ref) / s.std_error : 0.0;
        check << num(t) << ',' << num(s.mean) << ',' << num(s.std_error) << ',' << num(ref) << ','
              << num(ref > 0.0 ? s.mean / ref : 1.0) << ',' << num(z) << '\n';
        log << "t=" << num(t) << "  mean " << num(s.mean) << " +- " << num(s.std_error) << "  analytic "
            << num(ref) << '\n';
        results.push_back({{"t", t}, {"empirical", s.mean}, {"std_error", s.std_error}, {"analytic", ref}});
    }
    write_manifest(ctx, "simulate-arrivals", {"arrivals.csv", "arrival_check.csv"}, results);
    return 0;
}

int cmd_reliability(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.config;
    const auto times = curve_times(cfg.reliability);
    const auto curve = lifetime_curve(cfg.system, cfg.system.failure_threshold, times);
    std::vector<double> empirical;
    if (cfg.reliability.runs > 0) empirical = empirical_lifetime(cfg, times, cfg.reliability.runs, ctx.threads);
    const double limit = hazard_limit(cfg.system);

    auto out = open_out(ctx, "lifetime.csv");
    out << "t,survival,hazard,hazard_limit" << (empirical.empty() ? "" : ",empirical_survival") << '\n';
    double max_gap = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) {
        out << num(times[i]) << ',' << num(curve.survival[i]) << ',' << num(curve.hazard[i]) << ',' << num(limit);
        if (!empirical.empty()) {
            out << ',' << num(empirical[i]);
            max_gap = std::max(max_gap, std::fabs(empirical[i] - curve.survival[i]));
        }
        out << '\n';
    }
    log << "hazard limit " << num(limit) << ", hazard(" << num(times.back()) << ") " << num(curve.hazard.back())
        << '\n';
    json results = {{"hazard_limit", limit}, {"hazard_at_horizon", curve.hazard.back()}};
    if (!empirical.empty()) {
        log << "max |analytic - empirical| survival " << num(max_gap) << " over " << cfg.reliability.runs
            << " runs\n";
        results["max_gap"] = max_gap;
    }
    write_manifest(ctx, "reliability", {"lifetime.csv"}, results);
    return 0;
}

int cmd_fit(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.config;
    const auto& f = cfg.fit;
    DegradationObservations data;
    std::vector<std::string> outputs;
    if (!f.data.empty()) {
        data = read_observations_csv(f.data);
    } else {
        Rng rng(derive_seed(cfg.seed, {fit_key}));
        const auto model =
            GammaModel::uniform_inverse(f.shape_rate, f.center - f.true_half_width, f.center + f.true_half_width);
        data = simulate_observations(model, f.processes, f.horizon, f.dt, rng);
        auto obs = open_out(ctx, "observations.csv");
        write_observations_csv(obs, data);
        outputs.push_back("observations.csv");
    }
    data.validate();
    const auto fit = fit_half_width(f.shape_rate, f.center, data, f.grid);

    auto curve = open_out(ctx, "fit_curve.csv");
    curve << "half_width,neg_log_likelihood\n";
    for (std::size_t i = 0; i < fit.grid.size(); ++i) curve << num(fit.grid[i]) << ',' << num(fit.curve[i]) << '\n';
    outputs.push_back("fit_curve.csv");

    log << "half-width " << num(fit.half_width) << "  -log L " << num(fit.neg_log_likelihood)
        << (fit.interior_minimum ? "  (interior minimum)" : "  (minimum on the grid edge)") << '\n';
    write_manifest(ctx, "fit", outputs,
                   {{"half_width", fit.half_width},
                    {"neg_log_likelihood", fit.neg_log_likelihood},
                    {"interior_minimum", fit.interior_minimum},
                    {"processes", data.processes.size()}});
    return 0;
}

int cmd_optimize(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.config;
    require_grids(cfg, "optimize");
    const auto best =
        grid_search(cfg.system, cfg.costs, cfg.t_grid, cfg.m_grid, cfg.n_cycles, cfg.sim, cfg.seed, ctx.threads);
    auto out = open_out(ctx, "surface.csv");
    write_surface_csv(out, best);

    // Data-only plot script for the surface.
    auto gp = open_out(ctx, "surface.gp");
    gp << "set datafile separator ','\nset xlabel 'T'\nset ylabel 'M'\nset zlabel 'cost rate'\n"
          "splot 'surface.csv' using 1:2:3 every ::1 with points pt 7 notitle\n";

    double se = 0.0;
    for (const auto& c : best.surface)
        if (c.inspection_period == best.t_opt && c.preventive_threshold == best.m_opt) se = c.estimate.std_error;
    log << "optimum T=" << num(best.t_opt) << " M=" << num(best.m_opt) << " cost rate " << num(best.cost)
        << " (se " << num(se) << ")\n";
    write_manifest(ctx, "optimize", {"surface.csv", "surface.gp"},
                   {{"T_opt", best.t_opt}, {"M_opt", best.m_opt}, {"cost", best.cost}, {"std_error", se}});
    return 0;
}

int cmd_sensitivity(const RunContext& ctx, std::ostream& log) {
    const auto& cfg = ctx.config;
    if (cfg.sensitivity.kind != SweepKind::corrective_and_preventive) require_grids(cfg, "sensitivity");
    const auto rows = sensitivity_sweep(cfg.system, cfg.costs, cfg.sensitivity, cfg.sim, cfg.seed, ctx.threads);
    auto out = open_out(ctx, "sensitivity.csv");
    write_sensitivity_csv(out, rows);
    log << rows.size() << " cells written to sensitivity.csv\n";
    write_manifest(ctx, "sensitivity", {"sensitivity.csv"});
    return 0;
}

std::vector<CheckResult> run_checks(const ExperimentConfig& cfg, unsigned threads) {
    std::vector<CheckResult> checks;
    const double sigma = cfg.validate_run.sigma;
    auto within_se = [&](std::string name, double value, double reference, double se) {
        const double tol = sigma * se;
        checks.push_back({std::move(name), value, reference, tol, std::fabs(value - reference) <= tol});
    };

    // Arrival counts against the closed-form mean.
    const auto counts = arrival_counts(cfg, threads, nullptr);
    for (std::size_t j = 0; j < counts.size(); ++j) {
        const auto s = summarize(counts[j]);
        within_se("arrivals.mean_count[t=" + num(cfg.arrivals.check_times[j]) + "]", s.mean,
                  expected_num_arrivals(cfg.system.arrivals, cfg.arrivals.check_times[j]), s.std_error);
    }

    // Lifetime law, IFR and the hazard limit.
    const auto times = curve_times(cfg.reliability);
    const auto curve = lifetime_curve(cfg.system, cfg.system.failure_threshold, times);
    const auto empirical = empirical_lifetime(cfg, times, cfg.validate_run.lifetime_runs, threads);
    double gap = 0.0;
    for (std::size_t i = 0; i < times.size(); ++i) gap = std::max(gap, std::fabs(empirical[i] - curve.survival[i]));
    checks.push_back({"lifetime.max_survival_gap", gap, 0.0, 0.02, gap <= 0.02});
    double min_slope = INFINITY;
    for (double t : linspace(cfg.reliability.horizon / 300.0, cfg.reliability.horizon, 300))
        min_slope = std::min(min_slope, hazard_derivative(cfg.system, cfg.system.failure_threshold, t));
    checks.push_back({"lifetime.hazard_nondecreasing", min_slope, 0.0, 1e-10, min_slope >= -1e-10});
    const double limit = hazard_limit(cfg.system);
    const double far = first_passage_hazard(cfg.system, cfg.system.failure_threshold, 80.0);
    checks.push_back({"lifetime.hazard_limit", far, limit, 1e-3, std::fabs(far - limit) <= 1e-3});

    // Kernel backends agree.
    if (kernels::backend_available(kernels::Backend::avx2)) {
        Rng rng(derive_seed(cfg.seed, {checks_key, 0}));
        std::vector<double> shocks(1000);
        for (auto& s : shocks) s = 50.0 * rng.uniform();
        std::sort(shocks.begin(), shocks.end());
        kernels::force_backend(kernels::Backend::scalar);
        const double a = kernels::decayed_sum(shocks, 50.0, cfg.system.arrivals.delta);
        kernels::force_backend(kernels::Backend::avx2);
        const double b = kernels::decayed_sum(shocks, 50.0, cfg.system.arrivals.delta);
        kernels::reset_backend();
        const double rel = std::fabs(a - b) / std::max(1e-300, std::fabs(a));
        checks.push_back({"kernels.avx2_matches_scalar", rel, 0.0, 1e-12, rel <= 1e-12});
    }

    // Cycle analytics against simulation at the configured policy.
    if (cfg.policy) {
        const auto q = analytic_cycle_quantities(cfg.system, *cfg.policy, cfg.analytic);
        checks.push_back({"analytic.truncation_deficit", q.truncation_deficit, 0.0, 10.0 * cfg.analytic.tol,
                          q.truncation_deficit <= 10.0 * cfg.analytic.tol});
        const auto out = simulate_cycles(cfg.system, *cfg.policy, cfg.costs, cfg.validate_run.cycles, cfg.sim,
                                         derive_seed(cfg.seed, {checks_key, 1}), threads);
        const std::size_t n = out.size();
        std::vector<double> len(n), insp(n), pp(n), pc(n), dt(n);
        bool accounting = true;
        for (std::size_t i = 0; i < n; ++i) {
            len[i] = out[i].length;
            insp[i] = out[i].inspections;
            pp[i] = out[i].action == CycleAction::preventive;
            pc[i] = out[i].action == CycleAction::corrective;
            dt[i] = out[i].downtime;
            accounting = accounting && cycle_cost(out[i], cfg.costs) == out[i].cycle_cost;
        }
        double spp = 0.0, spc = 0.0, sed = 0.0;
        for (std::size_t k = 0; k < q.preventive.size(); ++k) {
            spp += q.preventive[k];
            spc += q.corrective[k];
            sed += q.downtime[k];
        }
        auto mc = [&](const std::vector<double>& x) { return summarize(x); };
        const auto l = mc(len), ni = mc(insp), p = mc(pp), c = mc(pc), d = mc(dt);
        within_se("cycles.expected_length", q.expected_length, l.mean, l.std_error);
        within_se("cycles.expected_inspections", q.expected_inspections, ni.mean, ni.std_error);
        within_se("cycles.preventive_probability", spp, p.mean, p.std_error);
        within_se("cycles.corrective_probability", spc, c.mean, c.std_error);
        within_se("cycles.expected_downtime", sed, d.mean, d.std_error);
        const auto est = summarize_cycles(out);
        const double part = est.preventive_fraction + est.corrective_fraction + est.censored_fraction;
        checks.push_back({"cycles.event_partition", part, 1.0, 1e-12, std::fabs(part - 1.0) <= 1e-12});
        checks.push_back({"cycles.cost_accounting", accounting ? 1.0 : 0.0, 1.0, 0.0, accounting});
    }
    return checks;
}

int cmd_validate(const RunContext& ctx, std::ostream& log) {
    const auto checks = run_checks(ctx.config, ctx.threads);
    auto out = open_out(ctx, "validate_report.csv");
    out << "check,value,reference,tolerance,status\n";
    bool all = true;
    json results = json::array();
    for (const auto& c : checks) {
        out << c.name << ',' << num(c.value) << ',' << num(c.reference) << ',' << num(c.tolerance) << ','
            << (c.pass ? "pass" : "FAIL") << '\n';
        log << (c.pass ? "pass  " : "FAIL  ") << c.name << "  value " << num(c.value) << "  ref "
            << num(c.reference) << "  tol " << num(c.tolerance) << '\n';
        all = all && c.pass;
        results.push_back({{"check", c.name}, {"pass", c.pass}});
    }
    write_manifest(ctx, "validate", {"validate_report.csv"}, results);
    return all ? 0 : 1;
}

}  // namespace cbm::app
