#include <doctest.h>

#include <cmath>
#include <numeric>
#include <sstream>

#include "cbm/combined.hpp"
#include "cbm/errors.hpp"
#include "cbm/maintenance.hpp"

using namespace cbm;
using doctest::Approx;

namespace {

SystemSpec baseline_system() {
    SystemSpec s;
    s.arrivals = {1.0, 2.0, 0.5};
    s.growth = GammaModel::deterministic(1.1, 1.4);
    s.failure_threshold = 10.0;
    return s;
}

const PolicyParams kBasePolicy{1.0 + 2.0 * 24.0 / 9.0, 1.0 + 4.0 * 9.0 / 7.0};
const CostRates kCosts{100.0, 200.0, 50.0, 60.0};

struct SampleMoments {
    double mean = 0.0, se = 0.0;
};

template <class F>
SampleMoments moments(const std::vector<CycleOutcome>& outs, F&& f) {
    double s = 0.0, s2 = 0.0;
    for (const auto& o : outs) {
        const double v = f(o);
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(outs.size());
    const double m = s / n;
    return {m, std::sqrt(std::max(0.0, s2 / n - m * m) / n)};
}

void check_against_simulation(const SystemSpec& spec, const PolicyParams& policy, std::uint64_t seed) {
    const auto q = analytic_cycle_quantities(spec, policy);
    CHECK(q.truncation_deficit < 1e-5);
    const auto outs = simulate_cycles(spec, policy, kCosts, 40000, SimControl{}, seed, 1);
    const auto len = moments(outs, [](const CycleOutcome& o) { return o.length; });
    const auto prev = moments(outs, [](const CycleOutcome& o) { return o.action == CycleAction::preventive ? 1.0 : 0.0; });
    const auto down = moments(outs, [](const CycleOutcome& o) { return o.downtime; });
    const double pp = std::accumulate(q.preventive.begin(), q.preventive.end(), 0.0);
    const double ed = std::accumulate(q.downtime.begin(), q.downtime.end(), 0.0);
    CHECK(std::fabs(len.mean - q.expected_length) < 3.5 * len.se);
    CHECK(std::fabs(prev.mean - pp) < 3.5 * prev.se);
    CHECK(std::fabs(down.mean - ed) < 3.5 * down.se);
    // First interval separately.
    const auto first_prev = moments(outs, [&](const CycleOutcome& o) {
        return o.action == CycleAction::preventive && o.inspections == 1 ? 1.0 : 0.0;
    });
    CHECK(std::fabs(first_prev.mean - q.preventive[0]) < 3.5 * first_prev.se);
}

}  // namespace

TEST_SUITE("maintenance") {
    TEST_CASE("cycle accounting") {
        const auto spec = baseline_system();
        const auto outs = simulate_cycles(spec, kBasePolicy, kCosts, 2000, SimControl{}, 31, 1);
        for (const auto& o : outs) {
            REQUIRE(o.action != CycleAction::censored);
            CHECK(o.length == Approx(o.inspections * kBasePolicy.inspection_period));
            CHECK(o.cycle_cost == Approx(cycle_cost(o, kCosts)));
            const double fixed = o.action == CycleAction::preventive ? kCosts.preventive : kCosts.corrective;
            CHECK(o.cycle_cost == Approx(fixed + kCosts.inspection * o.inspections + kCosts.downtime * o.downtime));
            if (o.action == CycleAction::preventive) {
                CHECK(o.downtime == 0.0);
                CHECK(o.first_m_crossing > o.length - kBasePolicy.inspection_period);
                CHECK(o.first_m_crossing <= o.length);
            } else {
                CHECK(o.downtime > 0.0);
                CHECK(o.downtime < kBasePolicy.inspection_period);
                CHECK(o.first_l_crossing == Approx(o.length - o.downtime));
            }
        }
        const auto est = summarize_cycles(outs);
        CHECK(est.preventive_fraction + est.corrective_fraction + est.censored_fraction == Approx(1.0));
        CHECK(est.std_error > 0.0);
    }

    TEST_CASE("degenerate costs") {
        const auto spec = baseline_system();
        const auto zero = estimate_cost_rate(spec, kBasePolicy, CostRates{}, 500, SimControl{}, 32);
        CHECK(zero.point == 0.0);
        const auto insp = estimate_cost_rate(spec, kBasePolicy, CostRates{0, 0, 50, 0}, 500, SimControl{}, 32);
        CHECK(insp.point == Approx(50.0 / kBasePolicy.inspection_period).epsilon(1e-12));
    }

    TEST_CASE("no arrivals means every cycle is censored") {
        auto spec = baseline_system();
        spec.arrivals.lambda0 = 0.0;
        spec.arrivals.mu = 0.0;
        SimControl sim;
        sim.max_inspections = 5;
        const auto outs = simulate_cycles(spec, kBasePolicy, kCosts, 50, sim, 33, 1);
        for (const auto& o : outs) CHECK(o.action == CycleAction::censored);
        CHECK_THROWS_AS(summarize_cycles(outs), NumericalError);
    }

    TEST_CASE("M = L disables preventive replacement") {
        const auto spec = baseline_system();
        const auto est = estimate_cost_rate(spec, {3.0, 10.0}, kCosts, 1000, SimControl{}, 34);
        CHECK(est.preventive_fraction == 0.0);
        CHECK(est.corrective_fraction == 1.0);
        CHECK_THROWS_AS(estimate_cost_rate(spec, {3.0, 10.5}, kCosts, 10, SimControl{}, 34), ValidationError);
    }

    TEST_CASE("results do not depend on the thread count") {
        const auto spec = baseline_system();
        const auto a = simulate_cycles(spec, kBasePolicy, kCosts, 3000, SimControl{}, 35, 1);
        const auto b = simulate_cycles(spec, kBasePolicy, kCosts, 3000, SimControl{}, 35, 4);
        REQUIRE(a.size() == b.size());
        for (std::size_t i = 0; i < a.size(); ++i) {
            CHECK(a[i].length == b[i].length);
            CHECK(a[i].downtime == b[i].downtime);
            CHECK(a[i].cycle_cost == b[i].cycle_cost);
        }
        CHECK(summarize_cycles(a).point == summarize_cycles(b).point);
    }

    TEST_CASE("analytic identities") {
        const auto spec = baseline_system();
        const auto q = analytic_cycle_quantities(spec, kBasePolicy);
        CHECK(q.expected_inspections == Approx(q.expected_length / kBasePolicy.inspection_period).epsilon(1e-12));
        double mass = 0.0;
        for (std::size_t k = 0; k < q.preventive.size(); ++k) {
            CHECK(q.preventive[k] >= 0.0);
            CHECK(q.corrective[k] >= 0.0);
            CHECK(q.downtime[k] >= 0.0);
            CHECK(q.downtime[k] <= kBasePolicy.inspection_period * q.corrective[k] + 1e-12);
            mass += q.preventive[k] + q.corrective[k];
        }
        CHECK(mass + q.truncation_deficit == Approx(1.0).epsilon(1e-9));
        // With no earlier history the first interval reduces to the two lifetime laws.
        const double tau = kBasePolicy.inspection_period;
        const double s_w = first_passage_survival(spec, spec.failure_threshold, tau);
        const double s_v = first_passage_survival(spec, kBasePolicy.preventive_threshold, tau);
        CHECK(q.preventive[0] == Approx(s_w - s_v).epsilon(1e-5));
        CHECK(q.corrective[0] == Approx(1.0 - s_w).epsilon(1e-5));
        const double pc = std::accumulate(q.corrective.begin(), q.corrective.end(), 0.0);
        const double pp = std::accumulate(q.preventive.begin(), q.preventive.end(), 0.0);
        const double ed = std::accumulate(q.downtime.begin(), q.downtime.end(), 0.0);
        const double expected = (kCosts.preventive * pp + kCosts.corrective * pc +
                                 kCosts.inspection * q.expected_inspections + kCosts.downtime * ed) /
                                q.expected_length;
        CHECK(cost_rate_analytic(kCosts, q) == Approx(expected).epsilon(1e-12));
        CHECK(cost_rate_analytic(spec, kBasePolicy, kCosts) == Approx(expected).epsilon(1e-12));
    }

    TEST_CASE("factorized form over-weights preventive replacement") {
        const auto spec = baseline_system();
        AnalyticOptions fact;
        fact.form = PreventiveForm::factorized;
        const auto exact = analytic_cycle_quantities(spec, kBasePolicy);
        const auto f = analytic_cycle_quantities(spec, kBasePolicy, fact);
        CHECK(f.expected_length == Approx(exact.expected_length).epsilon(1e-9));
        CHECK(f.preventive[0] > exact.preventive[0]);
    }

    TEST_CASE("analytic quantities against simulation: baseline scenario") {
        check_against_simulation(baseline_system(), kBasePolicy, 36);
    }

    TEST_CASE("analytic quantities against simulation: short period") {
        SystemSpec s;
        s.arrivals = {0.5, 1.0, 1.0};
        s.growth = GammaModel::deterministic(1.0, 1.0);
        s.failure_threshold = 8.0;
        check_against_simulation(s, {3.0, 4.0}, 37);
    }

    TEST_CASE("analytic quantities against simulation: random effects") {
        auto s = baseline_system();
        s.growth = GammaModel::uniform_inverse(1.1, 1.0 / 1.4 - 0.1, 1.0 / 1.4 + 0.1);
        check_against_simulation(s, {1.0 + 2.0 * 24.0 / 9.0, 1.0 + 3.0 * 9.0 / 7.0}, 38);
    }

    TEST_CASE("analytic truncation is reported") {
        AnalyticOptions opt;
        opt.k_max = 1;
        opt.tol = 1e-12;
        CHECK_THROWS_AS(analytic_cycle_quantities(baseline_system(), {1.0, 9.0}, opt), NumericalError);
    }

    TEST_CASE("substep-end crossings bias downtime low") {
        const auto spec = baseline_system();
        const PolicyParams policy{kBasePolicy.inspection_period, 9.5};
        auto downtime = [&](bool exact, int substeps) {
            SimControl sim;
            sim.exact_crossing = exact;
            sim.substeps = substeps;
            const auto outs = simulate_cycles(spec, policy, kCosts, 20000, sim, 39, 1);
            return moments(outs, [](const CycleOutcome& o) { return o.downtime; });
        };
        const auto ref = downtime(true, 16);
        const auto coarse = downtime(false, 4);
        const auto fine = downtime(false, 64);
        const double bias_coarse = ref.mean - coarse.mean, bias_fine = ref.mean - fine.mean;
        CHECK(bias_coarse > 3.0 * std::hypot(ref.se, coarse.se));
        CHECK(std::fabs(bias_fine) < 0.5 * bias_coarse);
        const auto exact_fine = downtime(true, 64);
        CHECK(std::fabs(exact_fine.mean - ref.mean) < 3.5 * std::hypot(ref.se, exact_fine.se));
    }

    TEST_CASE("grid search") {
        const auto spec = baseline_system();
        const auto one = grid_search(spec, kCosts, {6.0}, {5.0}, 300, SimControl{}, 40);
        REQUIRE(one.surface.size() == 1);
        CHECK(one.t_opt == 6.0);
        CHECK(one.m_opt == 5.0);
        CHECK(one.cost == estimate_cost_rate(spec, {6.0, 5.0}, kCosts, 300, SimControl{}, 40).point);
        // All costs zero: every cell ties and the smallest (T, M) wins.
        const auto tie = grid_search(spec, CostRates{}, {5.0, 3.0}, {6.0, 4.0}, 100, SimControl{}, 41);
        CHECK(tie.t_opt == 3.0);
        CHECK(tie.m_opt == 4.0);
        REQUIRE(tie.surface.size() == 4);
        CHECK(tie.surface[1].inspection_period == 5.0);
        CHECK(tie.surface[1].preventive_threshold == 4.0);
        std::ostringstream out;
        write_surface_csv(out, tie);
        CHECK(out.str().rfind("T,M,cost_rate,std_error,", 0) == 0);
        CHECK_THROWS_AS(grid_search(spec, kCosts, {}, {5.0}, 10, SimControl{}, 40), ValidationError);
    }

    TEST_CASE("sensitivity sweep") {
        const auto spec = baseline_system();
        SensitivityRequest req;
        req.kind = SweepKind::shape_and_rate;
        req.axis1 = {1.1};
        req.axis2 = {1.4};
        req.t_grid = {5.0, 7.0};
        req.m_grid = {4.0, 6.0};
        req.n_cycles = 200;
        const auto rows = sensitivity_sweep(spec, kCosts, req, SimControl{}, 42);
        REQUIRE(rows.size() == 1);
        const auto best = grid_search(spec, kCosts, req.t_grid, req.m_grid, 200, SimControl{}, 42);
        CHECK(rows[0].cost_opt == best.cost);
        CHECK(rows[0].t_opt == best.t_opt);
        CHECK(rows[0].m_opt == best.m_opt);

        SensitivityRequest costs;
        costs.kind = SweepKind::corrective_and_preventive;
        costs.axis1 = {190.0, 210.0};
        costs.axis2 = {100.0};
        costs.n_cycles = 300;
        CHECK_THROWS_AS(sensitivity_sweep(spec, kCosts, costs, SimControl{}, 43), ValidationError);
        costs.fixed_policy = kBasePolicy;
        const auto c = sensitivity_sweep(spec, kCosts, costs, SimControl{}, 43);
        REQUIRE(c.size() == 2);
        CHECK(c[1].cost_opt > c[0].cost_opt);

        SensitivityRequest centre = req;
        centre.kind = SweepKind::shape_and_scale_center;
        CHECK_THROWS_AS(sensitivity_sweep(spec, kCosts, centre, SimControl{}, 44), ValidationError);
    }
}
