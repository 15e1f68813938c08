#include <doctest.h>

#include <cmath>
#include <sstream>

#include "cbm/degradation.hpp"
#include "cbm/errors.hpp"
#include "cbm/maintenance.hpp"
#include "cbm/quadrature.hpp"
#include "cbm/random.hpp"
#include "cbm/special_functions.hpp"

using namespace cbm;
using doctest::Approx;

namespace {

// Direct mixture: the per-process product of gamma increment densities
// averaged over 1/beta ~ U(a, b).
double mixture_log_likelihood(double alpha, double a, double b, const DegradationObservations& data) {
    double total = 0.0;
    for (const auto& p : data.processes) {
        auto density = [&](double theta) {
            double log_prod = 0.0;
            for (std::size_t j = 1; j < p.times.size(); ++j)
                log_prod += std::log(gamma_pdf(alpha * (p.times[j] - p.times[j - 1]), 1.0 / theta,
                                               p.levels[j] - p.levels[j - 1]));
            return std::exp(log_prod);
        };
        QuadratureSpec tight;
        tight.abs_tol = 0.0;
        tight.rel_tol = 1e-12;
        total += std::log(integrate(density, a, b, tight) / (b - a));
    }
    return total;
}

DegradationObservations small_data() {
    DegradationObservations d;
    d.processes.push_back({1, {0.0, 1.0, 2.5, 4.0}, {0.0, 0.9, 2.1, 3.0}});
    d.processes.push_back({2, {0.0, 2.0, 3.0}, {0.0, 1.2, 2.6}});
    return d;
}

}  // namespace

TEST_SUITE("likelihood") {
    TEST_CASE("matches the direct mixture") {
        const auto d = small_data();
        for (auto [a, b] : {std::pair{0.5, 1.0}, std::pair{0.7, 1.3}, std::pair{0.2, 2.0}}) {
            CAPTURE(a);
            CAPTURE(b);
            CHECK(log_likelihood(1.2, a, b, d) == Approx(mixture_log_likelihood(1.2, a, b, d)).epsilon(1e-9));
        }
    }

    TEST_CASE("collapses to the gamma density as a -> b") {
        DegradationObservations d;
        d.processes.push_back({1, {0.0, 2.0}, {0.0, 1.7}});
        const double theta = 0.8;
        const double exact = std::log(gamma_pdf(1.5 * 2.0, 1.0 / theta, 1.7));
        CHECK(log_likelihood(1.5, theta - 1e-6, theta + 1e-6, d) == Approx(exact).epsilon(1e-8));
    }

    TEST_CASE("rejects bad input") {
        DegradationObservations zero;
        zero.processes.push_back({1, {0.0, 1.0, 2.0}, {0.0, 0.5, 0.5}});
        CHECK_THROWS_AS(log_likelihood(1.0, 0.5, 1.5, zero), ValidationError);
        CHECK_THROWS_AS(log_likelihood(1.0, 1.5, 0.5, small_data()), ValidationError);
        DegradationObservations decreasing;
        decreasing.processes.push_back({1, {0.0, 1.0, 2.0}, {0.0, 0.5, 0.4}});
        CHECK_THROWS_AS(decreasing.validate(), ValidationError);
        DegradationObservations one_point;
        one_point.processes.push_back({1, {0.0}, {0.0}});
        CHECK_THROWS_AS(one_point.validate(), ValidationError);
    }

    TEST_CASE("csv round trip") {
        Rng rng(11);
        const auto d = simulate_observations(GammaModel::uniform_inverse(1.5, 0.7, 1.3), 4, 5.0, 1.0, rng);
        std::stringstream buf;
        write_observations_csv(buf, d);
        const auto back = read_observations_csv(buf);
        REQUIRE(back.processes.size() == 4);
        for (std::size_t i = 0; i < 4; ++i) {
            CHECK(back.processes[i].id == d.processes[i].id);
            REQUIRE(back.processes[i].times.size() == d.processes[i].times.size());
            for (std::size_t j = 0; j < d.processes[i].times.size(); ++j) {
                CHECK(back.processes[i].times[j] == d.processes[i].times[j]);
                CHECK(back.processes[i].levels[j] == d.processes[i].levels[j]);
            }
        }
        std::stringstream bad("process_id,time,level\n1,0,0\n1,1,2\n1,2,1\n");
        CHECK_THROWS_AS(read_observations_csv(bad), ValidationError);
    }

    TEST_CASE("recovers the half-width") {
        const auto grid = linspace(0.02, 0.98, 49);
        int inside = 0;
        for (std::uint64_t rep = 0; rep < 5; ++rep) {
            Rng rng(derive_seed(12, {rep}));
            const auto d = simulate_observations(GammaModel::uniform_inverse(1.5, 0.7, 1.3), 26, 30.0, 1.0, rng);
            const auto fit = fit_half_width(1.5, 1.0, d, grid);
            CAPTURE(fit.half_width);
            CHECK(fit.interior_minimum);
            inside += std::fabs(fit.half_width - 0.3) <= 0.15;
        }
        CHECK(inside >= 4);
    }

    TEST_CASE("no heterogeneity pushes the estimate to the lower edge") {
        Rng rng(13);
        const auto d = simulate_observations(GammaModel::deterministic(1.5, 1.0), 26, 30.0, 1.0, rng);
        const auto grid = linspace(0.05, 0.95, 19);
        const auto fit = fit_half_width(1.5, 1.0, d, grid, false);
        CAPTURE(fit.half_width);
        CHECK(fit.half_width <= grid[1] + 1e-12);
    }

    TEST_CASE("grid and refinement contract") {
        Rng rng(14);
        const auto d = simulate_observations(GammaModel::uniform_inverse(1.5, 0.7, 1.3), 26, 30.0, 1.0, rng);
        const auto grid = linspace(0.1, 0.9, 9);
        const auto coarse = fit_half_width(1.5, 1.0, d, grid, false);
        REQUIRE(coarse.curve.size() == grid.size());
        bool on_grid = false;
        for (double g : grid) on_grid = on_grid || g == coarse.half_width;
        CHECK(on_grid);
        const auto fine = fit_half_width(1.5, 1.0, d, grid, true);
        CHECK(std::fabs(fine.half_width - coarse.half_width) <= 0.1 + 1e-12);
        CHECK(fine.neg_log_likelihood <= coarse.neg_log_likelihood + 1e-9);
        CHECK_THROWS_AS(fit_half_width(1.5, 1.0, d, {0.5, 1.2}), ValidationError);
    }
}
