#include <doctest.h>

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "cbm/errors.hpp"
#include "cbm/quadrature.hpp"
#include "cbm/random.hpp"
#include "cbm/shock_arrivals.hpp"

using namespace cbm;
using doctest::Approx;

namespace {

const ShotNoiseParams kBase{1.0, 2.0, 0.5};

struct Stats {
    double mean, se;
};

Stats stats(const std::vector<double>& x) {
    double s = 0.0, s2 = 0.0;
    for (double v : x) {
        s += v;
        s2 += v * v;
    }
    const double n = static_cast<double>(x.size());
    const double m = s / n;
    return {m, std::sqrt((s2 / n - m * m) / (n - 1.0))};
}

}  // namespace

TEST_SUITE("shock_arrivals") {
    TEST_CASE("intensity given shocks") {
        ShockTrajectory none{10.0, {}};
        CHECK(intensity_at(kBase, none, 4.0) == 1.0);
        ShockTrajectory one{10.0, {2.5}};
        CHECK(intensity_at(kBase, one, 2.5) == Approx(2.0));
        CHECK(intensity_at(kBase, one, 2.4999) == Approx(1.0));
        ShockTrajectory two{10.0, {1.0, 2.0}};
        CHECK(intensity_at({1.0, 2.0, 0.5}, two, 3.0) == Approx(1.0 + std::exp(-1.0) + std::exp(-0.5)));
        CHECK(intensity_at({1.0, 2.0, 0.5}, two, 3.0) == Approx(1.97441).epsilon(1e-5));
    }

    TEST_CASE("closed-form means") {
        CHECK(expected_intensity(kBase, 0.0) == 1.0);
        CHECK(expected_intensity(kBase, 2.0) == Approx(1.0 + 4.0 * (1.0 - std::exp(-1.0))));
        CHECK(expected_intensity(kBase, 2.0) == Approx(3.52848).epsilon(1e-5));
        CHECK(expected_intensity(kBase, 1e6) == Approx(5.0));
        CHECK(expected_num_arrivals(kBase, 5.0) == Approx(5.0 + 20.0 + 8.0 * (std::exp(-2.5) - 1.0)));
        CHECK(expected_num_arrivals(kBase, 5.0) == Approx(17.6567).epsilon(1e-5));
        CHECK(expected_num_arrivals({1.3, 0.0, 0.5}, 4.0) == Approx(5.2));
        // Small-argument branch agrees with the direct formula.
        const ShotNoiseParams tiny{0.0, 1.0, 1e-9};
        CHECK(expected_num_arrivals(tiny, 2.0) == Approx(2.0).epsilon(1e-8));
    }

    TEST_CASE("integral of the mean intensity is the mean count") {
        Rng rng(5);
        for (int i = 0; i < 20; ++i) {
            const ShotNoiseParams p{rng.uniform(0.0, 3.0), rng.uniform(0.0, 4.0), rng.uniform(0.05, 5.0)};
            const double s = rng.uniform(0.1, 30.0);
            const double integral = integrate([&](double u) { return expected_intensity(p, u); }, 0.0, s);
            CHECK(integral == Approx(expected_num_arrivals(p, s)).epsilon(1e-9));
        }
    }

    TEST_CASE("mean intensity matches simulated shot noise") {
        const int n = 100000;
        std::vector<double> v(n);
        for (int i = 0; i < n; ++i) {
            Rng rng(derive_seed(17, {static_cast<std::uint64_t>(i)}));
            v[i] = intensity_at(kBase, simulate_shocks(kBase, 2.0, rng), 2.0);
        }
        const auto st = stats(v);
        CHECK(std::fabs(st.mean - expected_intensity(kBase, 2.0)) < 3.0 * st.se);
    }

    TEST_CASE("thinning: mean count over Cox trajectories") {
        const int n = 100000;
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) {
            Rng rng(derive_seed(19, {static_cast<std::uint64_t>(i)}));
            const auto shocks = simulate_shocks(kBase, 5.0, rng);
            c[i] = static_cast<double>(simulate_arrivals(kBase, shocks, 5.0, rng).arrival_times.size());
        }
        const auto st = stats(c);
        CHECK(std::fabs(st.mean - expected_num_arrivals(kBase, 5.0)) < 3.0 * st.se);
    }

    TEST_CASE("thinning: conditional mean given a fixed shock history") {
        ShockTrajectory shocks{8.0, {0.5, 0.7, 3.0, 6.5}};
        double expected = kBase.lambda0 * 8.0;
        for (double t : shocks.shock_times) expected += (1.0 - std::exp(-kBase.delta * (8.0 - t))) / kBase.delta;
        const int n = 100000;
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) {
            Rng rng(derive_seed(23, {static_cast<std::uint64_t>(i)}));
            c[i] = static_cast<double>(simulate_arrivals(kBase, shocks, 8.0, rng).arrival_times.size());
        }
        const auto st = stats(c);
        CHECK(std::fabs(st.mean - expected) < 3.0 * st.se);
    }

    TEST_CASE("mu = 0 gives a homogeneous Poisson process") {
        const ShotNoiseParams p{2.0, 0.0, 0.5};
        const int n = 50000;
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) {
            Rng rng(derive_seed(29, {static_cast<std::uint64_t>(i)}));
            const auto shocks = simulate_shocks(p, 3.0, rng);
            CHECK(shocks.shock_times.empty());
            c[i] = static_cast<double>(simulate_arrivals(p, shocks, 3.0, rng).arrival_times.size());
        }
        const auto st = stats(c);
        CHECK(std::fabs(st.mean - 6.0) < 3.0 * st.se);
        const double var = st.se * st.se * n;
        CHECK(var / st.mean == Approx(1.0).epsilon(0.03));  // Poisson dispersion
    }

    TEST_CASE("lazy sampler has the same law") {
        const int n = 50000;
        std::vector<double> c(n);
        for (int i = 0; i < n; ++i) {
            Rng rng(derive_seed(31, {static_cast<std::uint64_t>(i)}));
            CoxArrivalSampler sampler(kBase);
            std::vector<double> out;
            for (double t = 0.5; t <= 5.0 + 1e-12; t += 0.5) sampler.advance(t, rng, out);
            for (std::size_t k = 1; k < out.size(); ++k) REQUIRE(out[k] >= out[k - 1]);
            CHECK(sampler.accepted() == out.size());
            CHECK(sampler.proposals() >= sampler.accepted());
            c[i] = static_cast<double>(out.size());
        }
        const auto st = stats(c);
        CHECK(std::fabs(st.mean - expected_num_arrivals(kBase, 5.0)) < 3.0 * st.se);
    }

    TEST_CASE("validation names the field") {
        try {
            ShotNoiseParams{1.0, 1.0, 0.0}.validate();
            FAIL("expected a validation error");
        } catch (const ValidationError& e) {
            CHECK(std::string(e.what()).find("delta") != std::string::npos);
        }
        CHECK_THROWS_AS((ShotNoiseParams{-1.0, 1.0, 1.0}.validate()), ValidationError);
        CHECK_THROWS_AS((ShotNoiseParams{1.0, -1.0, 1.0}.validate()), ValidationError);
        CHECK_THROWS_AS((ShockTrajectory{1.0, {0.5, 0.2}}.validate()), ValidationError);
    }

    TEST_CASE("trajectory counting and csv") {
        ArrivalTrajectory a{10.0, {0.5, 1.0, 4.0}};
        CHECK(a.count_until(0.4) == 0);
        CHECK(a.count_until(1.0) == 2);
        CHECK(a.count_until(10.0) == 3);
        std::ostringstream os;
        write_times_csv(os, a.arrival_times);
        CHECK(os.str().rfind("time\n", 0) == 0);
    }
}
