#include <doctest.h>

#include <cmath>
#include <map>
#include <vector>

#include "cbm/degradation.hpp"
#include "cbm/errors.hpp"
#include "cbm/quadrature.hpp"
#include "cbm/random.hpp"
#include "cbm/special_functions.hpp"

using namespace cbm;
using doctest::Approx;

namespace {

const GammaLaw kBaseLaw{1.1, 1.4};

double mean_of(const std::vector<double>& x) {
    double s = 0.0;
    for (double v : x) s += v;
    return s / static_cast<double>(x.size());
}

double var_of(const std::vector<double>& x) {
    const double m = mean_of(x);
    double s = 0.0;
    for (double v : x) s += (v - m) * (v - m);
    return s / static_cast<double>(x.size() - 1);
}

// Exact passage times of two levels along one simulated path. Steps of
// length dt are refined by gamma-bridge bisection; all refinement points of
// a step are kept so the second level is located on the same path.
struct PathOracle {
    GammaLaw law;
    double dt = 0.25;

    std::pair<double, double> passage_times(double m, double l, Rng& rng) const {
        double t = 0.0, x = 0.0;
        double tm = -1.0;
        for (;;) {
            const double x1 = x + rng.gamma(law.shape_rate * dt, law.rate);
            if (x1 >= m) {
                std::map<double, double> pts{{t, x}, {t + dt, x1}};
                if (tm < 0.0) tm = locate(pts, m, rng);
                if (x1 >= l) return {tm, locate(pts, l, rng)};
            }
            t += dt;
            x = x1;
        }
    }

    double locate(std::map<double, double>& pts, double level, Rng& rng) const {
        for (;;) {
            auto hi = pts.begin();
            while (hi->second < level) ++hi;
            if (hi == pts.begin()) return hi->first;
            auto lo = std::prev(hi);
            const double w = hi->first - lo->first;
            if (w < 1e-10) return hi->first;
            const double a = law.shape_rate * w / 2.0;
            const double mid = lo->second + (hi->second - lo->second) * rng.beta(a, a);
            pts.emplace(lo->first + w / 2.0, mid);
        }
    }
};

}  // namespace

TEST_SUITE("degradation") {
    TEST_CASE("scale realizations") {
        Rng rng(1);
        CHECK(realize_scale(GammaModel::deterministic(1.1, 1.4), rng).rate == 1.4);
        const auto model = GammaModel::uniform_inverse(1.0, 0.7, 1.3);
        std::vector<double> theta(100000);
        for (auto& th : theta) {
            const double r = realize_scale(model, rng).rate;
            REQUIRE(r >= 1.0 / 1.3);
            REQUIRE(r <= 1.0 / 0.7);
            th = 1.0 / r;
        }
        CHECK(std::fabs(mean_of(theta) - 1.0) < 3.0 * std::sqrt(var_of(theta) / theta.size()));
    }

    TEST_CASE("model validation") {
        CHECK_THROWS_AS(GammaModel::deterministic(0.0, 1.0).validate(), ValidationError);
        CHECK_THROWS_AS(GammaModel::deterministic(1.0, -1.0).validate(), ValidationError);
        CHECK_THROWS_AS(GammaModel::uniform_inverse(1.0, 1.3, 0.7).validate(), ValidationError);
        CHECK_THROWS_AS(GammaModel::uniform_inverse(1.0, 0.0, 0.7).validate(), ValidationError);
    }

    TEST_CASE("increments: mean and additivity") {
        Rng rng(2);
        const int n = 100000;
        std::vector<double> one(n), split(n);
        for (int i = 0; i < n; ++i) {
            one[i] = sample_increment({1.4}, 1.1, 1.0, rng);
            REQUIRE(one[i] >= 0.0);
            double s = 0.0;
            for (int k = 0; k < 10; ++k) s += sample_increment({1.4}, 1.1, 0.1, rng);
            split[i] = s;
        }
        CHECK(std::fabs(mean_of(one) - 1.1 / 1.4) < 3.0 * std::sqrt(var_of(one) / n));
        CHECK(std::fabs(mean_of(split) - 1.1 / 1.4) < 3.0 * std::sqrt(var_of(split) / n));
        CHECK(var_of(split) == Approx(var_of(one)).epsilon(0.03));
        CHECK(var_of(one) == Approx(1.1 / (1.4 * 1.4)).epsilon(0.03));
    }

    TEST_CASE("hitting cdf") {
        CHECK(hitting_cdf(kBaseLaw, 10.0, 0.0) == 0.0);
        CHECK(hitting_cdf(kBaseLaw, 10.0, 1e-9) < 1e-12);
        CHECK(hitting_cdf({1.0, 1.0}, 10.0, 10.0) == Approx(0.45792971447185221).epsilon(1e-12));
        double prev = 0.0;
        for (int t = 1; t <= 50; ++t) {
            const double f = hitting_cdf(kBaseLaw, 10.0, t);
            CHECK(f >= prev);
            prev = f;
        }
        CHECK(prev == Approx(1.0).epsilon(1e-9));
        CHECK_THROWS_AS(hitting_cdf(kBaseLaw, 0.0, 1.0), ValidationError);
    }

    TEST_CASE("hitting pdf integrates to the cdf") {
        const double mass =
            integrate_to_infinity([](double t) { return hitting_pdf(kBaseLaw, 10.0, t); }, 0.0, {}, 4.0);
        CHECK(mass == Approx(1.0).epsilon(1e-4));
        for (double t : {2.0, 8.0, 13.0, 20.0}) {
            const double rebuilt = integrate([](double u) { return hitting_pdf(kBaseLaw, 10.0, u); }, 0.0, t);
            CHECK(rebuilt == Approx(hitting_cdf(kBaseLaw, 10.0, t)).epsilon(1e-4));
        }
        Rng rng(3);
        for (int i = 0; i < 200; ++i) CHECK(hitting_pdf(kBaseLaw, 10.0, rng.uniform(0.01, 60.0)) >= 0.0);
    }

    TEST_CASE("hitting quantile inverts the cdf") {
        Rng rng(4);
        for (int i = 0; i < 200; ++i) {
            const double p = rng.uniform_open();
            const double q = hitting_quantile(kBaseLaw, 10.0, p);
            CHECK(hitting_cdf(kBaseLaw, 10.0, q) == Approx(p).epsilon(1e-8));
        }
    }

    TEST_CASE("gap survival: basic shape") {
        GapSurvival g(kBaseLaw, 6.0, 10.0);
        CHECK(g(0.0) == 1.0);
        CHECK(g.at_zero_plus() < 1.0);
        double prev = 1.0;
        for (double t = 0.05; t < 25.0; t += 0.25) {
            const double v = g(t);
            CHECK(v <= prev + 1e-12);
            prev = v;
        }
        CHECK(delta_hitting_survival(kBaseLaw, 6.0, 10.0, 3.0) == Approx(g(3.0)).epsilon(1e-9));
        GapSurvival narrow(kBaseLaw, 9.999, 10.0);
        CHECK(narrow(1.0) < 0.05);
        CHECK_THROWS_AS(GapSurvival(kBaseLaw, 10.0, 6.0), ValidationError);
    }

    TEST_CASE("gap survival integrates to E[sigma_L] - E[sigma_M]") {
        GapSurvival g(kBaseLaw, 6.0, 10.0);
        const double gap_mean = integrate_to_infinity([&](double t) { return g(t); }, 0.0, {}, 2.0);
        const double diff = integrate_to_infinity(
            [](double t) { return hitting_cdf(kBaseLaw, 6.0, t) - hitting_cdf(kBaseLaw, 10.0, t); }, 0.0, {}, 4.0);
        CHECK(gap_mean == Approx(diff).epsilon(1e-5));
    }

    TEST_CASE("gap survival matches simulated paths") {
        GapSurvival g(kBaseLaw, 6.0, 10.0);
        PathOracle oracle{kBaseLaw};
        const int n = 100000;
        int beyond3 = 0, beyond0 = 0;
        for (int i = 0; i < n; ++i) {
            Rng rng(derive_seed(77, {static_cast<std::uint64_t>(i)}));
            const auto [tm, tl] = oracle.passage_times(6.0, 10.0, rng);
            beyond3 += tl - tm > 3.0;
            beyond0 += tl - tm > 1e-9;
        }
        const double p3 = static_cast<double>(beyond3) / n, p0 = static_cast<double>(beyond0) / n;
        CHECK(std::fabs(p3 - g(3.0)) < 3.0 * std::sqrt(p3 * (1 - p3) / n));
        CHECK(std::fabs(p0 - g.at_zero_plus()) < 3.0 * std::sqrt(p0 * (1 - p0) / n) + 1e-4);
    }

    TEST_CASE("random-effect density") {
        const UniformInverseScale u{1.0, 2.0};
        const double mass =
            integrate_to_infinity([&](double x) { return random_effect_pdf(1.0, u, 5.0, x); }, 0.0, {}, 4.0);
        CHECK(mass == Approx(1.0).epsilon(1e-6));
        auto mixture = [](double alpha, UniformInverseScale s, double t, double x) {
            return integrate([&](double th) { return gamma_pdf(alpha * t, 1.0 / th, x); }, s.lower, s.upper) /
                   (s.upper - s.lower);
        };
        for (double x : {0.5, 2.0, 7.5, 15.0}) CHECK(random_effect_pdf(1.0, u, 5.0, x) == Approx(mixture(1.0, u, 5.0, x)).epsilon(1e-8));
        Rng rng(6);
        for (int i = 0; i < 30; ++i) {
            const double a = rng.uniform(0.2, 1.5);
            const UniformInverseScale s{a, a + rng.uniform(0.05, 1.0)};
            const double alpha = rng.uniform(0.3, 2.0), t = rng.uniform(0.2, 20.0);
            const double x = alpha * t * (s.lower + s.upper) / 2.0 * rng.uniform(0.1, 2.5);
            CAPTURE(alpha);
            CAPTURE(t);
            CAPTURE(x);
            const double ref = mixture(alpha, s, t, x);
            CHECK(std::fabs(random_effect_pdf(alpha, s, t, x) - ref) <= 1e-8 * std::max(1.0, ref));
        }
        // Vanishing heterogeneity.
        const UniformInverseScale thin{1.0, 1.0 + 1e-7};
        CHECK(random_effect_pdf(1.3, thin, 4.0, 3.0) == Approx(gamma_pdf(1.3 * 4.0, 1.0, 3.0)).epsilon(1e-6));
    }

    TEST_CASE("random-effect hitting cdf") {
        const UniformInverseScale s{1.0 / 1.4 - 0.1, 1.0 / 1.4 + 0.1};
        CHECK(random_effect_hitting_cdf(1.1, s, 10.0, 0.0) == 0.0);
        const UniformInverseScale thin{0.8, 0.8 + 1e-8};
        CHECK(random_effect_hitting_cdf(1.1, thin, 10.0, 7.0) == Approx(hitting_cdf({1.1, 1.25}, 10.0, 7.0)).epsilon(1e-6));
        const double f = random_effect_hitting_cdf(1.1, s, 10.0, 10.0);
        CHECK(first_hitting_cdf(GammaModel::uniform_inverse(1.1, s.lower, s.upper), 10.0, 10.0) == Approx(f).epsilon(1e-10));
        const int n = 100000;
        int hit = 0;
        Rng rng(8);
        for (int i = 0; i < n; ++i) {
            const double theta = rng.uniform(s.lower, s.upper);
            hit += rng.gamma(1.1 * 10.0, 1.0 / theta) >= 10.0;
        }
        const double p = static_cast<double>(hit) / n;
        CHECK(std::fabs(p - f) < 3.0 * std::sqrt(p * (1 - p) / n));
    }

    TEST_CASE("random-effect moments") {
        const auto m = random_effect_moments(1.0, {0.7, 1.3}, 10.0);
        CHECK(m.mean == Approx(10.0));
        CHECK(m.variance == Approx(13.3));
        CHECK(m.ratio == Approx(1.33));
        const auto d = random_effect_moments(2.0, {0.9, 0.9 + 1e-12}, 3.0);
        CHECK(d.mean == Approx(2.0 * 3.0 * 0.9));
        CHECK(d.variance == Approx(2.0 * 3.0 * 0.81));
        double prev = 0.0;
        for (double t = 0.5; t < 50.0; t += 0.5) {
            const double r = random_effect_moments(1.0, {0.7, 1.3}, t).ratio;
            CHECK(r > prev);
            prev = r;
        }
        Rng rng(10);
        const int n = 200000;
        std::vector<double> x(n);
        for (auto& v : x) v = rng.gamma(5.0, 1.0 / rng.uniform(0.7, 1.3));
        const auto ref = random_effect_moments(1.0, {0.7, 1.3}, 5.0);
        CHECK(std::fabs(mean_of(x) - ref.mean) < 3.0 * std::sqrt(ref.variance / n));
        CHECK(var_of(x) == Approx(ref.variance).epsilon(0.02));
    }

    TEST_CASE("matched-variance comparison") {
        const auto c = matched_variance_comparison(1.0, {0.7, 1.3}, {1.0, 10.0, 100.0});
        CHECK(c.uniform_dominates);
        CHECK(c.strictly);
        for (std::size_t i = 0; i < c.times.size(); ++i) CHECK(c.uniform_variance[i] > c.deterministic_variance[i]);
        CHECK(matched_variance_comparison(1.0, {1.0, 2.0}, {1.0}).gamma_crossover == Approx(5.0 / 9.0));
        const auto near = matched_variance_comparison(1.0, {1.0, 1.0 + 1e-9}, {1.0, 10.0});
        CHECK(near.uniform_variance[1] == Approx(near.deterministic_variance[1]).epsilon(1e-8));
    }

    TEST_CASE("scale components") {
        const auto det = scale_components(GammaModel::deterministic(1.1, 1.4));
        REQUIRE(det.size() == 1);
        CHECK(det[0].first == 1.0);
        CHECK(det[0].second.rate == 1.4);
        const auto mix = scale_components(GammaModel::uniform_inverse(1.1, 0.6, 0.8), 8);
        double w = 0.0, mean_theta = 0.0;
        for (const auto& [wt, law] : mix) {
            w += wt;
            mean_theta += wt / law.rate;
        }
        CHECK(w == Approx(1.0).epsilon(1e-14));
        CHECK(mean_theta == Approx(0.7).epsilon(1e-14));
    }
}
