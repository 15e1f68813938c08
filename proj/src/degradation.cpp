#include "cbm/degradation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cbm/errors.hpp"
#include "cbm/special_functions.hpp"

namespace cbm {
namespace {

QuadratureSpec mixture_spec() {
    QuadratureSpec spec;
    spec.abs_tol = 1e-14;
    spec.rel_tol = 1e-11;
    return spec;
}

void check_level_time(const char* where, double level, double t) {
    if (!(level > 0.0) || !std::isfinite(level)) detail::fail_validation(where, "level must be finite and > 0");
    if (!(t >= 0.0)) detail::fail_validation(where, "t must be >= 0");
}

// P(sigma_L > t) = P(alpha t, beta L), the complement of hitting_cdf.
double hitting_survival(const GammaLaw& law, double level, double t) {
    if (t <= 0.0) return 1.0;
    return regularized_lower_gamma(law.shape_rate * t, law.rate * level);
}

}  // namespace

GammaModel GammaModel::deterministic(double alpha, double beta) {
    GammaModel m{alpha, DeterministicScale{beta}};
    m.validate();
    return m;
}

GammaModel GammaModel::uniform_inverse(double alpha, double a, double b) {
    GammaModel m{alpha, UniformInverseScale{a, b}};
    m.validate();
    return m;
}

void GammaModel::validate() const {
    detail::require(shape_rate > 0.0 && std::isfinite(shape_rate), "GammaModel", "shape_rate must be > 0");
    if (const auto* d = std::get_if<DeterministicScale>(&scale)) {
        detail::require(d->rate > 0.0 && std::isfinite(d->rate), "GammaModel", "beta must be > 0");
    } else {
        const auto& u = std::get<UniformInverseScale>(scale);
        detail::require(u.lower > 0.0 && u.upper > u.lower && std::isfinite(u.upper), "GammaModel",
                        "random effect needs 0 < a < b < inf");
    }
}

void GammaLaw::validate() const {
    detail::require(shape_rate > 0.0 && std::isfinite(shape_rate), "GammaLaw", "shape_rate must be > 0");
    detail::require(rate > 0.0 && std::isfinite(rate), "GammaLaw", "rate must be > 0");
}

ScaleRealization realize_scale(const GammaModel& model, Rng& rng) {
    if (const auto* d = std::get_if<DeterministicScale>(&model.scale)) return {d->rate};
    const auto& u = std::get<UniformInverseScale>(model.scale);
    return {1.0 / rng.uniform(u.lower, u.upper)};
}

double sample_increment(ScaleRealization scale, double shape_rate, double dt, Rng& rng) {
    if (!(dt > 0.0)) detail::fail_validation("sample_increment", "dt must be > 0");
    return rng.gamma(shape_rate * dt, scale.rate);
}

double hitting_cdf(const GammaLaw& law, double level, double t) {
    check_level_time("hitting_cdf", level, t);
    if (t == 0.0) return 0.0;
    return regularized_upper_gamma(law.shape_rate * t, law.rate * level);
}

double hitting_pdf(const GammaLaw& law, double level, double t) {
    const char* where = "hitting_pdf";
    check_level_time(where, level, t);
    if (t == 0.0) return 0.0;
    const double h = std::max(1e-5, 1e-4 * t);
    const double lo = std::max(0.0, t - h);
    const double hi = t + h;
    const double centre = hitting_cdf(law, level, t);
    // Difference on whichever tail keeps the numbers small.
    double diff = centre < 0.5 ? hitting_cdf(law, level, hi) - hitting_cdf(law, level, lo)
                               : hitting_survival(law, level, lo) - hitting_survival(law, level, hi);
    const double q = diff / (hi - lo);
    const double tail = std::min(centre, 1.0 - centre);
    if (diff <= 0.0) {
        if (tail > 1e-280 && diff == 0.0)
            detail::fail_numerical(where, "step-size breakdown: difference quotient lost all digits");
        return 0.0;
    }
    return q;
}

double hitting_quantile(const GammaLaw& law, double level, double p) {
    const char* where = "hitting_quantile";
    if (!(p > 0.0 && p < 1.0)) detail::fail_validation(where, "p must be in (0, 1)");
    double lo = 0.0, f_lo = -p;
    double hi = std::max(1e-3, law.rate * level / law.shape_rate);
    double f_hi = hitting_cdf(law, level, hi) - p;
    int guard = 0;
    while (f_hi < 0.0) {
        lo = hi;
        f_lo = f_hi;
        hi *= 2.0;
        f_hi = hitting_cdf(law, level, hi) - p;
        if (++guard > 200) detail::fail_numerical(where, "could not bracket the quantile");
    }
    // Bisection until the bracket is narrow, then Illinois steps.
    int side = 0;
    for (int iter = 0; iter < 400; ++iter) {
        double mid;
        if (hi - lo > 1e-2 * std::max(1.0, hi)) {
            mid = 0.5 * (lo + hi);
        } else {
            mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo);
            if (!(mid > lo && mid < hi)) mid = 0.5 * (lo + hi);
        }
        const double f_mid = hitting_cdf(law, level, mid) - p;
        if (std::abs(f_mid) <= 1e-10 || hi - lo <= 4 * std::numeric_limits<double>::epsilon() * hi) return mid;
        if (f_mid < 0.0) {
            lo = mid;
            f_lo = f_mid;
            if (side == -1) f_hi *= 0.5;
            side = -1;
        } else {
            hi = mid;
            f_hi = f_mid;
            if (side == 1) f_lo *= 0.5;
            side = 1;
        }
    }
    return 0.5 * (lo + hi);
}

double random_effect_hitting_cdf(double shape_rate, const UniformInverseScale& scale, double level, double t) {
    check_level_time("random_effect_hitting_cdf", level, t);
    if (t == 0.0) return 0.0;
    const double a = scale.lower, b = scale.upper;
    auto integrand = [&](double theta) {
        return regularized_upper_gamma(shape_rate * t, level / theta);
    };
    return integrate(integrand, a, b, mixture_spec(), "random_effect_hitting_cdf") / (b - a);
}

double first_hitting_cdf(const GammaModel& model, double level, double t) {
    if (const auto* d = std::get_if<DeterministicScale>(&model.scale))
        return hitting_cdf(GammaLaw{model.shape_rate, d->rate}, level, t);
    return random_effect_hitting_cdf(model.shape_rate, std::get<UniformInverseScale>(model.scale), level, t);
}

double first_hitting_pdf(const GammaModel& model, double level, double t) {
    if (const auto* d = std::get_if<DeterministicScale>(&model.scale))
        return hitting_pdf(GammaLaw{model.shape_rate, d->rate}, level, t);
    const auto& u = std::get<UniformInverseScale>(model.scale);
    auto integrand = [&](double theta) { return hitting_pdf(GammaLaw{model.shape_rate, 1.0 / theta}, level, t); };
    return integrate(integrand, u.lower, u.upper, mixture_spec(), "first_hitting_pdf") / (u.upper - u.lower);
}

double random_effect_pdf(double shape_rate, const UniformInverseScale& scale, double t, double u) {
    const char* where = "random_effect_pdf";
    if (!(u > 0.0) || !(t > 0.0)) detail::fail_validation(where, "requires u > 0 and t > 0");
    const double a = scale.lower, b = scale.upper;
    const double s = shape_rate * t;
    const double log_diff = log_incomplete_gamma_difference(s - 1.0, u / b, u / a);
    return std::exp(log_diff - std::log(b - a) - log_gamma(s));
}

RandomEffectMoments random_effect_moments(double shape_rate, const UniformInverseScale& scale, double t) {
    if (!(t >= 0.0)) detail::fail_validation("random_effect_moments", "t must be >= 0");
    const double a = scale.lower, b = scale.upper;
    const double at = shape_rate * t;
    RandomEffectMoments m;
    m.mean = at * (a + b) / 2.0;
    m.variance = at * (b * b + a * b + a * a) / 3.0 + at * at * (a - b) * (a - b) / 12.0;
    m.ratio = (4.0 * (b * b + a * b + a * a) + at * (b - a) * (b - a)) / (6.0 * (a + b));
    return m;
}

VarianceComparison matched_variance_comparison(double shape_rate, const UniformInverseScale& scale,
                                               const std::vector<double>& times) {
    const double a = scale.lower, b = scale.upper;
    detail::require(a > 0.0 && b >= a, "matched_variance_comparison", "requires 0 < a <= b");
    VarianceComparison out;
    out.times = times;
    const double theta = (a + b) / 2.0;  // 1/beta of the matched deterministic process
    for (double t : times) {
        const double at = shape_rate * t;
        const double vu = at * (b * b + a * b + a * a) / 3.0 + at * at * (a - b) * (a - b) / 12.0;
        const double vd = at * theta * theta;
        out.uniform_variance.push_back(vu);
        out.deterministic_variance.push_back(vd);
        const double slack = 1e-12 * std::max(1.0, std::abs(vd));
        if (vu < vd - slack) out.uniform_dominates = false;
        if (!(vu > vd)) out.strictly = false;
    }
    out.gamma_crossover = 2.0 * (b * b + a * b + a * a) / (3.0 * (a + b)) - 1.0;
    return out;
}

std::vector<std::pair<double, GammaLaw>> scale_components(const GammaModel& model, int nodes) {
    model.validate();
    if (const auto* d = std::get_if<DeterministicScale>(&model.scale))
        return {{1.0, GammaLaw{model.shape_rate, d->rate}}};
    const auto& u = std::get<UniformInverseScale>(model.scale);
    const GaussLegendre& rule = gauss_legendre(nodes);
    std::vector<std::pair<double, GammaLaw>> out;
    const double mid = 0.5 * (u.lower + u.upper);
    const double half = 0.5 * (u.upper - u.lower);
    for (int i = 0; i < rule.order(); ++i) {
        const double theta = mid + half * rule.nodes()[i];
        out.push_back({0.5 * rule.weights()[i], GammaLaw{model.shape_rate, 1.0 / theta}});
    }
    return out;
}

}  // namespace cbm
