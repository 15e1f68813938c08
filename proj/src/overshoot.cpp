// Law of the overshoot Y = X(sigma_M) and the survival of sigma_L - sigma_M.
//
// With U the potential measure of the gamma subordinator and alpha*E1(beta w)
// the Levy tail, P(Y > y) = integral over z in (0, M) of U(dz) alpha E1(beta(y - z)).
// Writing U(dz) = integral over x > 0 of P(X(x) in dz) dx and keeping x as the
// outer variable gives a smooth outer integrand. Given Y = y < L the
// remaining passage is a fresh first passage of L - y, so
//   P(sigma_L - sigma_M > t) = P(Y + X'(t) < L)
//                            = integral over r in (0, L - M) of f_{alpha t}(r) F_Y(L - r) dr.
#include <algorithm>
#include <cmath>

#include "cbm/degradation.hpp"
#include "cbm/errors.hpp"
#include "cbm/interpolation.hpp"
#include "cbm/special_functions.hpp"

namespace cbm {
namespace {

// Integral over r in (0, upper) of the Gamma(shape, rate) density times g(r).
// For shape < 1 the r^(shape-1) singularity is removed by w = r^shape.
template <class G>
double gamma_weighted_integral(double shape, double rate, double upper, G&& g, const QuadratureSpec& spec,
                               const char* where) {
    if (shape < 1.0) {
        const double log_c = shape * std::log(rate) - log_gamma(shape + 1.0);
        const double w_max = std::pow(upper, shape);
        auto integrand = [&](double w) {
            const double r = std::pow(w, 1.0 / shape);
            return std::exp(log_c - rate * r) * g(r);
        };
        return integrate(integrand, 0.0, w_max, spec, where);
    }
    auto integrand = [&](double r) {
        if (r <= 0.0) return shape == 1.0 ? rate * g(0.0) : 0.0;
        return std::exp(gamma_log_pdf(shape, rate, r)) * g(r);
    };
    return integrate(integrand, 0.0, upper, spec, where);
}

}  // namespace

GapSurvival::GapSurvival(const GammaLaw& law, double preventive_level, double failure_level,
                         const QuadratureSpec& spec, int grid_points)
    : law_(law), m_(preventive_level), failure_level_(failure_level), spec_(spec) {
    law_.validate();
    spec_.validate();
    detail::require(preventive_level > 0.0 && failure_level > preventive_level, "GapSurvival",
                    "requires 0 < M < L");
    detail::require(grid_points >= 8, "GapSurvival", "grid_points must be >= 8");
    // Quadratic clustering toward M, where the overshoot density has a
    // logarithmic singularity.
    const double span = failure_level_ - m_;
    std::vector<double> y(grid_points + 1), cdf(grid_points + 1);
    for (int k = 0; k <= grid_points; ++k) {
        const double s = static_cast<double>(k) / grid_points;
        y[k] = m_ + span * s * s;
    }
    cdf[0] = 0.0;
    for (int k = 1; k <= grid_points; ++k) cdf[k] = std::clamp(1.0 - overshoot_tail_direct(y[k]), 0.0, 1.0);
    for (int k = 1; k <= grid_points; ++k) cdf[k] = std::max(cdf[k], cdf[k - 1]);
    cdf_table_ = make_pchip(std::move(y), std::move(cdf));
}

double GapSurvival::overshoot_tail_direct(double y) const {
    const double alpha = law_.shape_rate, beta = law_.rate;
    const double m = m_;
    QuadratureSpec inner = spec_;
    inner.abs_tol = spec_.abs_tol * 1e-2;
    auto levy_tail = [&](double z) {
        const double gap = y - z;
        return gap > 0.0 ? alpha * exponential_integral_e1(beta * gap) : 0.0;
    };
    // E[alpha E1(beta (y - X(x))); X(x) < M] for X(x) ~ Gamma(alpha x, beta).
    auto outer = [&](double x) {
        const double shape = alpha * x;
        if (shape <= 0.0) return levy_tail(0.0);
        if (shape < 1e-12) return levy_tail(0.0) * regularized_lower_gamma(1e-12, beta * m);
        return gamma_weighted_integral(shape, beta, m, levy_tail, inner, "delta_hitting_survival: z axis");
    };
    const double width = std::max(0.5, beta * m / (2.0 * alpha));
    return integrate_to_infinity(outer, 0.0, spec_, width, "delta_hitting_survival: x axis");
}

double GapSurvival::overshoot_cdf(double y) const {
    if (y <= m_) return 0.0;
    if (y >= failure_level_) {
        if (y == failure_level_) return cdf_table_.values().back();
        return std::clamp(1.0 - overshoot_tail_direct(y), 0.0, 1.0);
    }
    return std::clamp(cdf_table_(y), 0.0, 1.0);
}

double GapSurvival::operator()(double t) const {
    if (!(t >= 0.0)) detail::fail_validation("delta_hitting_survival", "t must be >= 0");
    if (t == 0.0) return 1.0;
    const double span = failure_level_ - m_;
    auto g = [&](double r) { return overshoot_cdf(failure_level_ - r); };
    QuadratureSpec spec = spec_;
    spec.abs_tol = std::min(spec_.abs_tol, 1e-10);
    const double value =
        gamma_weighted_integral(law_.shape_rate * t, law_.rate, span, g, spec, "delta_hitting_survival: r axis");
    return std::clamp(value, 0.0, 1.0);
}

double delta_hitting_survival(const GammaLaw& law, double preventive_level, double failure_level, double t) {
    if (t == 0.0) return 1.0;
    return GapSurvival(law, preventive_level, failure_level)(t);
}

}  // namespace cbm
