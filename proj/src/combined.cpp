#include "cbm/combined.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>

#include "cbm/errors.hpp"

namespace cbm {
namespace {

void check_t(const char* where, double t) {
    if (!(t >= 0.0) || !std::isfinite(t)) detail::fail_validation(where, "t must be finite and >= 0");
}

double cdf_at(const SystemSpec& spec, double threshold, double t) {
    return t <= 0.0 ? 0.0 : first_hitting_cdf(spec.growth, threshold, t);
}

// I(t) = integral over (0, t) of e^(-delta w) F(t - w) dw.
double kernel_integral_direct(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad) {
    if (t <= 0.0) return 0.0;
    const double delta = spec.arrivals.delta;
    auto integrand = [&](double w) { return std::exp(-delta * w) * cdf_at(spec, threshold, t - w); };
    return integrate(integrand, 0.0, t, quad, "kernel integral");
}

}  // namespace

void SystemSpec::validate() const {
    arrivals.validate();
    growth.validate();
    detail::require(failure_threshold > 0.0 && std::isfinite(failure_threshold), "SystemSpec",
                    "failure_threshold must be > 0");
}

double displaced_expected_intensity(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad) {
    spec.validate();
    check_t("displaced_expected_intensity", t);
    if (t == 0.0) return 0.0;
    return spec.arrivals.lambda0 * cdf_at(spec, threshold, t) +
           spec.arrivals.mu * kernel_integral_direct(spec, threshold, t, quad);
}

double expected_exceedances(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad) {
    spec.validate();
    check_t("expected_exceedances", t);
    if (t == 0.0) return 0.0;
    auto integrand = [&](double u) {
        return expected_intensity(spec.arrivals, u) * cdf_at(spec, threshold, t - u);
    };
    return integrate(integrand, 0.0, t, quad, "expected_exceedances");
}

SurvivalFactors survival_factors(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad) {
    spec.validate();
    check_t("first_passage_survival", t);
    SurvivalFactors out;
    if (t == 0.0) return out;
    const auto& p = spec.arrivals;
    if (p.lambda0 > 0.0) {
        auto f = [&](double u) { return cdf_at(spec, threshold, u); };
        out.c1 = std::exp(-p.lambda0 * integrate(f, 0.0, t, quad, "C1"));
    }
    if (p.mu > 0.0) {
        QuadratureSpec inner = quad;
        inner.abs_tol = quad.abs_tol * 1e-2;
        inner.rel_tol = quad.rel_tol * 1e-2;
        auto g = [&](double x) { return -std::expm1(-kernel_integral_direct(spec, threshold, x, inner)); };
        out.c2 = std::exp(-p.mu * integrate(g, 0.0, t, quad, "C2"));
    }
    return out;
}

double first_passage_survival(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad) {
    return survival_factors(spec, threshold, t, quad).survival();
}

double first_passage_hazard(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad) {
    spec.validate();
    check_t("first_passage_hazard", t);
    if (t == 0.0) return 0.0;
    const double i = kernel_integral_direct(spec, threshold, t, quad);
    return spec.arrivals.lambda0 * cdf_at(spec, threshold, t) - spec.arrivals.mu * std::expm1(-i);
}

double hazard_derivative(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad) {
    spec.validate();
    check_t("hazard_derivative", t);
    if (t == 0.0) return 0.0;
    const double f = first_hitting_pdf(spec.growth, threshold, t);
    const double big_f = cdf_at(spec, threshold, t);
    const double i = kernel_integral_direct(spec, threshold, t, quad);
    const double conv = std::max(0.0, big_f - spec.arrivals.delta * i);
    return spec.arrivals.lambda0 * f + spec.arrivals.mu * std::exp(-i) * conv;
}

double hazard_limit(const ShotNoiseParams& params) {
    params.validate();
    return params.lambda0 - params.mu * std::expm1(-1.0 / params.delta);
}

// -- tabulated curve ---------------------------------------------------------

FirstPassageCurve::FirstPassageCurve(const ShotNoiseParams& params, std::function<double(double)> cdf,
                                     double horizon, double step)
    : params_(params), cdf_fn_(std::move(cdf)), h_(step) {
    params_.validate();
    detail::require(step > 0.0 && horizon > 0.0, "FirstPassageCurve", "step and horizon must be > 0");
    t_.push_back(0.0);
    f_node_.push_back(0.0);
    extend_to(horizon);
}

FirstPassageCurve FirstPassageCurve::for_threshold(const SystemSpec& spec, double threshold, double horizon,
                                                   double step) {
    spec.validate();
    detail::require(threshold > 0.0, "FirstPassageCurve", "threshold must be > 0");
    if (!spec.growth.has_random_effect()) {
        const GammaLaw law{spec.growth.shape_rate, std::get<DeterministicScale>(spec.growth.scale).rate};
        return FirstPassageCurve(
            spec.arrivals, [law, threshold](double t) { return t <= 0.0 ? 0.0 : hitting_cdf(law, threshold, t); },
            horizon, step);
    }
    // Fixed Gauss-Legendre mixture over 1/beta; the integrand is smooth in
    // theta, so 16 nodes sit far below the RK4 error.
    auto components = scale_components(spec.growth, 16);
    return FirstPassageCurve(
        spec.arrivals,
        [components, threshold](double t) {
            if (t <= 0.0) return 0.0;
            double s = 0.0;
            for (const auto& [w, law] : components) s += w * hitting_cdf(law, threshold, t);
            return std::min(1.0, s);
        },
        horizon, step);
}

void FirstPassageCurve::push_node(double t, double f, double a, double i, double c) {
    const double di = f - params_.delta * i;
    const double dc = -std::expm1(-i);
    t_.push_back(t);
    f_node_.push_back(f);
    if (a_table_.empty() && t_.size() == 2) {
        // First step: build the tables from both knots at once.
        a_table_ = HermiteTable({t_[0], t}, {0.0, a}, {0.0, f});
        i_table_ = HermiteTable({t_[0], t}, {0.0, i}, {0.0, di});
        c_table_ = HermiteTable({t_[0], t}, {0.0, c}, {0.0, dc});
        return;
    }
    a_table_.push_back(t, a, f);
    i_table_.push_back(t, i, di);
    c_table_.push_back(t, c, dc);
}

void FirstPassageCurve::extend_to(double horizon) {
    const double delta = params_.delta;
    while (t_.back() < horizon) {
        const std::size_t k = t_.size() - 1;
        const double t0 = static_cast<double>(k) * h_;
        const double a = a_table_.empty() ? 0.0 : a_table_.values().back();
        const double i = i_table_.empty() ? 0.0 : i_table_.values().back();
        const double c = c_table_.empty() ? 0.0 : c_table_.values().back();
        const double f0 = f_node_.back();
        const double fm = cdf_fn_(t0 + 0.5 * h_);
        const double f1 = cdf_fn_(t0 + h_);
        if (!(fm >= 0.0 && f1 >= 0.0 && fm <= 1.0 + 1e-12 && f1 <= 1.0 + 1e-12))
            detail::fail_numerical("FirstPassageCurve", "passage CDF outside [0, 1]");
        f_half_.push_back(fm);

        const double k1i = f0 - delta * i, k1c = -std::expm1(-i);
        const double i2 = i + 0.5 * h_ * k1i;
        const double k2i = fm - delta * i2, k2c = -std::expm1(-i2);
        const double i3 = i + 0.5 * h_ * k2i;
        const double k3i = fm - delta * i3, k3c = -std::expm1(-i3);
        const double i4 = i + h_ * k3i;
        const double k4i = f1 - delta * i4, k4c = -std::expm1(-i4);

        const double a1 = a + h_ / 6.0 * (f0 + 4.0 * fm + f1);
        const double i1 = i + h_ / 6.0 * (k1i + 2.0 * k2i + 2.0 * k3i + k4i);
        const double c1 = c + h_ / 6.0 * (k1c + 2.0 * k2c + 2.0 * k3c + k4c);
        push_node(static_cast<double>(k + 1) * h_, f1, a1, i1, c1);
    }
}

void FirstPassageCurve::check(double t) const {
    if (!(t >= 0.0) || t > t_.back() * (1.0 + 1e-12))
        detail::fail_validation("FirstPassageCurve", "t = " + std::to_string(t) + " outside the tabulated range");
}

double FirstPassageCurve::cdf(double t) const {
    check(t);
    if (t <= 0.0) return 0.0;
    std::size_t k = static_cast<std::size_t>(t / h_);
    if (k >= f_half_.size()) k = f_half_.size() - 1;
    const double s = (t - static_cast<double>(k) * h_) / h_;  // in [0, 1]
    const double y0 = f_node_[k], ym = f_half_[k], y1 = f_node_[k + 1];
    // Lagrange quadratic through s = 0, 1/2, 1.
    const double v = y0 * (2 * s - 1) * (s - 1) + ym * 4 * s * (1 - s) + y1 * s * (2 * s - 1);
    return std::clamp(v, 0.0, 1.0);
}

double FirstPassageCurve::cumulative_cdf(double t) const {
    check(t);
    return std::max(0.0, a_table_(t));
}

double FirstPassageCurve::kernel_integral(double t) const {
    check(t);
    return std::max(0.0, i_table_(t));
}

double FirstPassageCurve::displaced_kernel(double t) const {
    return std::max(0.0, cdf(t) - params_.delta * kernel_integral(t));
}

double FirstPassageCurve::log_survival(double t) const {
    check(t);
    return -params_.lambda0 * a_table_(t) - params_.mu * c_table_(t);
}

double FirstPassageCurve::survival(double t) const { return std::exp(log_survival(t)); }

double FirstPassageCurve::hazard(double t) const {
    check(t);
    return params_.lambda0 * cdf(t) - params_.mu * std::expm1(-kernel_integral(t));
}

SurvivalFactors FirstPassageCurve::factors(double t) const {
    check(t);
    return {std::exp(-params_.lambda0 * a_table_(t)), std::exp(-params_.mu * c_table_(t))};
}

LifetimeCurve lifetime_curve(const SystemSpec& spec, double threshold, const std::vector<double>& times,
                             double step) {
    detail::require(!times.empty(), "lifetime_curve", "empty time grid");
    const double horizon = std::max(step, *std::max_element(times.begin(), times.end()));
    FirstPassageCurve curve = FirstPassageCurve::for_threshold(spec, threshold, horizon, step);
    LifetimeCurve out;
    out.times = times;
    for (double t : times) {
        out.survival.push_back(curve.survival(t));
        out.hazard.push_back(curve.hazard(t));
    }
    return out;
}

void write_lifetime_csv(std::ostream& out, const LifetimeCurve& curve) {
    out << "t,survival,hazard\n";
    char buf[128];
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.12g,%.12g,%.12g\n", curve.times[i], curve.survival[i], curve.hazard[i]);
        out << buf;
    }
}

std::optional<double> simulate_first_passage(const SystemSpec& spec, double threshold, double horizon, Rng& rng) {
    spec.validate();
    detail::require(horizon > 0.0, "simulate_first_passage", "horizon must be > 0");
    const ShockTrajectory shocks = simulate_shocks(spec.arrivals, horizon, rng);
    const ArrivalTrajectory arrivals = simulate_arrivals(spec.arrivals, shocks, horizon, rng);
    std::optional<double> best;
    for (double s : arrivals.arrival_times) {
        // Draws are consumed for every arrival so the stream layout does not
        // depend on earlier outcomes.
        const ScaleRealization scale = realize_scale(spec.growth, rng);
        const double p = rng.uniform_open();
        const double limit = best ? *best : horizon;
        if (s >= limit) continue;
        const GammaLaw law{spec.growth.shape_rate, scale.rate};
        if (p > hitting_cdf(law, threshold, limit - s)) continue;
        const double sigma = hitting_quantile(law, threshold, p);
        if (s + sigma <= limit) best = s + sigma;
    }
    return best;
}

}  // namespace cbm
