#pragma once
// Gamma-process degradation: increments, first-passage laws, the gap between
// the M and L passages, and the uniform random-effects model on 1/beta.
// beta is a rate throughout: X(t) ~ Gamma(alpha*t, beta), mean alpha*t/beta.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "cbm/interpolation.hpp"
#include "cbm/quadrature.hpp"
#include "cbm/random.hpp"

namespace cbm {

struct DeterministicScale {
    double rate = 1.0;
};

//! 1/beta ~ Uniform(lower, upper).
struct UniformInverseScale {
    double lower = 0.5;
    double upper = 1.5;
};

struct GammaModel {
    double shape_rate = 1.0;
    std::variant<DeterministicScale, UniformInverseScale> scale = DeterministicScale{};

    static GammaModel deterministic(double alpha, double beta);
    static GammaModel uniform_inverse(double alpha, double a, double b);

    void validate() const;
    bool has_random_effect() const noexcept { return std::holds_alternative<UniformInverseScale>(scale); }
};

struct ScaleRealization {
    double rate = 1.0;
};

//! A gamma process with a concrete rate.
struct GammaLaw {
    double shape_rate = 1.0;
    double rate = 1.0;
    void validate() const;
};

ScaleRealization realize_scale(const GammaModel& model, Rng& rng);
//! Gamma(shape_rate*dt, rate) draw.
double sample_increment(ScaleRealization scale, double shape_rate, double dt, Rng& rng);

// -- first passage of a fixed level -----------------------------------------

//! P(sigma_L <= t) = Q(alpha*t, beta*L).
double hitting_cdf(const GammaLaw& law, double level, double t);
//! Central difference of hitting_cdf with h = max(1e-5, 1e-4 t).
double hitting_pdf(const GammaLaw& law, double level, double t);
//! Smallest t with hitting_cdf(t) >= p, to 1e-10 in probability.
double hitting_quantile(const GammaLaw& law, double level, double p);

//! Model-level first-passage CDF: the law itself, or its scale mixture.
double first_hitting_cdf(const GammaModel& model, double level, double t);
double first_hitting_pdf(const GammaModel& model, double level, double t);

// -- random effects ----------------------------------------------------------

double random_effect_pdf(double shape_rate, const UniformInverseScale& scale, double t, double u);
double random_effect_hitting_cdf(double shape_rate, const UniformInverseScale& scale, double level, double t);

struct RandomEffectMoments {
    double mean = 0.0;
    double variance = 0.0;
    double ratio = 0.0;  // variance / mean
};
RandomEffectMoments random_effect_moments(double shape_rate, const UniformInverseScale& scale, double t);

struct VarianceComparison {
    std::vector<double> times;
    std::vector<double> uniform_variance;
    std::vector<double> deterministic_variance;  // beta = 2 / (a + b)
    bool uniform_dominates = true;               // >= at every t
    bool strictly = true;                        // > at every t
    //! Crossover k1 of the gamma random-effect comparison.
    double gamma_crossover = 0.0;
};
VarianceComparison matched_variance_comparison(double shape_rate, const UniformInverseScale& scale,
                                               const std::vector<double>& times);

//! Gauss-Legendre nodes over (a, b) for 1/beta, as (weight, law) pairs whose
//! weights sum to 1. A deterministic model yields one component.
std::vector<std::pair<double, GammaLaw>> scale_components(const GammaModel& model, int nodes = 8);

// -- gap between the M and L passages ----------------------------------------

//! Survival of sigma_L - sigma_M for one gamma law. Construction tabulates
//! the law of the overshoot level Y = X(sigma_M); evaluation is then a single
//! integral. Immutable after construction and safe to share across threads.
class GapSurvival {
  public:
    GapSurvival(const GammaLaw& law, double preventive_level, double failure_level,
                const QuadratureSpec& spec = {}, int grid_points = 96);

    //! P(sigma_L - sigma_M > t); 1 at t = 0 by convention.
    double operator()(double t) const;
    //! Limit as t -> 0+: P(X(sigma_M) < L), the mass not absorbed by a single
    //! jump over both levels.
    double at_zero_plus() const noexcept { return overshoot_cdf(failure_level_); }
    //! P(X(sigma_M) <= y).
    double overshoot_cdf(double y) const;

    const GammaLaw& law() const noexcept { return law_; }
    double preventive_level() const noexcept { return m_; }
    double failure_level() const noexcept { return failure_level_; }

  private:
    double overshoot_tail_direct(double y) const;

    GammaLaw law_;
    double m_;
    double failure_level_;
    QuadratureSpec spec_;
    HermiteTable cdf_table_;
};

double delta_hitting_survival(const GammaLaw& law, double preventive_level, double failure_level, double t);

// -- observations and likelihood ---------------------------------------------

struct ProcessObservations {
    std::int64_t id = 0;
    std::vector<double> times;   // t_0 < ... < t_n, t_0 = 0 allowed
    std::vector<double> levels;  // x_0 <= ... <= x_n
};

struct DegradationObservations {
    std::vector<ProcessObservations> processes;
    //! Rejects non-increasing times, decreasing levels, and processes with
    //! fewer than two observations.
    void validate() const;
};

DegradationObservations read_observations_csv(std::istream& in);
DegradationObservations read_observations_csv(const std::string& path);
void write_observations_csv(std::ostream& out, const DegradationObservations& data);

//! Simulate m processes observed at 0, dt, ..., horizon, each with its own
//! scale realization.
DegradationObservations simulate_observations(const GammaModel& model, int processes, double horizon, double dt,
                                              Rng& rng);

//! Log-likelihood of (alpha, a, b) under the uniform random effect on 1/beta.
//! Zero increments are rejected.
double log_likelihood(double shape_rate, double a, double b, const DegradationObservations& data);

struct HalfWidthFit {
    double half_width = 0.0;
    double neg_log_likelihood = 0.0;
    std::vector<double> grid;
    std::vector<double> curve;  // negative log-likelihood per grid point
    bool interior_minimum = false;
};

//! Minimizes -log_likelihood(alpha, c - w, c + w) over the grid of w, then
//! refines by golden section between the grid neighbours of the minimum.
HalfWidthFit fit_half_width(double shape_rate, double center, const DegradationObservations& data,
                            const std::vector<double>& grid, bool refine = true);

}  // namespace cbm
