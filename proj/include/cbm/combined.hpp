#pragma once
// Degradation processes that start at shot-noise Cox times and grow as gamma
// processes: threshold exceedances form a displaced Cox process, and the
// first exceedance of a level is the system lifetime (level L) or the first
// preventive signal (level M).

#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "cbm/degradation.hpp"
#include "cbm/interpolation.hpp"
#include "cbm/quadrature.hpp"
#include "cbm/random.hpp"
#include "cbm/shock_arrivals.hpp"

namespace cbm {

struct SystemSpec {
    ShotNoiseParams arrivals;
    GammaModel growth;
    double failure_threshold = 1.0;
    void validate() const;
};

//! E[lambda_threshold(t)] = lambda0 F(t) + mu I(t), where
//! I(t) = integral over (0, t) of e^(-delta w) F(t - w) dw. This equals the
//! convolution of H(u) = (1 - e^(-delta u))/delta with the passage density.
double displaced_expected_intensity(const SystemSpec& spec, double threshold, double t,
                                    const QuadratureSpec& quad = {});
//! E[N_threshold(t)] = integral over (0, t) of E[lambda*(u)] F(t - u) du.
double expected_exceedances(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad = {});

struct SurvivalFactors {
    double c1 = 1.0;  // baseline (Poisson) part
    double c2 = 1.0;  // shot-noise part
    double survival() const noexcept { return c1 * c2; }
};

//! Direct nested-quadrature evaluation at a single t.
SurvivalFactors survival_factors(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad = {});
double first_passage_survival(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad = {});
double first_passage_hazard(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad = {});
//! r'(t) = lambda0 f(t) + mu e^(-I(t)) * integral over (0, t) of e^(-delta w) f(t - w) dw.
//! The convolution is evaluated as F(t) - delta I(t) (integration by parts).
double hazard_derivative(const SystemSpec& spec, double threshold, double t, const QuadratureSpec& quad = {});
//! lambda0 + mu (1 - e^(-1/delta)).
double hazard_limit(const ShotNoiseParams& params);
inline double hazard_limit(const SystemSpec& spec) { return hazard_limit(spec.arrivals); }

//! Survival, hazard and the displaced-kernel integral on a uniform grid.
//! Integrates A' = F, I' = F - delta I, C' = 1 - e^(-I) by RK4 and
//! interpolates with cubic Hermite pieces. Extending is not thread safe;
//! everything else is const.
class FirstPassageCurve {
  public:
    FirstPassageCurve(const ShotNoiseParams& params, std::function<double(double)> cdf, double horizon,
                      double step = 0.01);
    static FirstPassageCurve for_threshold(const SystemSpec& spec, double threshold, double horizon,
                                           double step = 0.01);

    void extend_to(double horizon);
    double horizon() const noexcept { return t_.back(); }
    double step() const noexcept { return h_; }

    //! F_sigma(t), quadratic through the node and midpoint values.
    double cdf(double t) const;
    //! A(t), integral of F over (0, t).
    double cumulative_cdf(double t) const;
    double kernel_integral(double t) const;  // I(t)
    //! I'(t) = F(t) - delta I(t) = integral of e^(-delta w) f(t - w) dw.
    double displaced_kernel(double t) const;
    double survival(double t) const;
    double log_survival(double t) const;
    double hazard(double t) const;
    double density(double t) const { return hazard(t) * survival(t); }
    SurvivalFactors factors(double t) const;

  private:
    void check(double t) const;
    void push_node(double t, double f, double a, double i, double c);

    ShotNoiseParams params_;
    std::function<double(double)> cdf_fn_;
    double h_;
    std::vector<double> t_;
    std::vector<double> f_node_, f_half_;  // F at t_k and t_k + h/2
    HermiteTable a_table_, i_table_, c_table_;
};

struct LifetimeCurve {
    std::vector<double> times;
    std::vector<double> survival;
    std::vector<double> hazard;
};

LifetimeCurve lifetime_curve(const SystemSpec& spec, double threshold, const std::vector<double>& times,
                             double step = 0.01);
void write_lifetime_csv(std::ostream& out, const LifetimeCurve& curve);

//! First exceedance time of `threshold` over all processes started in
//! [0, horizon], by inverse-transform sampling of each passage time; empty
//! when censored at `horizon`.
std::optional<double> simulate_first_passage(const SystemSpec& spec, double threshold, double horizon, Rng& rng);

}  // namespace cbm
