#pragma once
// Shot-noise Cox process: shocks arrive as Poisson(mu); degradation processes
// start with intensity lambda0 + sum over shocks T_i <= s of exp(-delta (s - T_i)).

#include <cstddef>
#include <iosfwd>
#include <vector>

#include "cbm/random.hpp"

namespace cbm {

struct ShotNoiseParams {
    double lambda0 = 1.0;
    double mu = 0.0;
    double delta = 1.0;
    void validate() const;
};

struct ShockTrajectory {
    double horizon = 0.0;
    std::vector<double> shock_times;
    void validate() const;
};

struct ArrivalTrajectory {
    double horizon = 0.0;
    std::vector<double> arrival_times;
    void validate() const;
    //! N*(t): number of arrivals in [0, t].
    std::size_t count_until(double t) const;
};

//! lambda*(s) given the shock history; right-continuous at shock times.
double intensity_at(const ShotNoiseParams& params, const ShockTrajectory& shocks, double s);
//! E[lambda*(s)] = lambda0 + (mu/delta)(1 - e^(-delta s)).
double expected_intensity(const ShotNoiseParams& params, double s);
//! E[N*(s)] = lambda0 s + mu s/delta + (mu/delta^2)(e^(-delta s) - 1).
double expected_num_arrivals(const ShotNoiseParams& params, double s);

ShockTrajectory simulate_shocks(const ShotNoiseParams& params, double horizon, Rng& rng);
//! Ogata thinning conditional on the shocks.
ArrivalTrajectory simulate_arrivals(const ShotNoiseParams& params, const ShockTrajectory& shocks, double horizon,
                                    Rng& rng);

//! Incremental sampler that draws shocks lazily and emits arrivals interval
//! by interval, so a simulation can stop as soon as it has seen enough.
class CoxArrivalSampler {
  public:
    explicit CoxArrivalSampler(const ShotNoiseParams& params);

    //! Emits arrivals in (time(), until] into `out` (appended, sorted).
    void advance(double until, Rng& rng, std::vector<double>& out);
    double time() const noexcept { return now_; }
    const std::vector<double>& shocks() const noexcept { return shocks_; }
    //! Proposals drawn and accepted so far (thinning diagnostics).
    std::size_t proposals() const noexcept { return proposals_; }
    std::size_t accepted() const noexcept { return accepted_; }

  private:
    double intensity(double s) const;

    ShotNoiseParams params_;
    std::vector<double> shocks_;
    double now_ = 0.0;
    double next_shock_;
    bool next_shock_drawn_ = false;
    std::size_t proposals_ = 0;
    std::size_t accepted_ = 0;
};

void write_times_csv(std::ostream& out, const std::vector<double>& times);

}  // namespace cbm
