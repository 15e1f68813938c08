#include "cbm/shock_arrivals.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <ostream>
#include <span>
#include <string>

#include "cbm/errors.hpp"
#include "cbm/kernels.hpp"

namespace cbm {
namespace {

void validate_times(const char* where, double horizon, const std::vector<double>& times) {
    detail::require(horizon >= 0.0 && std::isfinite(horizon), where, "horizon must be finite and >= 0");
    for (std::size_t i = 0; i < times.size(); ++i) {
        detail::require(times[i] >= 0.0 && times[i] <= horizon, where, "time outside [0, horizon]");
        if (i > 0) detail::require(times[i] > times[i - 1], where, "times must be strictly increasing");
    }
}

double decayed_prefix(const std::vector<double>& shocks, double s, double delta) {
    const auto end = std::upper_bound(shocks.begin(), shocks.end(), s);
    const std::size_t n = static_cast<std::size_t>(end - shocks.begin());
    return kernels::decayed_sum(std::span<const double>(shocks.data(), n), s, delta);
}

// Guard on the thinning bound: intensity only decays between shocks, so the
// value at the last event dominates until the next shock.
void check_bound(double value, double bound) {
    if (value > bound * (1.0 + 1e-12) + 1e-300)
        detail::fail_numerical("thinning", "acceptance ratio exceeded 1 (bound " + std::to_string(bound) +
                                               ", intensity " + std::to_string(value) + ")");
}

}  // namespace

void ShotNoiseParams::validate() const {
    detail::require(lambda0 >= 0.0 && std::isfinite(lambda0), "ShotNoiseParams", "lambda0 must be >= 0");
    detail::require(mu >= 0.0 && std::isfinite(mu), "ShotNoiseParams", "mu must be >= 0");
    detail::require(delta > 0.0, "ShotNoiseParams", "delta must be > 0");
}

void ShockTrajectory::validate() const { validate_times("ShockTrajectory", horizon, shock_times); }
void ArrivalTrajectory::validate() const { validate_times("ArrivalTrajectory", horizon, arrival_times); }

std::size_t ArrivalTrajectory::count_until(double t) const {
    return static_cast<std::size_t>(std::upper_bound(arrival_times.begin(), arrival_times.end(), t) -
                                    arrival_times.begin());
}

double intensity_at(const ShotNoiseParams& params, const ShockTrajectory& shocks, double s) {
    if (!(s >= 0.0 && s <= shocks.horizon)) detail::fail_validation("intensity_at", "s outside [0, horizon]");
    return params.lambda0 + decayed_prefix(shocks.shock_times, s, params.delta);
}

double expected_intensity(const ShotNoiseParams& params, double s) {
    params.validate();
    detail::require(s >= 0.0, "expected_intensity", "s must be >= 0");
    return params.lambda0 - params.mu / params.delta * std::expm1(-params.delta * s);
}

double expected_num_arrivals(const ShotNoiseParams& params, double s) {
    params.validate();
    detail::require(s >= 0.0, "expected_num_arrivals", "s must be >= 0");
    const double d = params.delta;
    // mu s/delta + (mu/delta^2)(e^(-delta s) - 1), written to avoid cancellation
    // for small delta s.
    const double x = d * s;
    double shot;
    if (x < 1e-4)
        shot = params.mu * s * s * (0.5 - x / 6.0 + x * x / 24.0);
    else
        shot = params.mu / (d * d) * (x + std::expm1(-x));
    return params.lambda0 * s + shot;
}

ShockTrajectory simulate_shocks(const ShotNoiseParams& params, double horizon, Rng& rng) {
    params.validate();
    detail::require(horizon > 0.0, "simulate_shocks", "horizon must be > 0");
    ShockTrajectory out{horizon, {}};
    if (params.mu <= 0.0) return out;
    double t = 0.0;
    for (;;) {
        t += rng.exponential(params.mu);
        if (t > horizon) break;
        out.shock_times.push_back(t);
    }
    return out;
}

ArrivalTrajectory simulate_arrivals(const ShotNoiseParams& params, const ShockTrajectory& shocks, double horizon,
                                    Rng& rng) {
    params.validate();
    detail::require(horizon > 0.0, "simulate_arrivals", "horizon must be > 0");
    detail::require(shocks.horizon >= horizon, "simulate_arrivals", "shock trajectory shorter than horizon");
    ArrivalTrajectory out{horizon, {}};
    const auto& T = shocks.shock_times;
    std::size_t next = 0;  // first shock strictly after t
    double t = 0.0;
    while (next < T.size() && T[next] <= 0.0) ++next;
    for (;;) {
        const double bound = params.lambda0 + decayed_prefix(T, t, params.delta);
        const double next_shock = next < T.size() ? T[next] : std::numeric_limits<double>::infinity();
        const double candidate = bound > 0.0 ? t + rng.exponential(bound) : std::numeric_limits<double>::infinity();
        if (candidate >= next_shock && next_shock <= horizon) {
            t = next_shock;
            ++next;
            continue;
        }
        if (candidate > horizon) break;
        t = candidate;
        const double value = params.lambda0 + decayed_prefix(T, t, params.delta);
        check_bound(value, bound);
        if (rng.uniform() * bound < value) out.arrival_times.push_back(t);
    }
    return out;
}

CoxArrivalSampler::CoxArrivalSampler(const ShotNoiseParams& params)
    : params_(params), next_shock_(std::numeric_limits<double>::infinity()) {
    params_.validate();
}

double CoxArrivalSampler::intensity(double s) const {
    return params_.lambda0 + kernels::decayed_sum(shocks_, s, params_.delta);
}

void CoxArrivalSampler::advance(double until, Rng& rng, std::vector<double>& out) {
    if (!next_shock_drawn_) {
        next_shock_ = params_.mu > 0.0 ? rng.exponential(params_.mu) : std::numeric_limits<double>::infinity();
        next_shock_drawn_ = true;
    }
    while (now_ < until) {
        const double bound = intensity(now_);
        const double candidate =
            bound > 0.0 ? now_ + rng.exponential(bound) : std::numeric_limits<double>::infinity();
        if (candidate >= next_shock_ && next_shock_ <= until) {
            now_ = next_shock_;
            shocks_.push_back(now_);
            next_shock_ = now_ + rng.exponential(params_.mu);
            continue;
        }
        if (candidate > until) {
            // Memoryless restart: nothing is carried past `until`.
            now_ = until;
            break;
        }
        now_ = candidate;
        ++proposals_;
        const double value = intensity(now_);
        check_bound(value, bound);
        if (rng.uniform() * bound < value) {
            out.push_back(now_);
            ++accepted_;
        }
    }
}

void write_times_csv(std::ostream& out, const std::vector<double>& times) {
    out << "time\n";
    char buf[64];
    for (double t : times) {
        std::snprintf(buf, sizeof buf, "%.12g\n", t);
        out << buf;
    }
}

}  // namespace cbm
