#pragma once
// xoshiro256** streams seeded through SplitMix64, plus the handful of
// samplers the simulators need. The samplers are written out rather than
// taken from <random> so that a given seed produces the same numbers on
// every standard library.

#include <cstdint>
#include <initializer_list>

namespace cbm {

//! SplitMix64 finalizer; a bijective 64-bit mix.
std::uint64_t mix64(std::uint64_t x) noexcept;

//! Seed for a named substream: folds each key into the master seed.
std::uint64_t derive_seed(std::uint64_t master, std::initializer_list<std::uint64_t> keys) noexcept;

class Rng {
  public:
    using result_type = std::uint64_t;

    explicit Rng(std::uint64_t seed) noexcept;

    static constexpr result_type min() noexcept { return 0; }
    static constexpr result_type max() noexcept { return ~result_type{0}; }
    result_type operator()() noexcept { return next(); }
    std::uint64_t next() noexcept;

    //! Uniform on [0, 1) with 53 random bits.
    double uniform() noexcept;
    //! Uniform on (0, 1); safe to take logs of.
    double uniform_open() noexcept;
    double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
    double exponential(double rate) noexcept;
    double normal() noexcept;
    //! Gamma(shape, rate) by Marsaglia-Tsang; shape < 1 via the u^(1/shape)
    //! boost done in log space so tiny shapes do not underflow to 0 early.
    double gamma(double shape, double rate) noexcept;
    //! ln of a Gamma(shape, 1) draw; exact for shapes far below 1.
    double log_gamma_variate(double shape) noexcept;
    //! Beta(a, b) via two gamma variates combined in log space.
    double beta(double a, double b) noexcept;

  private:
    std::uint64_t s_[4];
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace cbm
