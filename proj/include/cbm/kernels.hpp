#pragma once
// Data-parallel inner loops with a scalar reference implementation and an
// AVX2 variant picked at runtime. Every backend computes the same quantity;
// the AVX2 decayed_sum uses its own exp() and a different summation order, so
// results agree with the scalar reference to a few ulps rather than bitwise.

#include <cstddef>
#include <span>
#include <string_view>

namespace cbm::kernels {

enum class Backend { scalar, avx2 };

//! Backend currently used by the dispatching entry points.
Backend active_backend() noexcept;
//! True when the backend was compiled in and the CPU supports it.
bool backend_available(Backend backend) noexcept;
//! Pin the dispatch to a backend (tests, benchmarking). Not thread safe with
//! concurrent kernel calls; call before spawning workers.
void force_backend(Backend backend);
//! Undo force_backend and return to automatic detection.
void reset_backend() noexcept;
std::string_view backend_name(Backend backend) noexcept;

//! Sum of exp(-rate * (s - t)) over all t in `times`. Callers pass only
//! times t <= s.
double decayed_sum(std::span<const double> times, double s, double rate) noexcept;

//! levels[i] += increments[i]; returns the largest updated level, or
//! -infinity when the span is empty. Sizes must match.
double add_and_max(std::span<double> levels, std::span<const double> increments) noexcept;

//! Number of values >= threshold.
std::size_t count_at_or_above(std::span<const double> values, double threshold) noexcept;

namespace scalar {
double decayed_sum(std::span<const double> times, double s, double rate) noexcept;
double add_and_max(std::span<double> levels, std::span<const double> increments) noexcept;
std::size_t count_at_or_above(std::span<const double> values, double threshold) noexcept;
}  // namespace scalar

namespace avx2 {
double decayed_sum(std::span<const double> times, double s, double rate) noexcept;
double add_and_max(std::span<double> levels, std::span<const double> increments) noexcept;
std::size_t count_at_or_above(std::span<const double> values, double threshold) noexcept;
}  // namespace avx2

}  // namespace cbm::kernels
