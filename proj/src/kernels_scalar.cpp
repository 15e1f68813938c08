#include <cmath>
#include <limits>

#include "cbm/kernels.hpp"

namespace cbm::kernels::scalar {

double decayed_sum(std::span<const double> times, double s, double rate) noexcept {
    double total = 0.0;
    for (double t : times) total += std::exp(-rate * (s - t));
    return total;
}

double add_and_max(std::span<double> levels, std::span<const double> increments) noexcept {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < levels.size(); ++i) {
        levels[i] += increments[i];
        if (levels[i] > best) best = levels[i];
    }
    return best;
}

std::size_t count_at_or_above(std::span<const double> values, double threshold) noexcept {
    std::size_t n = 0;
    for (double v : values) n += (v >= threshold) ? 1 : 0;
    return n;
}

}  // namespace cbm::kernels::scalar
