#include "cbm/quadrature.hpp"

#include <map>
#include <memory>
#include <mutex>
#include <numbers>

namespace cbm {

void QuadratureSpec::validate() const {
    detail::require(abs_tol > 0.0, "QuadratureSpec", "abs_tol must be > 0");
    detail::require(rel_tol > 0.0, "QuadratureSpec", "rel_tol must be > 0");
    detail::require(max_depth >= 1, "QuadratureSpec", "max_depth must be >= 1");
    detail::require(tail_epsilon > 0.0, "QuadratureSpec", "tail_epsilon must be > 0");
}

GaussLegendre::GaussLegendre(int n) {
    detail::require(n >= 2 && n <= 64, "GaussLegendre", "order must be in [2, 64]");
    nodes_.resize(n);
    weights_.resize(n);
    // Newton iteration on P_n from the Chebyshev-like initial guess.
    for (int i = 0; i < (n + 1) / 2; ++i) {
        double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= n; ++k) {
                double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = pk;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) < 1e-16) break;
        }
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
            double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
            p0 = p1;
            p1 = pk;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        double w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes_[i] = -x;
        nodes_[n - 1 - i] = x;
        weights_[i] = w;
        weights_[n - 1 - i] = w;
    }
    if (n % 2 == 1) nodes_[n / 2] = 0.0;
}

const GaussLegendre& gauss_legendre(int n) {
    static std::mutex lock;
    static std::map<int, std::unique_ptr<GaussLegendre>> cache;
    std::scoped_lock guard(lock);
    auto& slot = cache[n];
    if (!slot) slot = std::make_unique<GaussLegendre>(n);
    return *slot;
}

}  // namespace cbm
