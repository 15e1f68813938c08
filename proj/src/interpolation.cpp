#include "cbm/interpolation.hpp"

#include <algorithm>
#include <cmath>

#include "cbm/errors.hpp"

namespace cbm {

HermiteTable::HermiteTable(std::vector<double> x, std::vector<double> y, std::vector<double> dy)
    : x_(std::move(x)), y_(std::move(y)), dy_(std::move(dy)) {
    detail::require(x_.size() >= 2 && x_.size() == y_.size() && y_.size() == dy_.size(), "HermiteTable",
                    "need at least two knots with matching sizes");
    for (std::size_t i = 1; i < x_.size(); ++i)
        detail::require(x_[i] > x_[i - 1], "HermiteTable", "abscissae must be strictly increasing");
    const double h = (x_.back() - x_.front()) / static_cast<double>(x_.size() - 1);
    uniform_ = true;
    for (std::size_t i = 1; i < x_.size() && uniform_; ++i)
        uniform_ = std::abs((x_[i] - x_[i - 1]) - h) <= 1e-9 * h;
}

void HermiteTable::push_back(double x, double y, double dy) {
    detail::require(x_.empty() || x > x_.back(), "HermiteTable::push_back", "knot must extend to the right");
    if (x_.size() >= 2 && uniform_) {
        const double h = x_[1] - x_[0];
        uniform_ = std::abs((x - x_.back()) - h) <= 1e-9 * h;
    }
    x_.push_back(x);
    y_.push_back(y);
    dy_.push_back(dy);
}

std::size_t HermiteTable::segment(double x) const {
    const std::size_t last = x_.size() - 2;
    if (uniform_) {
        const double h = x_[1] - x_[0];
        double pos = (x - x_[0]) / h;
        std::size_t i = pos <= 0.0 ? 0 : static_cast<std::size_t>(pos);
        if (i > last) i = last;
        // Guard the floor against representation error at knots.
        if (i < last && x >= x_[i + 1]) ++i;
        if (i > 0 && x < x_[i]) --i;
        return i;
    }
    auto it = std::upper_bound(x_.begin(), x_.end(), x);
    std::size_t i = it == x_.begin() ? 0 : static_cast<std::size_t>(it - x_.begin()) - 1;
    return std::min(i, last);
}

double HermiteTable::operator()(double x) const {
    if (x <= x_.front()) return y_.front();
    if (x >= x_.back()) return y_.back();
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s, s3 = s2 * s;
    return (2 * s3 - 3 * s2 + 1) * y_[i] + (s3 - 2 * s2 + s) * h * dy_[i] + (-2 * s3 + 3 * s2) * y_[i + 1] +
           (s3 - s2) * h * dy_[i + 1];
}

double HermiteTable::derivative(double x) const {
    if (x < x_.front() || x > x_.back()) return 0.0;
    const std::size_t i = segment(x);
    const double h = x_[i + 1] - x_[i];
    const double s = (x - x_[i]) / h;
    const double s2 = s * s;
    return ((6 * s2 - 6 * s) * y_[i] + (-6 * s2 + 6 * s) * y_[i + 1]) / h + (3 * s2 - 4 * s + 1) * dy_[i] +
           (3 * s2 - 2 * s) * dy_[i + 1];
}

HermiteTable make_pchip(std::vector<double> x, std::vector<double> y) {
    const std::size_t n = x.size();
    detail::require(n >= 2 && y.size() == n, "make_pchip", "need at least two points");
    std::vector<double> h(n - 1), delta(n - 1), d(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        delta[i] = (y[i + 1] - y[i]) / h[i];
    }
    if (n == 2) {
        d[0] = d[1] = delta[0];
        return HermiteTable(std::move(x), std::move(y), std::move(d));
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (delta[i - 1] * delta[i] <= 0.0) {
            d[i] = 0.0;
        } else {
            const double w1 = 2 * h[i] + h[i - 1];
            const double w2 = h[i] + 2 * h[i - 1];
            d[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
        }
    }
    auto end_slope = [](double h0, double h1, double d0, double d1) {
        double s = ((2 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
        if (s * d0 <= 0.0) return 0.0;
        if (d0 * d1 <= 0.0 && std::abs(s) > std::abs(3 * d0)) return 3 * d0;
        return s;
    };
    d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
    d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
    return HermiteTable(std::move(x), std::move(y), std::move(d));
}

}  // namespace cbm
