#pragma once
// Adaptive Gauss-Kronrod (21-point) quadrature, semi-infinite truncation and
// a fixed composite Gauss-Legendre rule for smooth inner integrals.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <string>
#include <vector>

#include "cbm/errors.hpp"

namespace cbm {

struct QuadratureSpec {
    double abs_tol = 1e-9;
    double rel_tol = 1e-8;
    int max_depth = 50;  // bisection depth limit for any subinterval
    double tail_epsilon = 1e-12;

    void validate() const;
};

struct QuadratureResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = false;
    int evaluations = 0;
};

namespace detail {

struct Gk21 {
    static constexpr std::array<double, 11> xgk{
        0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
        0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
        0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
        0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
        0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
        0.0};
    static constexpr std::array<double, 11> wgk{
        0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
        0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
        0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
        0.123491976262065851077600525627764, 0.134709217311473325928054001771707,
        0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
        0.149445554002916905664936468389821};
    // Gauss weights for the odd-indexed Kronrod nodes.
    static constexpr std::array<double, 5> wg{
        0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
        0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
        0.295524224714752870173892994651338};
};

struct Panel {
    double a, b, value, error;
    int depth;
    bool operator<(const Panel& other) const { return error < other.error; }
};

template <class F>
Panel gk21(F& f, double a, double b, int depth) {
    const double center = 0.5 * (a + b);
    const double half = 0.5 * (b - a);
    const double fc = f(center);
    double kronrod = fc * Gk21::wgk[10];
    double gauss = 0.0;
    double abs_sum = std::abs(kronrod);
    std::array<double, 10> f1{}, f2{};
    for (int j = 0; j < 10; ++j) {
        const double dx = half * Gk21::xgk[j];
        f1[j] = f(center - dx);
        f2[j] = f(center + dx);
        const double pair = f1[j] + f2[j];
        kronrod += Gk21::wgk[j] * pair;
        abs_sum += Gk21::wgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
        if (j % 2 == 1) gauss += Gk21::wg[j / 2] * pair;
    }
    const double mean = 0.5 * kronrod;
    double asc = Gk21::wgk[10] * std::abs(fc - mean);
    for (int j = 0; j < 10; ++j) asc += Gk21::wgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));

    const double result = kronrod * half;
    double err = std::abs((kronrod - gauss) * half);
    asc *= std::abs(half);
    if (asc != 0.0 && err != 0.0) err = asc * std::min(1.0, std::pow(200.0 * err / asc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    const double resabs = abs_sum * std::abs(half);
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(50.0 * eps * resabs, err);
    return Panel{a, b, result, err, depth};
}

}  // namespace detail

//! Globally adaptive GK21 on a finite interval. Never throws on
//! non-convergence; inspect `converged`.
template <class F>
QuadratureResult integrate_result(F&& f, double a, double b, const QuadratureSpec& spec = {}) {
    QuadratureResult out;
    if (a == b) {
        out.converged = true;
        return out;
    }
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    std::priority_queue<detail::Panel> heap;
    detail::Panel first = detail::gk21(f, a, b, 0);
    out.evaluations = 21;
    double total = first.value;
    double total_err = first.error;
    heap.push(first);
    // Split the worst panel until the global error estimate is small enough.
    while (total_err > std::max(spec.abs_tol, spec.rel_tol * std::abs(total))) {
        detail::Panel worst = heap.top();
        if (worst.depth >= spec.max_depth || !std::isfinite(total)) {
            out.value = sign * total;
            out.error = total_err;
            out.converged = false;
            return out;
        }
        heap.pop();
        const double mid = 0.5 * (worst.a + worst.b);
        detail::Panel left = detail::gk21(f, worst.a, mid, worst.depth + 1);
        detail::Panel right = detail::gk21(f, mid, worst.b, worst.depth + 1);
        out.evaluations += 42;
        total += left.value + right.value - worst.value;
        total_err += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
    // Re-sum from the panels to drop accumulated update roundoff.
    double sum = 0.0;
    double err = 0.0;
    while (!heap.empty()) {
        sum += heap.top().value;
        err += heap.top().error;
        heap.pop();
    }
    out.value = sign * sum;
    out.error = err;
    out.converged = std::isfinite(sum);
    return out;
}

//! Throwing variant; `where` names the formula/axis in the error message.
template <class F>
double integrate(F&& f, double a, double b, const QuadratureSpec& spec = {}, const char* where = "integrate") {
    QuadratureResult r = integrate_result(f, a, b, spec);
    if (!r.converged)
        detail::fail_numerical(where, "quadrature did not converge on [" + std::to_string(a) + ", " +
                                          std::to_string(b) + "], error estimate " + std::to_string(r.error));
    return r.value;
}

//! Integral over [a, +inf). The range is walked in doubling panels and
//! truncated once |f| stays below tail_epsilon at three successive panel
//! ends and the last panel contributed less than abs_tol.
template <class F>
double integrate_to_infinity(F&& f, double a, const QuadratureSpec& spec = {}, double first_width = 1.0,
                             const char* where = "integrate_to_infinity") {
    double total = 0.0;
    double left = a;
    double width = first_width;
    int quiet = 0;
    for (int panel = 0; panel < 200; ++panel) {
        const double right = left + width;
        const double piece = integrate(f, left, right, spec, where);
        total += piece;
        const bool small_f = std::abs(f(right)) < spec.tail_epsilon;
        quiet = (small_f && std::abs(piece) <= spec.abs_tol) ? quiet + 1 : 0;
        if (quiet >= 3) return total;
        left = right;
        width *= 2.0;
        if (!std::isfinite(left)) break;
    }
    detail::fail_numerical(where, "integrand tail did not decay below tail_epsilon");
}

//! Composite Gauss-Legendre with `panels` equal panels of an n-point rule
//! (n in [2, 64]). Used for smooth inner integrals where adaptivity costs
//! more than it buys.
class GaussLegendre {
  public:
    explicit GaussLegendre(int n = 20);
    int order() const noexcept { return static_cast<int>(nodes_.size()); }
    const std::vector<double>& nodes() const noexcept { return nodes_; }
    const std::vector<double>& weights() const noexcept { return weights_; }

    template <class F>
    double integrate(F&& f, double a, double b, int panels = 1) const {
        const double h = (b - a) / panels;
        double total = 0.0;
        for (int p = 0; p < panels; ++p) {
            const double c = a + (p + 0.5) * h;
            double s = 0.0;
            for (std::size_t i = 0; i < nodes_.size(); ++i) s += weights_[i] * f(c + 0.5 * h * nodes_[i]);
            total += 0.5 * h * s;
        }
        return total;
    }

  private:
    std::vector<double> nodes_;
    std::vector<double> weights_;
};

//! Shared immutable rule of order n, built on first use.
const GaussLegendre& gauss_legendre(int n);

}  // namespace cbm
