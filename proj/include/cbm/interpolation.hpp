#pragma once
// Piecewise cubic interpolants over sorted abscissae.

#include <vector>

namespace cbm {

//! Cubic Hermite interpolation with caller-supplied slopes. Outside the
//! table the end values are held constant.
class HermiteTable {
  public:
    HermiteTable() = default;
    HermiteTable(std::vector<double> x, std::vector<double> y, std::vector<double> dy);

    double operator()(double x) const;
    //! Derivative of the interpolant.
    double derivative(double x) const;
    bool empty() const noexcept { return x_.empty(); }
    double front() const noexcept { return x_.front(); }
    double back() const noexcept { return x_.back(); }
    const std::vector<double>& abscissae() const noexcept { return x_; }
    const std::vector<double>& values() const noexcept { return y_; }

    //! Append a knot to the right end (x must exceed back()).
    void push_back(double x, double y, double dy);

  private:
    std::size_t segment(double x) const;
    bool uniform_ = false;
    std::vector<double> x_, y_, dy_;
};

//! Fritsch-Carlson monotone cubic (PCHIP) through (x, y).
HermiteTable make_pchip(std::vector<double> x, std::vector<double> y);

}  // namespace cbm
