#pragma once

#include <vector>

namespace paneitz {

/// Natural cubic spline through (x_i, y_i) with an exact antiderivative.
/// Outside [x_0, x_{n-1}] the end pieces are continued as polynomials.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double value(double t) const;
    double derivative(double t, int order) const;  ///< order 1..3
    /// ∫_{x_0}^{t} s(u) du
    double integral_from_start(double t) const;

    const std::vector<double>& knots() const { return x_; }
    const std::vector<double>& values() const { return y_; }

private:
    std::size_t piece(double t) const;

    std::vector<double> x_, y_;
    std::vector<double> m_;         // second derivatives at knots
    std::vector<double> cumulative_; // ∫_{x_0}^{x_i}
};

}  // namespace paneitz
