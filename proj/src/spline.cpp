#include "paneitz/spline.hpp"

#include <algorithm>
#include <stdexcept>

namespace paneitz {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y)
    : x_(std::move(x)), y_(std::move(y))
{
    const std::size_t n = x_.size();
    if (n < 3 || y_.size() != n) throw std::invalid_argument("spline needs >= 3 matching samples");
    for (std::size_t i = 1; i < n; ++i)
        if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("spline knots must increase strictly");

    // Tridiagonal system for interior second derivatives (natural ends).
    m_.assign(n, 0.0);
    std::vector<double> diag(n, 0.0), upper(n, 0.0), rhs(n, 0.0);
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double hl = x_[i] - x_[i - 1];
        const double hr = x_[i + 1] - x_[i];
        diag[i] = 2.0 * (hl + hr);
        upper[i] = hr;
        rhs[i] = 6.0 * ((y_[i + 1] - y_[i]) / hr - (y_[i] - y_[i - 1]) / hl);
    }
    // Forward elimination; the matrix is diagonally dominant.
    for (std::size_t i = 2; i + 1 < n; ++i) {
        const double lower = x_[i] - x_[i - 1];
        const double w = lower / diag[i - 1];
        diag[i] -= w * upper[i - 1];
        rhs[i] -= w * rhs[i - 1];
    }
    for (std::size_t i = n - 2; i >= 1; --i) {
        const double next = (i + 2 < n) ? m_[i + 1] : 0.0;
        m_[i] = (rhs[i] - upper[i] * next) / diag[i];
        if (i == 1) break;
    }

    cumulative_.assign(n, 0.0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double h = x_[i + 1] - x_[i];
        cumulative_[i + 1] = cumulative_[i] + 0.5 * h * (y_[i] + y_[i + 1]) -
                             h * h * h * (m_[i] + m_[i + 1]) / 24.0;
    }
}

std::size_t CubicSpline::piece(double t) const
{
    if (t <= x_.front()) return 0;
    if (t >= x_.back()) return x_.size() - 2;
    const auto it = std::upper_bound(x_.begin(), x_.end(), t);
    return std::size_t(it - x_.begin()) - 1;
}

// On piece i with u = t − x_i, h = x_{i+1} − x_i:
// s(t) = y_i + b u + (m_i/2) u² + (m_{i+1} − m_i)/(6h) u³
// with b = (y_{i+1} − y_i)/h − h(2m_i + m_{i+1})/6.

double CubicSpline::value(double t) const
{
    const std::size_t i = piece(t);
    const double h = x_[i + 1] - x_[i];
    const double u = t - x_[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2 * m_[i] + m_[i + 1]) / 6.0;
    const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
    return y_[i] + u * (b + u * (0.5 * m_[i] + u * d));
}

double CubicSpline::derivative(double t, int order) const
{
    const std::size_t i = piece(t);
    const double h = x_[i + 1] - x_[i];
    const double u = t - x_[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2 * m_[i] + m_[i + 1]) / 6.0;
    const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
    switch (order) {
    case 1: return b + u * (m_[i] + 3.0 * d * u);
    case 2: return m_[i] + 6.0 * d * u;
    case 3: return 6.0 * d;
    default: throw std::invalid_argument("spline derivative order must be 1..3");
    }
}

double CubicSpline::integral_from_start(double t) const
{
    const std::size_t i = piece(t);
    const double h = x_[i + 1] - x_[i];
    const double u = t - x_[i];
    const double b = (y_[i + 1] - y_[i]) / h - h * (2 * m_[i] + m_[i + 1]) / 6.0;
    const double d = (m_[i + 1] - m_[i]) / (6.0 * h);
    return cumulative_[i] + u * (y_[i] + u * (0.5 * b + u * (m_[i] / 6.0 + 0.25 * d * u)));
}

}  // namespace paneitz
