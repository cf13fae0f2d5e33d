#pragma once

#include <array>
#include <cmath>

#include "paneitz/profile.hpp"

namespace paneitz {

inline double scalar_value(double x) { return x; }
template <typename AD>
auto scalar_value(const AD& x) -> decltype(x.value())
{
    return x.value();
}

/// sign(x)·|x|^q, the odd extension of x^q used for v0 < 0.
template <typename Scalar>
Scalar signed_power(const Scalar& x, double q)
{
    using std::pow;
    if (scalar_value(x) > 0) return pow(x, q);
    if (scalar_value(x) < 0) return -pow(-x, q);
    return x * 0.0;
}

/// Taylor coefficients at a singular endpoint of the regular solution with
/// v0(0) = a, v2(0) = b, v1(0) = v3(0) = 0, where h(τ) = j/τ + Σ r_m τ^m.
/// Orders 0..Order are filled by formal substitution into the first-order system.
template <typename Scalar, int Order = 4>
struct EndpointSeries {
    std::array<Scalar, Order + 1> v0{}, v1{}, v2{}, v3{};

    std::array<Scalar, 4> evaluate(double tau) const
    {
        std::array<Scalar, 4> out{v0[Order], v1[Order], v2[Order], v3[Order]};
        for (int k = Order - 1; k >= 0; --k) {
            out[0] = out[0] * tau + v0[k];
            out[1] = out[1] * tau + v1[k];
            out[2] = out[2] * tau + v2[k];
            out[3] = out[3] * tau + v3[k];
        }
        return out;
    }
};

template <int Order = 4, typename Scalar>
EndpointSeries<Scalar, Order> endpoint_series(const Scalar& a, const Scalar& b, const Scalar& alpha,
                                              const Scalar& beta, double q,
                                              const EndpointExpansion& h)
{
    EndpointSeries<Scalar, Order> s;
    std::array<Scalar, Order + 1> power{};  // coefficients of signed_power(v0)
    for (int k = 0; k <= Order; ++k) {
        s.v0[k] = a * 0.0;
        s.v1[k] = a * 0.0;
        s.v2[k] = a * 0.0;
        s.v3[k] = a * 0.0;
        power[k] = a * 0.0;
    }
    s.v0[0] = a;
    s.v2[0] = b;
    const bool zero_start = scalar_value(a) == 0.0;
    power[0] = signed_power(a, q);

    auto regular = [&](int m) { return m < int(h.regular.size()) ? h.regular[m] : 0.0; };

    for (int k = 0; k < Order; ++k) {
        if (k > 0 && !zero_start) {
            Scalar acc = a * 0.0;
            for (int i = 1; i <= k; ++i) acc += ((q + 1.0) * i - k) * s.v0[i] * power[k - i];
            power[k] = acc / (double(k) * a);
        }
        const Scalar forcing = beta * (power[k] - s.v0[k]);

        Scalar conv1 = a * 0.0, conv3 = a * 0.0;
        for (int m = 0; m <= k; ++m) {
            conv1 += regular(m) * s.v1[k - m];
            conv3 += regular(m) * s.v3[k - m];
        }
        const double denom = k + 1.0 + h.exponent;
        s.v1[k + 1] = (s.v2[k] - conv1) / denom;
        s.v3[k + 1] = (forcing - conv3) / denom;
        s.v0[k + 1] = s.v1[k] / double(k + 1);
        s.v2[k + 1] = (s.v3[k] + alpha * s.v1[k]) / double(k + 1);
    }
    return s;
}

}  // namespace paneitz
