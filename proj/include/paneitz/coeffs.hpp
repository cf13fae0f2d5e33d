#pragma once

#include <cmath>
#include <optional>
#include <stdexcept>

namespace paneitz {

/// Coefficients of  Δ²u − αΔu + β(u − u^q) = 0, with the second-order
/// factorization  α = c + d,  β = c·d  when α² ≥ 4β.
struct PaneitzCoefficients {
    double alpha = 0.0;
    double beta = 0.0;
    double q = 2.0;
    double c_factor = 0.0;
    double d_factor = 0.0;
    bool factorizable = false;

    double discriminant() const { return alpha * alpha - 4.0 * beta; }
};

/// Builds (α, β, q) and fills the factorization when it exists.
/// Throws std::invalid_argument for α ≤ 0, β ≤ 0 or q ≤ 1.
PaneitzCoefficients make_coefficients(double alpha, double beta, double q);

/// Product of two Einstein manifolds M^n × X^m with Einstein constants Λ0, Λ1.
struct EinsteinProductDatum {
    int n = 3;
    int m = 3;
    double lambda0 = 1.0;
    double lambda1 = 1.0;

    int dimension() const { return n + m; }
    void validate() const;
};

template <typename Scalar>
Scalar product_q_curvature(int n, int m, Scalar lambda0, Scalar lambda1)
{
    const Scalar N = Scalar(n + m);
    const Scalar first = Scalar(-2) / ((N - 2) * (N - 2)) *
                         (Scalar(n) * lambda0 * lambda0 + Scalar(m) * lambda1 * lambda1);
    const Scalar trace = Scalar(n) * lambda0 + Scalar(m) * lambda1;
    const Scalar second = (N * N * N - 4 * N * N + 16 * N - 16) /
                          (8 * (N - 1) * (N - 1) * (N - 2) * (N - 2)) * trace * trace;
    return first + second;
}

template <typename Scalar>
Scalar product_alpha(int n, int m, Scalar lambda0, Scalar lambda1)
{
    const Scalar N = Scalar(n + m);
    return (N * N - 4 * N + 8) / (2 * (N - 1) * (N - 2)) *
               (Scalar(n) * lambda0 + Scalar(m) * lambda1) -
           Scalar(4) / (N - 2) * lambda0;
}

template <typename Scalar>
Scalar product_beta(int n, int m, Scalar lambda0, Scalar lambda1)
{
    const Scalar N = Scalar(n + m);
    return (N - 4) / 2 * product_q_curvature(n, m, lambda0, lambda1);
}

double q_curvature_product(const EinsteinProductDatum& d);

/// (N+4)/(N−4), the critical exponent in dimension N > 4.
double critical_exponent(int N);

/// Coefficients of the product problem. The factorization is left empty
/// (factorizable == false) when α² < 4β; β ≤ 0 throws.
PaneitzCoefficients product_coefficients(const EinsteinProductDatum& d, double q);

/// Closed forms for t ↦ α(Λ0,t)² − 4β(Λ0,t) at t = Λ0, checked against
/// direct evaluation of the polynomial and its Λ1-derivatives.
struct AppendixCertificate {
    double h0 = 0.0;          ///< value at Λ1 = Λ0
    double h0_prime = 0.0;    ///< Λ1-derivative at Λ1 = Λ0
    double quad_coeff = 0.0;  ///< leading coefficient (½ of the second derivative)
    double direct_h0 = 0.0;
    double direct_h0_prime = 0.0;
    double direct_quad_coeff = 0.0;
    double max_rel_mismatch = 0.0;
    bool all_positive = false;
};

AppendixCertificate appendix_certificate(int n, int m, double lambda0);

}  // namespace paneitz
