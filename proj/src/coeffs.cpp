#include "paneitz/coeffs.hpp"

#include <algorithm>
#include <string>

namespace paneitz {

PaneitzCoefficients make_coefficients(double alpha, double beta, double q)
{
    if (!(alpha > 0.0) || !(beta > 0.0))
        throw std::invalid_argument("coefficients require alpha > 0 and beta > 0");
    if (!(q > 1.0)) throw std::invalid_argument("exponent q must exceed 1");
    PaneitzCoefficients pc;
    pc.alpha = alpha;
    pc.beta = beta;
    pc.q = q;
    const double disc = alpha * alpha - 4.0 * beta;
    if (disc >= 0.0) {
        const double root = std::sqrt(disc);
        pc.c_factor = 0.5 * (alpha + root);
        // d = β / c avoids the cancellation in (α − √disc)/2.
        pc.d_factor = beta / pc.c_factor;
        pc.factorizable = true;
    }
    return pc;
}

void EinsteinProductDatum::validate() const
{
    if (n < 3 || m < 3)
        throw std::invalid_argument("Einstein product needs n, m >= 3 (got n=" +
                                    std::to_string(n) + ", m=" + std::to_string(m) + ")");
    if (!(lambda0 > 0.0) || !(lambda1 > 0.0))
        throw std::invalid_argument("Einstein constants must be positive");
}

double q_curvature_product(const EinsteinProductDatum& d)
{
    d.validate();
    return product_q_curvature(d.n, d.m, d.lambda0, d.lambda1);
}

double critical_exponent(int N)
{
    if (N <= 4) throw std::invalid_argument("critical exponent needs N > 4");
    return double(N + 4) / double(N - 4);
}

PaneitzCoefficients product_coefficients(const EinsteinProductDatum& d, double q)
{
    d.validate();
    if (!(q > 1.0)) throw std::invalid_argument("exponent q must exceed 1");
    const double alpha = product_alpha(d.n, d.m, d.lambda0, d.lambda1);
    const double beta = product_beta(d.n, d.m, d.lambda0, d.lambda1);
    if (!(beta > 0.0)) throw std::domain_error("product beta is not positive");
    if (!(alpha > 0.0)) throw std::domain_error("product alpha is not positive");
    PaneitzCoefficients pc;
    pc.alpha = alpha;
    pc.beta = beta;
    pc.q = q;
    const double disc = alpha * alpha - 4.0 * beta;
    if (disc >= 0.0) {
        pc.c_factor = 0.5 * (alpha + std::sqrt(disc));
        pc.d_factor = beta / pc.c_factor;
        pc.factorizable = true;
    }
    return pc;
}

namespace {

double relative_gap(double x, double y)
{
    return std::abs(x - y) / std::max({std::abs(x), std::abs(y), 1e-300});
}

}  // namespace

AppendixCertificate appendix_certificate(int n, int m, double lambda0)
{
    if (n < 3 || m < 3) throw std::invalid_argument("appendix certificate needs n, m >= 3");
    if (!(lambda0 > 0.0)) throw std::invalid_argument("lambda0 must be positive");

    const double N = double(n + m);
    const double denom = (N - 1) * (N - 1) * (N - 2) * (N - 2);

    AppendixCertificate cert;
    cert.h0 = lambda0 * lambda0 * (16 * N * N - 64 * N + 64) / (4 * denom);
    cert.h0_prime = m * lambda0 * (8 * N * N * N - 40 * N * N + 48 * N) / (2 * denom);
    cert.quad_coeff = m * (16 * N * m + 16 * (N - 4) * (N - 1) * (N - 1)) / (4 * denom);

    // The discriminant is quadratic in Λ1, so three samples spaced by Λ0
    // determine its value and derivatives exactly.
    auto disc = [&](double t) {
        const double a = product_alpha(n, m, lambda0, t);
        const double b = product_beta(n, m, lambda0, t);
        return a * a - 4.0 * b;
    };
    const double step = lambda0;
    const double lo = disc(lambda0 - step);
    const double mid = disc(lambda0);
    const double hi = disc(lambda0 + step);
    cert.direct_h0 = mid;
    cert.direct_h0_prime = (hi - lo) / (2 * step);
    cert.direct_quad_coeff = (hi - 2 * mid + lo) / (2 * step * step);

    cert.max_rel_mismatch = std::max({relative_gap(cert.h0, cert.direct_h0),
                                      relative_gap(cert.h0_prime, cert.direct_h0_prime),
                                      relative_gap(cert.quad_coeff, cert.direct_quad_coeff)});
    cert.all_positive = cert.h0 > 0 && cert.h0_prime > 0 && cert.quad_coeff > 0;
    return cert;
}

}  // namespace paneitz
