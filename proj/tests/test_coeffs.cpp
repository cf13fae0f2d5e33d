#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <random>

#include "paneitz/coeffs.hpp"

using namespace paneitz;

namespace {

// Oracle: α, β written out independently of the library templates.
struct Direct {
    double alpha, beta;
};

Direct direct(int n, int m, double l0, double l1)
{
    const double N = n + m;
    const double A = (N * N - 4 * N + 8) / (2 * (N - 1) * (N - 2));
    const double Q = -2.0 / ((N - 2) * (N - 2)) * (n * l0 * l0 + m * l1 * l1) +
                     (N * N * N - 4 * N * N + 16 * N - 16) / (8 * (N - 1) * (N - 1) * (N - 2) * (N - 2)) *
                         std::pow(n * l0 + m * l1, 2);
    return {A * (n * l0 + m * l1) - 4.0 / (N - 2) * l0, 0.5 * (N - 4) * Q};
}

double disc(int n, int m, double l0, double l1)
{
    const auto d = direct(n, m, l0, l1);
    return d.alpha * d.alpha - 4 * d.beta;
}

double rel(double x, double y) { return std::abs(x - y) / std::max(1.0, std::abs(y)); }

}  // namespace

TEST_CASE("S3xS3 at Lambda0 = Lambda1 = 2")
{
    EinsteinProductDatum d{3, 3, 2.0, 2.0};
    // -(1/8)·24 + (152/3200)·144
    const double first = -0.125 * 24.0, second = 152.0 / 3200.0 * 144.0;
    CHECK(first == doctest::Approx(-3.0));
    CHECK(second == doctest::Approx(6.84));
    CHECK(q_curvature_product(d) == doctest::Approx(first + second).epsilon(1e-14));
    CHECK(q_curvature_product(d) == doctest::Approx(3.84).epsilon(1e-14));

    const auto c = product_coefficients(d, 5.0);
    CHECK(c.alpha == doctest::Approx(4.0).epsilon(1e-15));
    CHECK(c.beta == doctest::Approx(3.84).epsilon(1e-14));
    CHECK(c.discriminant() == doctest::Approx(0.64).epsilon(1e-12));
    CHECK(c.discriminant() > 0.0);
}

TEST_CASE("S3xS3 path Lambda1 = 2s")
{
    for (double s : {1.0, 2.0, 5.0}) {
        const auto c = product_coefficients({3, 3, 2.0, 2.0 * s}, 5.0);
        CHECK(c.alpha == 3 * s + 1);
        const double beta = -1.5 * (1 + s * s) + 1.71 * (1 + s) * (1 + s);
        CHECK(rel(c.beta, beta) <= 1e-12);
    }
}

TEST_CASE("Q is homogeneous of degree two")
{
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.1, 3.0);
    for (int k = 0; k < 50; ++k) {
        const EinsteinProductDatum d{3 + k % 5, 4 + k % 3, u(rng), u(rng)};
        const double lam = u(rng);
        const EinsteinProductDatum e{d.n, d.m, lam * d.lambda0, lam * d.lambda1};
        CHECK(rel(q_curvature_product(e), lam * lam * q_curvature_product(d)) <= 1e-12);
    }
}

TEST_CASE("critical exponent")
{
    CHECK(critical_exponent(6) == 5.0);
    CHECK(critical_exponent(8) == 3.0);
    CHECK_THROWS_AS(critical_exponent(4), std::invalid_argument);
}

TEST_CASE("make_coefficients factorization")
{
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    REQUIRE(c.factorizable);
    CHECK(c.c_factor + c.d_factor == doctest::Approx(4.0).epsilon(1e-14));
    CHECK(c.c_factor * c.d_factor == doctest::Approx(3.84).epsilon(1e-14));
    CHECK(c.c_factor == doctest::Approx(0.5 * (4.0 + 0.8)));
    CHECK(c.d_factor == doctest::Approx(1.6));

    const auto nf = make_coefficients(1.0, 1.0, 3.0);
    CHECK_FALSE(nf.factorizable);

    CHECK_THROWS_AS(make_coefficients(0.0, 1.0, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(make_coefficients(1.0, -1.0, 3.0), std::invalid_argument);
    CHECK_THROWS_AS(make_coefficients(1.0, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("random products keep alpha, beta and the discriminant positive")
{
    std::mt19937_64 rng(20240611);
    std::uniform_int_distribution<int> dim(3, 15);
    std::uniform_real_distribution<double> l0d(1e-6, 3.0), ratio(1.0, 5.0);
    for (int k = 0; k < 200; ++k) {
        const int n = dim(rng), m = dim(rng);
        const double l0 = l0d(rng), l1 = l0 * ratio(rng);
        const auto d = direct(n, m, l0, l1);
        CHECK(d.alpha > 0);
        CHECK(d.beta > 0);
        CHECK(d.alpha * d.alpha - 4 * d.beta > 0);

        const auto c = product_coefficients({n, m, l0, l1}, 2.0);
        CHECK(rel(c.alpha, d.alpha) <= 1e-12);
        CHECK(rel(c.beta, d.beta) <= 1e-12);
        REQUIRE(c.factorizable);
        CHECK(std::abs(c.c_factor + c.d_factor - c.alpha) <= 1e-12 * c.alpha);
        CHECK(std::abs(c.c_factor * c.d_factor - c.beta) <= 1e-12 * c.beta);
    }
}

TEST_CASE("appendix closed forms at N = 6")
{
    const auto cert = appendix_certificate(3, 3, 1.0);
    CHECK(cert.h0 == doctest::Approx((16.0 * 36 - 384 + 64) / 1600).epsilon(1e-14));
    CHECK(cert.h0 == doctest::Approx(0.16).epsilon(1e-14));
    CHECK(cert.h0_prime == doctest::Approx(3.0 * 576 / 800).epsilon(1e-14));
    CHECK(cert.h0_prime == doctest::Approx(2.16).epsilon(1e-14));
    CHECK(cert.quad_coeff == doctest::Approx(2.04).epsilon(1e-14));
    CHECK(cert.all_positive);

    // h0 scales with Λ0², h0' with Λ0
    const auto c2 = appendix_certificate(3, 3, 2.0);
    CHECK(c2.h0 == doctest::Approx(0.64).epsilon(1e-13));
    CHECK(c2.h0_prime == doctest::Approx(4.32).epsilon(1e-13));
}

TEST_CASE("appendix closed forms against finite differences")
{
    for (int n = 3; n <= 12; ++n)
        for (int m = 3; m <= 12; ++m) {
            const double N = n + m, l0 = 1.0;
            const double den = 4 * (N - 1) * (N - 1) * (N - 2) * (N - 2);
            const double h0 = l0 * l0 / den * (16 * N * N - 64 * N + 64);
            const double h1 = 2 * m * l0 / den * (8 * N * N * N - 40 * N * N + 48 * N);
            const double h2 = m / den * (16 * N * m + 16 * (N - 4) * (N - 1) * (N - 1));

            // quadratic in Λ1, so central differences with a moderate step are exact up to rounding
            const double dt = 1e-2;
            const double fm = disc(n, m, l0, l0 - dt), f0 = disc(n, m, l0, l0), fp = disc(n, m, l0, l0 + dt);
            CHECK(rel(f0, h0) <= 1e-7);
            CHECK(rel((fp - fm) / (2 * dt), h1) <= 1e-7);
            CHECK(rel((fp - 2 * f0 + fm) / (2 * dt * dt), h2) <= 1e-7);

            const auto cert = appendix_certificate(n, m, l0);
            CHECK(rel(cert.h0, h0) <= 1e-12);
            CHECK(rel(cert.h0_prime, h1) <= 1e-12);
            CHECK(rel(cert.quad_coeff, h2) <= 1e-12);
            CHECK(cert.max_rel_mismatch <= 1e-7);
        }
}
