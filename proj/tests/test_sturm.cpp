#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>

#include "paneitz/sturm.hpp"

using namespace paneitz;

namespace {

double rel(double x, double y) { return std::abs(x - y) / std::abs(y); }

}  // namespace

TEST_CASE("S3 k=1 at gridsize 2000")
{
    const auto s = spectrum(Profile::sphere(3, 1), 5, 2000);
    CHECK(rel(s.eigenvalues[1], -3.0) <= 1e-4);
    const double expect[] = {0, -3, -8, -15, -24, -35};
    for (int i = 1; i <= 5; ++i) CHECK(rel(s.extrapolated[i], expect[i]) <= 1e-8);
    CHECK(std::abs(s.eigenvalues[0]) <= 1e-8);
    CHECK(s.endpoint_values[1] > 0);
}

TEST_CASE("S3 k=2")
{
    const auto s = spectrum(Profile::sphere(3, 2), 3, 4000);
    for (int i = 1; i <= 3; ++i) CHECK(rel(s.eigenvalues[i], -2.0 * i * (2.0 * i + 2.0)) <= 1e-4);
    CHECK(s.eigenvalues[1] == doctest::Approx(-8).epsilon(1e-4));
    CHECK(s.eigenvalues[2] == doctest::Approx(-24).epsilon(1e-4));
    CHECK(s.eigenvalues[3] == doctest::Approx(-48).epsilon(1e-4));
}

TEST_CASE("S^n k=1 spherical harmonics")
{
    for (int n : {2, 4, 5}) {
        const auto s = spectrum(Profile::sphere(n, 1), 4, 4000);
        for (int i = 1; i <= 4; ++i) CHECK(rel(s.eigenvalues[i], -double(i) * (i + n - 1)) <= 1e-4);
    }
}

TEST_CASE("constants are in the kernel")
{
    const auto op = assemble_operator(Profile::sphere(3, 1), 500);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(op.size());
    CHECK(op.apply(ones).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("pencil is symmetric")
{
    const auto op = assemble_operator(Profile::sphere(3, 2, 0.7), 300);
    std::mt19937_64 rng(3);
    std::normal_distribution<double> g;
    Eigen::VectorXd v(op.size()), w(op.size());
    for (Eigen::Index k = 0; k < op.size(); ++k) {
        v[k] = g(rng);
        w[k] = g(rng);
    }
    const double a = w.dot(op.apply(v)), b = v.dot(op.apply(w));
    CHECK(std::abs(a - b) <= 1e-12 * std::max(1.0, std::abs(a)));
    CHECK((op.mass.array() > 0).all());
}

TEST_CASE("second-order mesh convergence")
{
    const auto p = Profile::sphere(3, 1);
    double prev = 0.0;
    for (int n : {250, 500, 1000}) {
        const auto s = spectrum(p, 2, n);
        const double err = std::abs(s.eigenvalues[2] + 8.0);
        if (prev > 0) {
            const double ratio = prev / err;
            CHECK(ratio > 3.5);
            CHECK(ratio < 4.5);
        }
        prev = err;
    }
}

TEST_CASE("zero-count ladder on the builtin profiles")
{
    for (const auto& p : {Profile::sphere(3, 1), Profile::sphere(3, 2), Profile::sphere(2, 1),
                          Profile::sphere(5, 1), Profile::sphere(4, 3), Profile::sphere(3, 2, 1.0)}) {
        const auto s = spectrum(p, 5, 1000);
        INFO(p.describe());
        for (int i = 0; i <= 5; ++i) CHECK(s.interior_zero_counts[i] == i);
    }
}

TEST_CASE("Rayleigh quotients")
{
    const auto p = Profile::sphere(3, 1);
    const int n = 1000;
    const auto s = spectrum(p, 4, n);
    const auto op = assemble_operator(p, n);
    for (int i = 0; i <= 4; ++i) {
        const Eigen::VectorXd phi = s.eigenfunctions.col(i);
        const double lhs = phi.dot(op.apply(phi));
        const double rhs = s.eigenvalues[i] * phi.dot(op.mass.cwiseProduct(phi));
        CHECK(std::abs(lhs - rhs) <= 1e-8);
        CHECK(s.weighted_inner(phi, phi) == doctest::Approx(1.0).epsilon(1e-10));
    }
    CHECK(std::abs(s.weighted_inner(s.eigenfunctions.col(1), s.eigenfunctions.col(2))) <= 1e-10);
}

TEST_CASE("bisection eigenvalues against a dense solver")
{
    std::mt19937_64 rng(11);
    std::uniform_real_distribution<double> u(-2, 2);
    const int n = 40;
    Eigen::VectorXd d(n), e(n - 1);
    for (int k = 0; k < n; ++k) d[k] = u(rng);
    for (int k = 0; k < n - 1; ++k) e[k] = u(rng);
    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(n, n);
    T.diagonal() = d;
    T.diagonal(1) = e;
    T.diagonal(-1) = e;
    const Eigen::VectorXd ref = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(T).eigenvalues();
    const auto top = tridiagonal_top_eigenvalues(d, e, 6);
    REQUIRE(top.size() == 6);
    for (int k = 0; k < 6; ++k) CHECK(top[k] == doctest::Approx(ref[n - 1 - k]).epsilon(1e-12));
}

TEST_CASE("fourth-order eigenvalue")
{
    const auto s = spectrum(Profile::sphere(3, 1), 3, 4000);
    const auto c = make_coefficients(4.0, 1.0, 3.0);
    CHECK(fourth_order_eigenvalue(s, 0, c) == doctest::Approx(0.0));
    CHECK(fourth_order_eigenvalue(s, 1, c) == doctest::Approx(9.0 + 12.0).epsilon(1e-5));
    CHECK(fourth_order_eigenvalue(s, 2, c) == doctest::Approx(64.0 + 32.0).epsilon(1e-5));
}

TEST_CASE("sign changes")
{
    Eigen::VectorXd f(6);
    f << 1, 1e-12, -1, -2, 3, 0;
    CHECK(count_sign_changes(f) == 2);
    CHECK(count_sign_changes(Eigen::VectorXd::Ones(5)) == 0);
}

TEST_CASE("invariant bilaplacian gap is the square of lambda_1")
{
    const auto s = spectrum(Profile::sphere(3, 1), 2, 2000);
    CHECK(s.invariant_bilaplacian_gap() == doctest::Approx(9.0).epsilon(1e-5));
}

TEST_CASE("count bound")
{
    CHECK_THROWS(spectrum(Profile::sphere(3, 1), 20, 100));
}
