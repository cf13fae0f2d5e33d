#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "paneitz/profile.hpp"

using namespace paneitz;

namespace {

const double pi = std::acos(-1.0);

// adaptive Simpson, independent of the library's closed forms
double simpson(const std::function<double(double)>& f, double a, double b, double fa, double fm,
               double fb, double whole, double tol, int depth)
{
    const double m = 0.5 * (a + b), lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6 * (fa + 4 * flm + fm), right = (b - m) / 6 * (fm + 4 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) <= 15 * tol)
        return left + right + (left + right - whole) / 15;
    return simpson(f, a, m, fa, flm, fm, left, tol / 2, depth - 1) +
           simpson(f, m, b, fm, frm, fb, right, tol / 2, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol = 1e-13)
{
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    return simpson(f, a, b, fa, fm, fb, (b - a) / 6 * (fa + 4 * fm + fb), tol, 50);
}

std::vector<Profile> builtin()
{
    return {Profile::sphere(3, 1), Profile::sphere(3, 2), Profile::sphere(2, 1),
            Profile::sphere(5, 1), Profile::sphere(4, 3), Profile::sphere(3, 2, 1.0)};
}

}  // namespace

TEST_CASE("S3 k=1 geometry")
{
    const auto p = Profile::sphere(3, 1);
    CHECK(p.length() == doctest::Approx(pi).epsilon(1e-15));
    CHECK(p.j0() == 2.0);
    CHECK(p.j1() == 2.0);
    for (double t : {0.3, 1.0, 2.0, 2.9}) CHECK(p.h(t) == doctest::Approx(2 * std::cos(t) / std::sin(t)));
    CHECK(p.antisymmetric());
}

TEST_CASE("S3 k=2 geometry")
{
    const auto p = Profile::sphere(3, 2);
    CHECK(p.length() == doctest::Approx(pi / 2).epsilon(1e-15));
    CHECK(p.j0() == 1.0);
    CHECK(p.j1() == 1.0);
    for (double t : {0.2, 0.7, 1.3}) CHECK(p.h(t) == doctest::Approx(2 * std::cos(2 * t) / std::sin(2 * t)));
}

TEST_CASE("midpoint of S2 k=1")
{
    CHECK(std::abs(Profile::sphere(2, 1).h(pi / 2)) <= 1e-15);
}

TEST_CASE("weight H")
{
    const auto p = Profile::sphere(3, 1);
    CHECK(weight_H(p, pi / 2) == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(weight_H(p, 0.0) == 0.0);
    CHECK(weight_H(p, pi) == 0.0);
    CHECK(weight_H(p, pi / 4) == doctest::Approx(0.5).epsilon(1e-14));
    CHECK_THROWS_AS(weight_H(p, -0.1), std::out_of_range);
    CHECK_THROWS_AS(weight_H(p, pi + 0.1), std::out_of_range);
}

TEST_CASE("H agrees with quadrature of h")
{
    for (const auto& p : builtin()) {
        const double D = p.length();
        double worst = 0.0;
        for (int k = 1; k <= 100; ++k) {
            const double t = D * (0.02 + 0.96 * (k - 0.5) / 100);
            const double logH = integrate([&](double x) { return p.h(x); }, D / 2, t);
            worst = std::max(worst, std::abs(p.weight(t) - std::exp(logH)));
        }
        INFO(p.describe());
        CHECK(worst <= 1e-10);
    }
}

TEST_CASE("antisymmetry flag")
{
    CHECK(check_antisymmetry(Profile::sphere(3, 1), 200, 1e-12));
    CHECK(check_antisymmetry(Profile::sphere(3, 2), 200, 1e-12));
    CHECK_FALSE(check_antisymmetry(Profile::sphere(3, 2, 1.0), 200, 1e-12));
    CHECK_FALSE(Profile::sphere(3, 2, 1.0).antisymmetric());
    CHECK_THROWS_AS(Profile::sphere(3, 2, 1.0, true), std::invalid_argument);
}

TEST_CASE("derivatives match central differences")
{
    for (const auto& p : builtin()) {
        const double D = p.length();
        for (int k = 1; k < 20; ++k) {
            const double t = D * (0.1 + 0.8 * k / 20), d = 1e-5 * D;
            const double fd1 = (p.h(t + d) - p.h(t - d)) / (2 * d);
            const double fd2 = (p.dh(t + d) - p.dh(t - d)) / (2 * d);
            INFO(p.describe(), " t = ", t);
            CHECK(std::abs(p.dh(t) - fd1) <= 1e-6 * std::max(1.0, std::abs(fd1)));
            CHECK(std::abs(p.d2h(t) - fd2) <= 1e-6 * std::max(1.0, std::abs(fd2)));
        }
    }
}

TEST_CASE("endpoint exponents, first-order convergence")
{
    for (const auto& p : builtin()) {
        const double D = p.length();
        double prev0 = 0, prev1 = 0;
        for (double eps : {1e-2, 1e-3, 1e-4}) {
            const double e0 = std::abs(eps * p.h(eps) - p.j0());
            const double e1 = std::abs(eps * p.h(D - eps) + p.j1());
            INFO(p.describe(), " eps = ", eps);
            CHECK(e0 <= 2.0 * eps * std::max(1.0, std::abs(p.start_expansion().regular[0])) + 1e-12);
            if (prev0 > 1e-12) CHECK(e0 <= 0.2 * prev0);
            if (prev1 > 1e-12) CHECK(e1 <= 0.2 * prev1);
            prev0 = e0;
            prev1 = e1;
        }
    }
}

TEST_CASE("mirrored profile")
{
    const auto p = Profile::sphere(3, 2, 0.5);
    const auto m = p.mirrored();
    CHECK(m.j0() == p.j1());
    CHECK(m.j1() == p.j0());
    for (double t : {0.1, 0.4, 1.2}) {
        CHECK(m.h(t) == doctest::Approx(-p.h(p.length() - t)).epsilon(1e-13));
        CHECK(m.weight(t) == doctest::Approx(p.weight(p.length() - t)).epsilon(1e-12));
    }
}

TEST_CASE("tabulated profile reproduces the sphere")
{
    const auto s = Profile::sphere(3, 1);
    std::vector<double> t, h;
    for (int k = 1; k < 400; ++k) {
        t.push_back(pi * k / 400);
        h.push_back(s.h(t.back()));
    }
    const auto p = Profile::tabulated(pi, 2.0, 2.0, t, h);
    CHECK(p.kind() == Profile::Kind::tabulated);
    CHECK(p.antisymmetric());
    double worst = 0.0, worstH = 0.0;
    for (int k = 1; k < 100; ++k) {
        const double x = pi * (0.05 + 0.9 * k / 100);
        worst = std::max(worst, std::abs(p.h(x) - s.h(x)));
        worstH = std::max(worstH, std::abs(p.weight(x) - s.weight(x)));
    }
    CHECK(worst <= 1e-6);
    CHECK(worstH <= 1e-6);

    const auto back = profile_from_json(to_json(p));
    CHECK(back.h(1.0) == doctest::Approx(p.h(1.0)).epsilon(1e-14));
}

TEST_CASE("json round trip of sphere profiles")
{
    const auto p = Profile::sphere(4, 3, 0.25);
    const auto q = profile_from_json(to_json(p));
    CHECK(q.sphere_n() == 4);
    CHECK(q.sphere_k() == 3);
    CHECK(q.sphere_c() == 0.25);
    CHECK(q.h(0.3) == p.h(0.3));
}
