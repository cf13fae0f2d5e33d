#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "paneitz/flow.hpp"

using namespace paneitz;

namespace {

const double pi = std::acos(-1.0);

}  // namespace

TEST_CASE("constant start")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    for (double eps : {1e-6, 1e-3, 0.1}) {
        const auto s = series_start(c, p, 1.0, 0.0, eps);
        CHECK(s.t == eps);
        CHECK(s.v[0] == doctest::Approx(1.0).epsilon(1e-15));
        CHECK(std::abs(s.v[1]) <= 1e-15);
        CHECK(std::abs(s.v[2]) <= 1e-15);
        CHECK(std::abs(s.v[3]) <= 1e-15);
    }
    CHECK_THROWS_AS(series_start(c, p, 1.0, 0.0, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(series_start(c, p, 1.0, 0.0, 0.5), std::invalid_argument);

    const auto e = series_end(c, p, 1.0, 0.0, 1e-4);
    CHECK(e.t == doctest::Approx(pi - 1e-4));
    CHECK(e.v[0] == doctest::Approx(1.0));
}

TEST_CASE("constant trajectory stays constant")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    const auto traj = integrate(c, p, series_start(c, p, 1.0, 0.0, 1e-6 * pi), pi * (1 - 1e-6), {});
    CHECK(traj.termination() == Termination::reached_end);
    for (int k = 1; k < 50; ++k) {
        const auto v = traj(pi * k / 50);
        CHECK(std::abs(v[0] - 1.0) <= 1e-10);
        CHECK(v.tail<3>().lpNorm<Eigen::Infinity>() <= 1e-10);
    }
    CHECK_FALSE(certificate_nonglobal(traj, c));
}

TEST_CASE("endpoint slope of v3")
{
    // (1+j0)·v3'(0) = β(a^q − a): 3.84·(8 − 2)/3 = 7.68
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    FlowOptions tight;
    tight.rtol = 1e-13;
    tight.atol = 1e-15;
    const auto traj = integrate(c, p, series_start(c, p, 2.0, 0.0, 1e-6), 0.5, tight);
    auto q = [&](double t) { return traj(t)[3] / t; };
    // two Richardson steps remove the O(t) and O(t²) terms
    const double h = 0.02;
    const double r1 = 2 * q(h / 2) - q(h), r2 = 2 * q(h / 4) - q(h / 2);
    const double extrap = (4 * r2 - r1) / 3;
    CHECK(extrap == doctest::Approx(7.68).epsilon(1e-6));

    // and (1+j0)·v1'(0) = v2(0) = b
    const auto tb = integrate(c, p, series_start(c, p, 1.5, 0.6, 1e-6), 0.5, tight);
    auto q1 = [&](double t) { return tb(t)[1] / t; };
    const double s1 = 2 * q1(h / 2) - q1(h), s2 = 2 * q1(h / 4) - q1(h / 2);
    CHECK((4 * s2 - s1) / 3 == doctest::Approx(0.6 / 3).epsilon(1e-6));
}

TEST_CASE("b > 0 starts with v1 > 0")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    for (double a : {0.5, 1.0, 2.0})
        for (double b : {1e-3, 0.5, 4.0}) CHECK(series_start(c, p, a, b, 1e-6).v[1] > 0);
}

TEST_CASE("reflection symmetry on antisymmetric profiles")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(6.0, 4.0, 3.0);
    FlowOptions tight;
    tight.rtol = 1e-12;
    tight.atol = 1e-14;
    const State s0{0.8, StateVector(1.1, -0.2, 0.3, -0.4)};
    const double t1 = 2.0;
    const auto fwd = integrate(c, p, s0, t1, tight);
    REQUIRE(fwd.termination() == Termination::reached_end);
    const State back{pi - t1, reflect(fwd.final_state().v)};
    const auto rev = integrate(c, p, back, pi - s0.t, tight);
    REQUIRE(rev.termination() == Termination::reached_end);
    CHECK((reflect(rev.final_state().v) - s0.v).lpNorm<Eigen::Infinity>() <= 1e-7);
    for (double t : {1.0, 1.3, 1.7})
        CHECK((reflect(rev(pi - t)) - fwd(t)).lpNorm<Eigen::Infinity>() <= 1e-7);
}

TEST_CASE("semigroup")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    FlowOptions o;
    const auto start = series_start(c, p, 1.2, -0.5, 1e-6 * pi);
    const auto one = integrate(c, p, start, 2.0, o);
    const auto a = integrate(c, p, start, 1.1, o);
    const auto b = integrate(c, p, a.final_state(), 2.0, o);
    const auto& v = one.final_state().v;
    const double scale = o.rtol * v.lpNorm<Eigen::Infinity>() + o.atol;
    CHECK((b.final_state().v - v).lpNorm<Eigen::Infinity>() <= 10 * scale);
}

TEST_CASE("weighted identities along a trajectory")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    const auto traj = integrate(c, p, series_start(c, p, 1.4, -1.0, 1e-6 * pi), 2.5, {});
    const double d = 1e-5;
    for (int k = 1; k < 20; ++k) {
        const double t = 0.2 + 2.1 * k / 20;
        auto Hv = [&](double x, int i) { return p.weight(x) * traj(x)[i]; };
        const double l1 = (Hv(t + d, 1) - Hv(t - d, 1)) / (2 * d);
        const double l3 = (Hv(t + d, 3) - Hv(t - d, 3)) / (2 * d);
        const auto v = traj(t);
        const double H = p.weight(t);
        const double r1 = H * v[2];
        const double r3 = H * c.beta * (std::pow(v[0], 3) - v[0]);
        CHECK(std::abs(l1 - r1) <= 1e-6 * std::max(1.0, std::abs(r1)));
        CHECK(std::abs(l3 - r3) <= 1e-6 * std::max(1.0, std::abs(r3)));
    }
}

TEST_CASE("field")
{
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    const StateVector v(2.0, 0.5, -1.0, 0.25);
    const double h = 0.7;
    const auto f = paneitz_field(c, h, v);
    CHECK(f[0] == 0.5);
    CHECK(f[1] == doctest::Approx(-1.0 - 0.7 * 0.5));
    CHECK(f[2] == doctest::Approx(0.25 + 4.0 * 0.5));
    CHECK(f[3] == doctest::Approx(3.84 * (8 - 2) - 0.7 * 0.25));
}

TEST_CASE("cone membership")
{
    const auto neg = cone_membership(1.0, StateVector(0.5, -0.1, -0.1, -0.1));
    REQUIRE(neg);
    CHECK(neg->cone == Certificate::Cone::negative);
    const auto pos = cone_membership(1.0, StateVector(2.0, 0.1, 0.1, 0.1));
    REQUIRE(pos);
    CHECK(pos->cone == Certificate::Cone::positive);
    CHECK_FALSE(cone_membership(1.0, StateVector(1.0, 0, 0, 0)));
    CHECK_FALSE(cone_membership(1.0, StateVector(0.5, -0.1, 0.1, -0.1)));
    CHECK_FALSE(cone_membership(1.0, StateVector(2.0, 0.1, 0.1, -0.1)));
}

TEST_CASE("a trajectory entering a cone stops early")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    FlowOptions o;
    o.certificates = true;
    for (const auto& v : {StateVector(0.5, -0.1, -0.1, -0.1), StateVector(2.0, 0.1, 0.1, 0.1)}) {
        const auto traj = integrate(c, p, State{1.0, v}, pi * (1 - 1e-6), o);
        CHECK(traj.termination() == Termination::certificate);
        REQUIRE(traj.certificate());
        CHECK(traj.end_time() < pi * (1 - 1e-6));
    }
    // without certificates the same run leaves a large far-end defect
    const auto full = integrate(c, p, State{1.0, StateVector(0.5, -0.1, -0.1, -0.1)}, pi * (1 - 1e-6), {});
    CHECK(certificate_nonglobal(full, c));
}

TEST_CASE("constant-solution quality")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    const auto one = constant_solution(c, p, 1.0);
    CHECK(one.constant);
    CHECK(one.degenerate);
    CHECK(one.critical_points.empty());
    CHECK(residual(c, p, one) <= 1e-12);
    const auto q1 = quality_checks(c, p, one);
    CHECK(q1.identity_relative <= 1e-14);
    CHECK(q1.max_w2 == doctest::Approx(-c.c_factor));
    CHECK(q1.max_w2 < 0);
    CHECK(q1.constant);
    CHECK_FALSE(q1.crosses_one);

    const auto two = constant_solution(c, p, 2.0);
    CHECK(residual(c, p, two) == doctest::Approx(6 * c.beta).epsilon(1e-12));
}

TEST_CASE("profile census on a sampled cosine")
{
    // u = 1 + 0.1 cos t: one interior-free profile with critical points at 0 and π
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    auto state = [&](double x) {
        const double h = p.h(x);
        const double u = 1 + 0.1 * std::cos(x), du = -0.1 * std::sin(x), d2u = -0.1 * std::cos(x);
        return StateVector(u, du, d2u + h * du, 0.0);
    };
    const int n = 801;
    Eigen::VectorXd t(n);
    Eigen::Matrix<double, 4, Eigen::Dynamic> st(4, n);
    for (int k = 0; k < n; ++k) {
        t[k] = pi * (1e-6 + (1 - 2e-6) * k / (n - 1));
        st.col(k) = state(t[k]);
    }
    const auto sol = build_solution_profile(c, p, t, st, state);
    CHECK(sol.critical_point_count == 2);
    CHECK(sol.max_value == doctest::Approx(1.1).epsilon(1e-6));
    CHECK(sol.min_value == doctest::Approx(0.9).epsilon(1e-6));
    CHECK_FALSE(sol.constant);
}
