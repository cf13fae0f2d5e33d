#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "paneitz/bifurcation.hpp"
#include "paneitz/multishoot.hpp"
#include "paneitz/shooting.hpp"
#include "paneitz/sturm.hpp"

using namespace paneitz;

namespace {

// φ(s) = λ1 = −3 on the builtin path α = s, β = 0.2 s², q = 3
const double s1 = 2 * -3.0 / (1 - std::sqrt(1 + 4 * 0.2 * 2));

}  // namespace

TEST_CASE("u = 1 has zero residual")
{
    const auto p = Profile::sphere(3, 1);
    const auto path = CoefficientPath::builtin(0.2, 3);
    for (double s : {1.0, 5.0, s1, 20.0}) {
        const auto r = shoot(path.at(s), p, 1.0, 0.0);
        CHECK(r.norm() <= 1e-9);
        CHECK_FALSE(r.terminated_early);
    }
}

TEST_CASE("off the bifurcation instants a small perturbation is not a solution")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = CoefficientPath::builtin(0.2, 3).at(1.5 * s1);
    const auto r = shoot(c, p, 1.001, 0.0);
    CHECK(r.norm() > 1e-6);
}

TEST_CASE("a start inside the negative cone stops early")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    ShootOptions o;
    o.flow.certificates = true;
    const auto r = shoot(c, p, 0.5, -1.0, o);
    CHECK(r.terminated_early);
    REQUIRE(r.certificate);
    CHECK(r.certificate->cone == Certificate::Cone::negative);
    CHECK(r.r1 < 0);
    CHECK(r.r3 < 0);
    CHECK_THROWS_AS(shoot(c, p, 0.0, 0.0), std::invalid_argument);
}

TEST_CASE("solve from u = 1 is trivial")
{
    const auto p = Profile::sphere(3, 1);
    const auto r = solve(CoefficientPath::builtin(0.2, 3).at(1.05 * s1), p, 1.0, 0.0);
    CHECK(r.status == SolveStatus::trivial);
    REQUIRE(r.profile);
    CHECK(r.profile->constant);
}

TEST_CASE("solve from a far guess does not converge")
{
    const auto p = Profile::sphere(3, 1);
    const auto r = solve(CoefficientPath::builtin(0.2, 3).at(12.072205649026587), p, 0.5, 2.0);
    CHECK(r.status == SolveStatus::no_convergence);
    CHECK_FALSE(r.profile);
}

TEST_CASE("nonconstant solution just past the first instant")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = CoefficientPath::builtin(0.2, 3).at(1.05 * s1);
    const auto r = solve(c, p, 1.35, -1.55);
    REQUIRE(r.status == SolveStatus::converged);
    CHECK(r.residual_norm <= 1e-6);
    CHECK(r.a == doctest::Approx(1.361866).epsilon(1e-5));
    CHECK(r.b == doctest::Approx(-1.585108).epsilon(1e-5));
    REQUIRE(r.profile);
    REQUIRE(r.quality);
    CHECK(r.profile->critical_point_count == 2);
    CHECK(r.quality->positive);
    CHECK(r.quality->crosses_one);
    CHECK(r.quality->identity_relative <= 1e-6);
    CHECK(r.quality->max_w2 < 0);
    CHECK(r.quality->equation_residual <= 1e-5);

    // u(π − t) solves the same problem with data (u(π), v2(π))
    const double a2 = r.profile->a_end, b2 = r.profile->b_end;
    CHECK(std::abs(a2 - 1.0) > 0.1);
    const auto m = solve(c, p, a2, b2);
    REQUIRE(m.status == SolveStatus::converged);
    CHECK(std::abs(m.a - a2) <= 1e-6);
    CHECK(std::abs(m.b - b2) <= 1e-6);
    CHECK(m.profile->a_end == doctest::Approx(r.a).epsilon(1e-6));
}

TEST_CASE("scan prunes cells where every corner fires the same cone")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(4.0, 3.84, 3.0);
    const auto res = scan(c, p, Rect{0.2, 0.8, -5.0, -1.0}, 6, 6);
    REQUIRE(res.cells.size() == 36);
    for (const auto& cell : res.cells) {
        CHECK(cell.pruned);
        CHECK_FALSE(cell.candidate);
    }
    CHECK(res.nontrivial_candidates() == 0);
    CHECK(res.nodes.size() == 49);
}

TEST_CASE("scan past the first instant sees a nontrivial candidate")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = CoefficientPath::builtin(0.2, 3).at(1.05 * s1);
    const auto res = scan(c, p, Rect{}, 20, 20);
    CHECK(res.nontrivial_candidates() >= 1);
    // the cell containing (1, 0) is flagged and not counted
    int trivial = 0;
    for (const auto& cell : res.cells) trivial += cell.trivial;
    CHECK(trivial >= 1);
}

TEST_CASE("scan below the first instant finds nothing")
{
    const auto p = Profile::sphere(3, 1);
    const auto c = make_coefficients(0.1, 0.002, 3.0);
    const auto res = scan(c, p, Rect{}, 20, 20);
    CHECK(res.nontrivial_candidates() == 0);
}

TEST_CASE("trivial jacobian degenerates at the first instant")
{
    const auto p = Profile::sphere(3, 1);
    const auto path = CoefficientPath::builtin(0.2, 3);
    auto at = [&](double s) {
        const auto c = path.at(s);
        return trivial_jacobian(MultipleShooting(p, MultipleShooting::recommended_segments(c, p)), c);
    };
    const auto lo = at(0.95 * s1), mid = at(s1), hi = at(1.05 * s1);
    CHECK(lo.det_sign * hi.det_sign == -1);
    CHECK(mid.rcond <= 1e-10);
    CHECK(lo.rcond > 1e-8);
    CHECK(hi.rcond > 1e-8);
}
