#include "paneitz/shooting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

#include <Eigen/LU>

#include "paneitz/multishoot.hpp"
#include "paneitz/series.hpp"

namespace paneitz {

Trajectory shoot_trajectory(const PaneitzCoefficients& c, const Profile& p, double a, double b,
                            const ShootOptions& opts)
{
    if (!(a > 0.0)) throw std::invalid_argument("shoot: need a > 0");
    const double eps = opts.eps_rel * p.length();
    return integrate(c, p, series_start(c, p, a, b, eps), p.length() - eps, opts.flow);
}

ShootResidual shoot(const PaneitzCoefficients& c, const Profile& p, double a, double b,
                    const ShootOptions& opts)
{
    const auto traj = shoot_trajectory(c, p, a, b, opts);
    if (traj.termination() == Termination::step_failure)
        throw std::runtime_error("shoot: integration failed at t = " +
                                 std::to_string(traj.end_time()));

    ShootResidual r;
    r.termination = traj.termination();
    r.certificate = certificate_nonglobal(traj, c);
    r.nonpositive = traj.nonpositive();
    r.final_state = traj.final_state();
    const double t = r.final_state.t;
    const StateVector& v = r.final_state.v;
    const double H = p.weight(t);
    if (traj.termination() == Termination::reached_end) {
        const double tau = p.length() - t;
        const double scale = tau / (1.0 + p.j1());
        r.r1 = H * (v(1) + v(2) * scale);
        r.r3 = H * (v(3) + c.beta * (signed_power(v(0), c.q) - v(0)) * scale);
    } else {
        r.terminated_early = true;
        r.r1 = H * v(1);
        r.r3 = H * v(3);
    }
    return r;
}

std::string to_string(SolveStatus s)
{
    switch (s) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::trivial: return "trivial";
    case SolveStatus::nonpositive: return "nonpositive";
    case SolveStatus::no_convergence: return "no_convergence";
    }
    return "unknown";
}

namespace {

Eigen::Vector2d residual_vector(const ShootResidual& r) { return {r.r1, r.r3}; }

}  // namespace

SolveResult solve(const PaneitzCoefficients& c, const Profile& p, double guess_a, double guess_b,
                  const SolveOptions& opts)
{
    SolveResult out;
    Eigen::Vector2d x(guess_a, guess_b);
    auto eval = [&](const Eigen::Vector2d& y) -> std::optional<Eigen::Vector2d> {
        if (!(y(0) > 0.0)) return std::nullopt;
        try {
            const auto r = shoot(c, p, y(0), y(1), opts.shoot);
            const Eigen::Vector2d f = residual_vector(r);
            if (!f.allFinite()) return std::nullopt;
            return f;
        } catch (const std::runtime_error&) {
            return std::nullopt;
        }
    };

    auto f = eval(x);
    if (!f) return out;
    bool converged = false;
    for (int it = 0; it < opts.max_iter; ++it) {
        out.iterations = it;
        out.residual_norm = f->norm();
        if (out.residual_norm <= opts.tol) {
            converged = true;
            break;
        }
        Eigen::Matrix2d J;
        bool ok = true;
        for (int k = 0; k < 2 && ok; ++k) {
            Eigen::Vector2d y = x;
            const double step = 1e-6 * (1.0 + std::abs(x(k)));
            y(k) += step;
            const auto fy = eval(y);
            if (!fy) ok = false;
            else J.col(k) = (*fy - *f) / step;
        }
        if (!ok) break;
        const Eigen::Vector2d dx = J.fullPivLu().solve(-*f);
        if (!dx.allFinite()) break;
        // Backtrack until the residual decreases.
        double lambda = 1.0;
        bool accepted = false;
        for (int k = 0; k < 12; ++k, lambda *= 0.5) {
            const Eigen::Vector2d y = x + lambda * dx;
            const auto fy = eval(y);
            if (fy && fy->norm() < out.residual_norm) {
                x = y;
                f = fy;
                accepted = true;
                break;
            }
        }
        if (!accepted) break;
    }
    if (!converged && f) {
        out.residual_norm = f->norm();
        converged = out.residual_norm <= opts.tol;
    }
    out.a = x(0);
    out.b = x(1);

    // Resample through multiple shooting so the far end is not polluted by
    // the growing mode of the forward flow. When the forward iteration
    // stalls on that mode, the segmented Newton gets the last iterate.
    MultipleShooting ms(p, MultipleShooting::recommended_segments(c, p), opts.shoot.eps_rel);
    Eigen::VectorXd X;
    NewtonReport polish;
    std::vector<Eigen::Vector2d> starts{x};
    if (!converged) starts.insert(starts.begin(), Eigen::Vector2d(guess_a, guess_b));
    // Attempts are ranked: a positive nonconstant solution ends the search,
    // then u = 1, then a nonpositive one.
    auto rank = [&](const Eigen::VectorXd& Y) {
        if (std::abs(Y(0) - 1.0) + std::abs(Y(1)) <= opts.trivial_radius) return 1;
        return ms.assemble(c, Y, 200).min_value > 0.0 ? 2 : 0;
    };
    int best = -1;
    for (const auto& start : starts) {
        for (int damped = 0; damped < 2 && best < 2; ++damped) {
            Eigen::VectorXd Y;
            NewtonReport r;
            try {
                Y = ms.from_forward(c, start(0), start(1));
                r = damped ? newton_damped(ms, c, Y) : newton_fixed(ms, c, Y);
            } catch (const std::runtime_error&) {
                r.converged = false;
            }
            if (!r.converged || !(Y(0) > 0.0)) continue;
            const int k = rank(Y);
            if (k > best) {
                best = k;
                X = Y;
                polish = r;
            }
        }
        if (best == 2) break;
    }
    if (!converged) {
        if (!polish.converged || !(X(0) > 0.0)) return out;
        out.iterations += polish.iterations;
        out.residual_norm = polish.residual_norm;
    }
    if (polish.converged) {
        out.a = X(0);
        out.b = X(1);
    }

    if (std::abs(out.a - 1.0) + std::abs(out.b) <= opts.trivial_radius) {
        out.status = SolveStatus::trivial;
        out.profile = constant_solution(c, p, 1.0, opts.profile_points);
        out.quality = quality_checks(c, p, *out.profile);
        return out;
    }

    out.profile = polish.converged ? ms.assemble(c, X, opts.profile_points)
                                   : ms.assemble(c, ms.from_forward(c, x(0), x(1)),
                                                 opts.profile_points);
    out.quality = quality_checks(c, p, *out.profile);
    out.status = out.quality->positive ? SolveStatus::converged : SolveStatus::nonpositive;
    return out;
}

int ScanResult::nontrivial_candidates() const
{
    return int(std::count_if(cells.begin(), cells.end(),
                             [](const ScanCell& c) { return c.candidate && !c.trivial && !c.pruned; }));
}

namespace {

bool changes_sign(double w, double x, double y, double z)
{
    const double lo = std::min({w, x, y, z});
    const double hi = std::max({w, x, y, z});
    return lo <= 0.0 && hi >= 0.0;
}

struct Corners {
    Eigen::Vector2d r[4];  // (a0,b0), (a1,b0), (a0,b1), (a1,b1)
};

bool both_change(const Corners& k)
{
    return changes_sign(k.r[0](0), k.r[1](0), k.r[2](0), k.r[3](0)) &&
           changes_sign(k.r[0](1), k.r[1](1), k.r[2](1), k.r[3](1));
}

bool refine_cell(const std::function<Eigen::Vector2d(double, double)>& f, double a0, double a1,
                 double b0, double b1, const Corners& k, int depth)
{
    if (!both_change(k)) return false;
    if (depth == 0) return true;
    const double am = 0.5 * (a0 + a1), bm = 0.5 * (b0 + b1);
    const Eigen::Vector2d mid = f(am, bm), south = f(am, b0), north = f(am, b1), west = f(a0, bm),
                          east = f(a1, bm);
    return refine_cell(f, a0, am, b0, bm, {{k.r[0], south, west, mid}}, depth - 1) ||
           refine_cell(f, am, a1, b0, bm, {{south, k.r[1], mid, east}}, depth - 1) ||
           refine_cell(f, a0, am, bm, b1, {{west, mid, k.r[2], north}}, depth - 1) ||
           refine_cell(f, am, a1, bm, b1, {{mid, east, north, k.r[3]}}, depth - 1);
}

}  // namespace

ScanResult scan(const PaneitzCoefficients& c, const Profile& p, const Rect& rect, int cells_a,
                int cells_b, const ShootOptions& opts, int refine)
{
    if (!(rect.a_min > 0.0)) throw std::invalid_argument("scan: rectangle must exclude a <= 0");
    if (cells_a < 1 || cells_b < 1) throw std::invalid_argument("scan: need >= 1 cell per axis");
    // Full-length runs keep the residual continuous in (a, b); cones are
    // still recorded and only used for pruning.
    ShootOptions o = opts;
    o.flow.certificates = false;
    auto residual_at = [&](double a, double b) { return residual_vector(shoot(c, p, a, b, o)); };

    ScanResult res;
    res.na = cells_a + 1;
    res.nb = cells_b + 1;
    res.nodes.resize(std::size_t(res.na) * res.nb);
    for (int j = 0; j < res.nb; ++j)
        for (int i = 0; i < res.na; ++i) {
            auto& n = res.nodes[std::size_t(j) * res.na + i];
            n.a = rect.a_min + (rect.a_max - rect.a_min) * i / cells_a;
            n.b = rect.b_min + (rect.b_max - rect.b_min) * j / cells_b;
            n.r = shoot(c, p, n.a, n.b, o);
        }

    for (int j = 0; j < cells_b; ++j)
        for (int i = 0; i < cells_a; ++i) {
            const ScanNode* corner[4] = {&res.node(i, j), &res.node(i + 1, j), &res.node(i, j + 1),
                                         &res.node(i + 1, j + 1)};
            ScanCell cell;
            cell.i = i;
            cell.j = j;
            cell.a0 = corner[0]->a;
            cell.a1 = corner[3]->a;
            cell.b0 = corner[0]->b;
            cell.b1 = corner[3]->b;
            Corners k;
            for (int m = 0; m < 4; ++m) k.r[m] = residual_vector(corner[m]->r);
            cell.sign_change = both_change(k);
            cell.candidate = cell.sign_change && refine_cell(residual_at, cell.a0, cell.a1, cell.b0,
                                                             cell.b1, k, refine);
            bool same = corner[0]->r.certificate.has_value();
            for (int k = 1; k < 4 && same; ++k)
                same = corner[k]->r.certificate &&
                       corner[k]->r.certificate->cone == corner[0]->r.certificate->cone;
            cell.pruned = same;
            cell.trivial = cell.a0 <= 1.0 && 1.0 <= cell.a1 && cell.b0 <= 0.0 && 0.0 <= cell.b1;
            res.cells.push_back(cell);
        }
    return res;
}

}  // namespace paneitz
