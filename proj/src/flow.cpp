#include "paneitz/flow.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "paneitz/series.hpp"

namespace paneitz {

StateVector paneitz_field(const PaneitzCoefficients& c, double h, const StateVector& v)
{
    StateVector d;
    d(0) = v(1);
    d(1) = v(2) - h * v(1);
    d(2) = v(3) + c.alpha * v(1);
    d(3) = c.beta * (signed_power(v(0), c.q) - v(0)) - h * v(3);
    return d;
}

StateVector reflect(const StateVector& v) { return StateVector(v(0), -v(1), v(2), -v(3)); }

namespace {

void check_offset(const Profile& p, double eps)
{
    if (!(eps > 0.0) || eps > 0.1 * p.length())
        throw std::invalid_argument("endpoint offset must lie in (0, D/10]");
}

}  // namespace

State series_start(const PaneitzCoefficients& c, const Profile& p, double a, double b, double eps)
{
    check_offset(p, eps);
    const auto s = endpoint_series(a, b, c.alpha, c.beta, c.q, p.start_expansion());
    const auto v = s.evaluate(eps);
    return {eps, StateVector(v[0], v[1], v[2], v[3])};
}

State series_end(const PaneitzCoefficients& c, const Profile& p, double a_end, double b_end,
                 double eps)
{
    check_offset(p, eps);
    const auto s =
        endpoint_series(a_end, b_end, c.alpha, c.beta, c.q, p.mirrored().start_expansion());
    const auto v = s.evaluate(eps);
    return {p.length() - eps, reflect(StateVector(v[0], v[1], v[2], v[3]))};
}

std::optional<Certificate> cone_membership(double t, const StateVector& v)
{
    if (v(0) < 1.0 && v(1) < 0.0 && v(2) < 0.0 && v(3) < 0.0)
        return Certificate{Certificate::Cone::negative, t, v};
    if (v(0) > 1.0 && v(1) > 0.0 && v(2) > 0.0 && v(3) > 0.0)
        return Certificate{Certificate::Cone::positive, t, v};
    return std::nullopt;
}

std::string to_string(Termination t)
{
    switch (t) {
    case Termination::reached_end: return "reached_end";
    case Termination::certificate: return "certificate";
    case Termination::blowup: return "blowup";
    case Termination::step_failure: return "step_failure";
    }
    return "unknown";
}

StateVector Trajectory::operator()(double t) const
{
    if (steps_.empty() || t <= start_.t) return start_.v;
    if (t >= final_.t) return final_.v;
    auto it = std::upper_bound(steps_.begin(), steps_.end(), t,
                               [](double x, const DenseStep<4>& s) { return x < s.t0; });
    if (it != steps_.begin()) --it;
    return (*it)(t);
}

namespace {

// Earliest point of `step` inside a cone, given that its end is.
Certificate locate_entry(const DenseStep<4>& step, const Certificate& at_end)
{
    constexpr int sub = 8;
    double lo = step.t0;
    double hi = step.t1();
    for (int i = 1; i < sub; ++i) {
        const double t = step.t0 + step.h * i / sub;
        if (cone_membership(t, step(t))) {
            hi = t;
            break;
        }
        lo = t;
    }
    for (int it = 0; it < 40; ++it) {
        const double mid = 0.5 * (lo + hi);
        const auto m = cone_membership(mid, step(mid));
        if (m && m->cone == at_end.cone)
            hi = mid;
        else
            lo = mid;
    }
    const auto hit = cone_membership(hi, step(hi));
    return hit ? *hit : at_end;
}

}  // namespace

Trajectory integrate(const PaneitzCoefficients& c, const Profile& p, const State& start,
                     double t_end, const FlowOptions& opts)
{
    if (!start.v.allFinite()) throw std::invalid_argument("integrate: non-finite start state");
    if (!(start.t < t_end) || start.t <= 0.0 || t_end >= p.length())
        throw std::invalid_argument("integrate: need 0 < start.t < t_end < D");

    Trajectory traj;
    traj.start_ = start;
    traj.final_ = start;
    traj.nonpositive_ = start.v(0) < 0.0;

    if (opts.certificates) {
        if (auto cert = cone_membership(start.t, start.v)) {
            traj.certificate_ = cert;
            traj.termination_ = Termination::certificate;
            return traj;
        }
    }

    auto field = [&](double t, const StateVector& y) { return paneitz_field(c, p.h(t), y); };
    bool blew_up = false;
    auto monitor = [&](const DenseStep<4>& step) {
        const StateVector y = step.end();
        if (y(0) < 0.0) traj.nonpositive_ = true;
        if (y.cwiseAbs().maxCoeff() > opts.blowup) {
            blew_up = true;
            return StepVerdict::stop;
        }
        if (opts.certificates) {
            if (auto cert = cone_membership(step.t1(), y)) {
                traj.certificate_ = locate_entry(step, *cert);
                return StepVerdict::stop;
            }
        }
        return StepVerdict::proceed;
    };

    StepControl ctl;
    ctl.rtol = opts.rtol;
    ctl.atol = opts.atol;
    ctl.max_steps = opts.max_steps;
    const auto result =
        dormand_prince<4>(field, start.t, start.v, t_end, ctl, monitor, &traj.steps_);

    traj.final_ = {result.t, result.y};
    switch (result.status) {
    case IntegratorStatus::reached_end: traj.termination_ = Termination::reached_end; break;
    case IntegratorStatus::stopped:
        traj.termination_ = blew_up ? Termination::blowup : Termination::certificate;
        break;
    default: traj.termination_ = Termination::step_failure; break;
    }
    return traj;
}

std::optional<Certificate> certificate_nonglobal(const Trajectory& traj, const PaneitzCoefficients&)
{
    if (traj.certificate()) return traj.certificate();
    if (auto cert = cone_membership(traj.start().t, traj.start().v)) return cert;
    for (const auto& step : traj.steps())
        if (auto cert = cone_membership(step.t1(), step.end())) return locate_entry(step, *cert);
    return std::nullopt;
}

SolutionProfile build_solution_profile(const PaneitzCoefficients& c, const Profile& p,
                                       const Eigen::VectorXd& t,
                                       const Eigen::Matrix<double, 4, Eigen::Dynamic>& states,
                                       const std::function<StateVector(double)>& dense)
{
    const Eigen::Index n = t.size();
    if (n < 3 || states.cols() != n) throw std::invalid_argument("solution profile: bad grid");
    const double D = p.length();

    SolutionProfile sol;
    sol.t = t;
    sol.states = states;
    sol.u = states.row(0).transpose();
    sol.du = states.row(1).transpose();
    sol.d2u.resize(n);
    sol.d3u.resize(n);
    sol.a = states(0, 0);
    sol.b = states(2, 0);
    sol.a_end = states(0, n - 1);
    sol.b_end = states(2, n - 1);

    sol.du(0) = 0.0;
    sol.du(n - 1) = 0.0;
    sol.d2u(0) = sol.b / (1.0 + p.j0());
    sol.d2u(n - 1) = sol.b_end / (1.0 + p.j1());
    sol.d3u(0) = 0.0;
    sol.d3u(n - 1) = 0.0;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double h = p.h(t(i));
        const StateVector v = states.col(i);
        sol.d2u(i) = v(2) - h * v(1);
        sol.d3u(i) = v(3) - h * sol.d2u(i) - p.dh(t(i)) * v(1) + c.alpha * v(1);
    }

    sol.min_value = sol.u.minCoeff();
    sol.max_value = sol.u.maxCoeff();
    const double spread = sol.max_value - sol.min_value;
    if (spread <= 1e-12 * std::max(1.0, std::abs(sol.max_value))) {
        sol.constant = true;
        sol.degenerate = true;
        return sol;
    }

    sol.critical_points.push_back({0.0, sol.a, sol.d2u(0)});
    int last = 0;
    Eigen::Index last_index = 0;
    for (Eigen::Index i = 1; i + 1 < n; ++i) {
        const double v1 = sol.du(i);
        if (v1 == 0.0) continue;
        const int sign = v1 > 0 ? 1 : -1;
        if (last != 0 && sign != last) {
            double lo = t(last_index), hi = t(i);
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double f = dense(mid)(1);
                if ((f > 0 ? 1 : -1) == last)
                    lo = mid;
                else
                    hi = mid;
            }
            const double tc = 0.5 * (lo + hi);
            const StateVector v = dense(tc);
            sol.critical_points.push_back({tc, v(0), v(2) - p.h(tc) * v(1)});
        }
        last = sign;
        last_index = i;
    }
    sol.critical_points.push_back({D, sol.a_end, sol.d2u(n - 1)});
    sol.critical_point_count = int(sol.critical_points.size());

    const double scale = sol.d2u.cwiseAbs().maxCoeff();
    double margin = std::numeric_limits<double>::infinity();
    for (const auto& cp : sol.critical_points) margin = std::min(margin, std::abs(cp.d2u));
    sol.nondegeneracy_margin = scale > 0.0 ? margin / scale : 0.0;
    sol.degenerate = sol.nondegeneracy_margin < kNondegeneracyFloor;
    return sol;
}

SolutionProfile constant_solution(const PaneitzCoefficients& c, const Profile& p, double value,
                                  int points)
{
    Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(points + 1, 0.0, p.length());
    Eigen::Matrix<double, 4, Eigen::Dynamic> states(4, points + 1);
    states.setZero();
    states.row(0).setConstant(value);
    const StateVector v(value, 0.0, 0.0, 0.0);
    return build_solution_profile(c, p, t, states, [v](double) { return v; });
}

double residual(const PaneitzCoefficients& c, const Profile& p, const SolutionProfile& sol)
{
    const Eigen::Index n = sol.t.size();
    if (n < 202) throw std::invalid_argument("residual: need at least 200 interior nodes");
    const double D = p.length();
    const double dt = sol.t(1) - sol.t(0);
    double worst = 0.0;
    for (Eigen::Index i = 2; i + 2 < n; ++i) {
        const double t = sol.t(i);
        if (t < 0.05 * D || t > 0.95 * D) continue;
        const double d4 = (-sol.d3u(i + 2) + 8.0 * sol.d3u(i + 1) - 8.0 * sol.d3u(i - 1) +
                           sol.d3u(i - 2)) /
                          (12.0 * dt);
        const double h = p.h(t), dh = p.dh(t), d2h = p.d2h(t);
        const double u = sol.u(i);
        const double r = d4 + 2.0 * h * sol.d3u(i) + (2.0 * dh + h * h - c.alpha) * sol.d2u(i) +
                         (d2h + h * dh - c.alpha * h) * sol.du(i) +
                         c.beta * (u - signed_power(u, c.q));
        worst = std::max(worst, std::abs(r));
    }
    return worst;
}

namespace {

// Composite Simpson on a uniform grid; trapezoid on a trailing odd interval.
double simpson(const Eigen::VectorXd& f, double dt)
{
    const Eigen::Index n = f.size();
    if (n < 2) return 0.0;
    const Eigen::Index intervals = n - 1;
    const Eigen::Index even = intervals - intervals % 2;
    double s = 0.0;
    for (Eigen::Index i = 0; i + 2 <= even; i += 2) s += f(i) + 4.0 * f(i + 1) + f(i + 2);
    s *= dt / 3.0;
    if (even < intervals) s += 0.5 * dt * (f(n - 2) + f(n - 1));
    return s;
}

}  // namespace

QualityReport quality_checks(const PaneitzCoefficients& c, const Profile& p,
                             const SolutionProfile& sol)
{
    QualityReport r;
    const Eigen::Index n = sol.t.size();
    Eigen::VectorXd powered(n), diff(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double H = p.weight(sol.t(i));
        const double up = signed_power(sol.u(i), c.q);
        powered(i) = up * H;
        diff(i) = (up - sol.u(i)) * H;
    }
    const double dt = sol.t(1) - sol.t(0);
    const double denom = simpson(powered, dt);
    r.identity_relative = std::abs(simpson(diff, dt)) / std::max(std::abs(denom), 1e-300);

    const double cf = c.factorizable ? c.c_factor : std::numeric_limits<double>::quiet_NaN();
    r.max_w2 = (sol.states.row(2).array() - cf * sol.states.row(0).array()).maxCoeff();
    r.min_u = sol.min_value;
    r.max_u = sol.max_value;
    r.positive = r.min_u > 0.0;
    r.crosses_one = r.max_u > 1.0 && r.min_u < 1.0;
    r.constant = sol.constant;
    r.degenerate = sol.degenerate;
    r.critical_point_count = sol.critical_point_count;
    r.nondegeneracy_margin = sol.nondegeneracy_margin;
    r.equation_residual = n >= 202 ? residual(c, p, sol) : std::numeric_limits<double>::quiet_NaN();
    return r;
}

nlohmann::json QualityReport::to_json() const
{
    auto num = [](double x) -> nlohmann::json {
        if (std::isfinite(x)) return x;
        return nullptr;
    };
    return {{"identity_relative", num(identity_relative)},
            {"max_w2", num(max_w2)},
            {"min_u", num(min_u)},
            {"max_u", num(max_u)},
            {"positive", positive},
            {"crosses_one", crosses_one},
            {"constant", constant},
            {"degenerate", degenerate},
            {"critical_point_count", critical_point_count},
            {"nondegeneracy_margin", num(nondegeneracy_margin)},
            {"equation_residual", num(equation_residual)}};
}

}  // namespace paneitz
