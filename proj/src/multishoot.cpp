#include "paneitz/multishoot.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <Eigen/LU>
#include <Eigen/SVD>
#include <unsupported/Eigen/AutoDiff>

#include "paneitz/dormand_prince.hpp"
#include "paneitz/series.hpp"

namespace paneitz {

namespace {

using Aug = Eigen::Matrix<double, 28, 1>;
using AD = Eigen::AutoDiffScalar<Eigen::Vector4d>;
using Matrix4d = Eigen::Matrix4d;
using Matrix42 = Eigen::Matrix<double, 4, 2>;

const Matrix4d kReflect = Eigen::Vector4d(1.0, -1.0, 1.0, -1.0).asDiagonal();

struct SeriesState {
    StateVector v;
    Matrix4d d;  // columns: ∂/∂(a, b, α, β)
};

SeriesState series_with_sensitivity(const PaneitzCoefficients& c, const EndpointExpansion& e,
                                    double a, double b, double eps)
{
    const AD ad_a(a, 4, 0), ad_b(b, 4, 1), ad_alpha(c.alpha, 4, 2), ad_beta(c.beta, 4, 3);
    const auto s = endpoint_series(ad_a, ad_b, ad_alpha, ad_beta, c.q, e);
    const auto v = s.evaluate(eps);
    SeriesState out;
    for (int i = 0; i < 4; ++i) {
        out.v(i) = v[i].value();
        out.d.row(i) = v[i].derivatives().transpose();
    }
    return out;
}

struct SegmentFlow {
    StateVector v;
    Matrix4d Y;  // ∂ end / ∂ start
    Matrix42 Z;  // ∂ end / ∂(α, β) at fixed start
    bool ok = true;
};

SegmentFlow flow_segment(const PaneitzCoefficients& c, const Profile& p, double t0, double t1,
                         const StateVector& start, bool sensitivities)
{
    SegmentFlow out;
    StepControl ctl;
    auto none = [](const auto&) { return StepVerdict::proceed; };
    if (!sensitivities) {
        auto field = [&](double t, const StateVector& y) { return paneitz_field(c, p.h(t), y); };
        const auto r = dormand_prince<4>(field, t0, start, t1, ctl, none);
        out.v = r.y;
        out.ok = r.status == IntegratorStatus::reached_end && r.y.allFinite();
        out.Y.setIdentity();
        out.Z.setZero();
        return out;
    }
    auto field = [&](double t, const Aug& y) {
        const double h = p.h(t);
        const StateVector v = y.head<4>();
        Matrix4d A = Matrix4d::Zero();
        A(0, 1) = 1.0;
        A(1, 1) = -h;
        A(1, 2) = 1.0;
        A(2, 1) = c.alpha;
        A(2, 3) = 1.0;
        A(3, 0) = c.beta * (c.q * std::pow(std::abs(v(0)), c.q - 1.0) - 1.0);
        A(3, 3) = -h;
        Aug d;
        d.head<4>() = paneitz_field(c, h, v);
        const Eigen::Map<const Matrix4d> Y(y.data() + 4);
        const Eigen::Map<const Matrix42> Z(y.data() + 20);
        Eigen::Map<Matrix4d>(d.data() + 4) = A * Y;
        Matrix42 forcing = Matrix42::Zero();
        forcing(2, 0) = v(1);
        forcing(3, 1) = signed_power(v(0), c.q) - v(0);
        Eigen::Map<Matrix42>(d.data() + 20) = A * Z + forcing;
        return d;
    };
    Aug y0 = Aug::Zero();
    y0.head<4>() = start;
    Eigen::Map<Matrix4d>(y0.data() + 4).setIdentity();
    const auto r = dormand_prince<28>(field, t0, y0, t1, ctl, none);
    out.ok = r.status == IntegratorStatus::reached_end && r.y.allFinite();
    out.v = r.y.head<4>();
    out.Y = Eigen::Map<const Matrix4d>(r.y.data() + 4);
    out.Z = Eigen::Map<const Matrix42>(r.y.data() + 20);
    return out;
}

}  // namespace

MultipleShooting::MultipleShooting(const Profile& p, int segments, double eps_rel)
    : p_(p), mirror_(p.mirrored()), M_(segments), eps_(eps_rel * p.length())
{
    if (segments < 2) throw std::invalid_argument("multiple shooting needs >= 2 segments");
    if (!(eps_ > 0.0) || eps_ >= node(1))
        throw std::invalid_argument("multiple shooting: endpoint offset too large");
}

Eigen::VectorXd MultipleShooting::constant(double value) const
{
    Eigen::VectorXd X = Eigen::VectorXd::Zero(unknowns());
    X(0) = value;
    for (int k = 1; k < M_; ++k) X(2 + 4 * (k - 1)) = value;
    X(unknowns() - 2) = value;
    return X;
}

int MultipleShooting::recommended_segments(const PaneitzCoefficients& c, const Profile& p)
{
    const double rate = 0.5 * (c.alpha + std::sqrt(c.alpha * c.alpha + 4.0 * c.beta * (c.q - 1.0)));
    const int m = int(std::ceil(std::sqrt(std::max(rate, 0.0)) * p.length() / 2.0));
    return std::clamp(m, 4, 64);
}

MultipleShooting::Evaluation MultipleShooting::evaluate(const PaneitzCoefficients& c,
                                                        const Eigen::VectorXd& X,
                                                        bool jacobian) const
{
    if (X.size() != unknowns()) throw std::invalid_argument("multiple shooting: bad unknown size");
    const Eigen::Index n = unknowns();
    Evaluation ev;
    ev.F.resize(n);
    if (jacobian) {
        ev.J = Eigen::MatrixXd::Zero(n, n);
        ev.dcoeffs = Eigen::MatrixXd::Zero(n, 2);
    }
    auto node_state = [&](int k) { return StateVector(X.segment<4>(2 + 4 * (k - 1))); };
    auto node_col = [](int k) { return Eigen::Index(2 + 4 * (k - 1)); };

    // First segment.
    {
        const auto s = series_with_sensitivity(c, p_.start_expansion(), X(0), X(1), eps_);
        const auto f = flow_segment(c, p_, eps_, node(1), s.v, jacobian);
        ev.ok = ev.ok && f.ok;
        ev.F.segment<4>(0) = f.v - node_state(1);
        if (jacobian) {
            ev.J.block<4, 2>(0, 0) = f.Y * s.d.leftCols<2>();
            ev.J.block<4, 4>(0, node_col(1)) = -Matrix4d::Identity();
            ev.dcoeffs.block<4, 2>(0, 0) = f.Y * s.d.rightCols<2>() + f.Z;
        }
    }
    // Interior segments.
    for (int k = 1; k + 1 < M_; ++k) {
        const auto f = flow_segment(c, p_, node(k), node(k + 1), node_state(k), jacobian);
        ev.ok = ev.ok && f.ok;
        const Eigen::Index row = 4 * k;
        ev.F.segment<4>(row) = f.v - node_state(k + 1);
        if (jacobian) {
            ev.J.block<4, 4>(row, node_col(k)) = f.Y;
            ev.J.block<4, 4>(row, node_col(k + 1)) = -Matrix4d::Identity();
            ev.dcoeffs.block<4, 2>(row, 0) = f.Z;
        }
    }
    // Last segment, integrated from the far end in mirrored variables.
    {
        const double span = p_.length() - node(M_ - 1);
        const auto s =
            series_with_sensitivity(c, mirror_.start_expansion(), X(n - 2), X(n - 1), eps_);
        const auto f = flow_segment(c, mirror_, eps_, span, s.v, jacobian);
        ev.ok = ev.ok && f.ok;
        const Eigen::Index row = n - 4;
        ev.F.segment<4>(row) = kReflect * f.v - node_state(M_ - 1);
        if (jacobian) {
            ev.J.block<4, 2>(row, n - 2) = kReflect * f.Y * s.d.leftCols<2>();
            ev.J.block<4, 4>(row, node_col(M_ - 1)) = -Matrix4d::Identity();
            ev.dcoeffs.block<4, 2>(row, 0) = kReflect * (f.Y * s.d.rightCols<2>() + f.Z);
        }
    }
    if (!ev.F.allFinite()) ev.ok = false;
    return ev;
}

Eigen::VectorXd MultipleShooting::from_forward(const PaneitzCoefficients& c, double a,
                                               double b) const
{
    Eigen::VectorXd X = constant(1.0);
    X(0) = a;
    X(1) = b;
    const double box = 10.0 * std::max({1.0, a, std::abs(b)});
    StateVector v = series_start(c, p_, a, b, eps_).v;
    double t = eps_;
    for (int k = 1; k < M_; ++k) {
        const auto f = flow_segment(c, p_, t, node(k), v, false);
        if (!f.ok || f.v.lpNorm<Eigen::Infinity>() > box) return X;
        v = f.v;
        t = node(k);
        X.segment<4>(2 + 4 * (k - 1)) = v;
    }
    // The far-end data is read off the last node: closer to D the forward
    // flow is dominated by the singular mode whenever (a, b) is inexact.
    X(unknowns() - 2) = v(0);
    X(unknowns() - 1) = v(2);
    return X;
}

SolutionProfile MultipleShooting::assemble(const PaneitzCoefficients& c, const Eigen::VectorXd& X,
                                           int points) const
{
    const Eigen::Index n = unknowns();
    const double D = p_.length();
    const auto head = endpoint_series(X(0), X(1), c.alpha, c.beta, c.q, p_.start_expansion());
    const auto tail =
        endpoint_series(X(n - 2), X(n - 1), c.alpha, c.beta, c.q, mirror_.start_expansion());

    FlowOptions opts;
    std::vector<Trajectory> pieces;
    pieces.reserve(M_);
    pieces.push_back(integrate(c, p_, series_start(c, p_, X(0), X(1), eps_), node(1), opts));
    for (int k = 1; k + 1 < M_; ++k)
        pieces.push_back(
            integrate(c, p_, State{node(k), X.segment<4>(2 + 4 * (k - 1))}, node(k + 1), opts));
    {
        const auto s = tail.evaluate(eps_);
        pieces.push_back(integrate(c, mirror_, State{eps_, StateVector(s[0], s[1], s[2], s[3])},
                                   D - node(M_ - 1), opts));
    }
    for (const auto& piece : pieces)
        if (piece.termination() != Termination::reached_end)
            throw std::runtime_error("multiple shooting: segment failed during assembly");

    auto dense = [&](double t) -> StateVector {
        if (t <= eps_) {
            const auto s = head.evaluate(std::max(t, 0.0));
            return StateVector(s[0], s[1], s[2], s[3]);
        }
        if (t >= D - eps_) {
            const auto s = tail.evaluate(std::max(D - t, 0.0));
            return kReflect * StateVector(s[0], s[1], s[2], s[3]);
        }
        if (t > node(M_ - 1)) return kReflect * pieces.back()(D - t);
        const int k = std::clamp(int(std::ceil(t / node(1))) - 1, 0, M_ - 2);
        return pieces[k](t);
    };

    Eigen::VectorXd t = Eigen::VectorXd::LinSpaced(points + 1, 0.0, D);
    Eigen::Matrix<double, 4, Eigen::Dynamic> states(4, points + 1);
    for (int i = 0; i <= points; ++i) states.col(i) = dense(t(i));
    states.col(0) = StateVector(X(0), 0.0, X(1), 0.0);
    states.col(points) = StateVector(X(n - 2), 0.0, X(n - 1), 0.0);
    return build_solution_profile(c, p_, t, states, dense);
}

TrivialJacobian trivial_jacobian(const MultipleShooting& ms, const PaneitzCoefficients& c)
{
    const auto ev = ms.evaluate(c, ms.constant(1.0), true);
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ev.J, Eigen::ComputeFullV);
    const auto& sv = svd.singularValues();
    TrivialJacobian out;
    out.rcond = sv(sv.size() - 1) / sv(0);
    out.null_vector = svd.matrixV().col(sv.size() - 1);
    const double det = Eigen::PartialPivLU<Eigen::MatrixXd>(ev.J).determinant();
    out.det_sign = det > 0 ? 1 : (det < 0 ? -1 : 0);
    return out;
}

NewtonReport newton_fixed(const MultipleShooting& ms, const PaneitzCoefficients& c,
                          Eigen::VectorXd& X, int max_iter, double tol)
{
    NewtonReport rep;
    for (int it = 0; it <= max_iter; ++it) {
        const auto ev = ms.evaluate(c, X, true);
        if (!ev.ok) return rep;
        rep.residual_norm = ev.F.lpNorm<Eigen::Infinity>();
        rep.iterations = it;
        if (rep.residual_norm <= tol * std::max(1.0, X.lpNorm<Eigen::Infinity>())) {
            rep.converged = true;
            return rep;
        }
        if (it == max_iter) break;
        const Eigen::VectorXd dx = Eigen::PartialPivLU<Eigen::MatrixXd>(ev.J).solve(-ev.F);
        if (!dx.allFinite()) return rep;
        X += dx;
    }
    return rep;
}

NewtonReport newton_damped(const MultipleShooting& ms, const PaneitzCoefficients& c,
                           Eigen::VectorXd& X, int max_iter, double tol)
{
    NewtonReport rep;
    auto ev = ms.evaluate(c, X, true);
    if (!ev.ok) return rep;
    for (int it = 0; it <= max_iter; ++it) {
        rep.iterations = it;
        rep.residual_norm = ev.F.lpNorm<Eigen::Infinity>();
        if (rep.residual_norm <= tol * std::max(1.0, X.lpNorm<Eigen::Infinity>())) {
            rep.converged = true;
            return rep;
        }
        if (it == max_iter) break;
        const Eigen::VectorXd dx = Eigen::PartialPivLU<Eigen::MatrixXd>(ev.J).solve(-ev.F);
        if (!dx.allFinite()) return rep;
        const double norm = ev.F.norm();
        bool accepted = false;
        double lambda = 1.0;
        for (int k = 0; k < 20 && !accepted; ++k, lambda *= 0.5) {
            Eigen::VectorXd Y = X + lambda * dx;
            if (!(Y(0) > 0.0)) continue;
            auto trial = ms.evaluate(c, Y, true);
            if (trial.ok && trial.F.norm() < (1.0 - 1e-4 * lambda) * norm) {
                X = std::move(Y);
                ev = std::move(trial);
                accepted = true;
            }
        }
        if (!accepted) return rep;
    }
    return rep;
}

}  // namespace paneitz
