#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Core>

namespace paneitz {

/// One accepted Dormand–Prince 5(4) step with its continuous extension.
template <int Dim>
struct DenseStep {
    using Vector = Eigen::Matrix<double, Dim, 1>;

    double t0 = 0.0;
    double h = 0.0;
    Vector r1, r2, r3, r4, r5;

    double t1() const { return t0 + h; }
    Vector start() const { return r1; }
    Vector end() const { return r1 + r2; }

    Vector operator()(double t) const
    {
        const double th = (t - t0) / h;
        const double th1 = 1.0 - th;
        return r1 + th * (r2 + th1 * (r3 + th * (r4 + th1 * r5)));
    }
};

struct StepControl {
    double rtol = 1e-10;
    double atol = 1e-12;
    double initial_step = 0.0;  ///< 0 selects a step automatically
    double max_step = 0.0;      ///< 0 means unbounded
    long max_steps = 500000;
};

enum class StepVerdict { proceed, stop };

enum class IntegratorStatus { reached_end, stopped, step_underflow, too_many_steps };

template <int Dim>
struct IntegrationResult {
    using Vector = Eigen::Matrix<double, Dim, 1>;
    IntegratorStatus status = IntegratorStatus::reached_end;
    double t = 0.0;
    Vector y;
    long accepted = 0;
    long rejected = 0;
};

/// Adaptive Dormand–Prince 5(4) with dense output (Hairer's contd5).
///
/// `field(t, y)` returns y'. `on_step(step)` sees every accepted step and may
/// stop the run; `keep` (optional) receives the steps for dense evaluation.
template <int Dim, typename Field, typename OnStep>
IntegrationResult<Dim> dormand_prince(Field&& field, double t0,
                                      const Eigen::Matrix<double, Dim, 1>& y0, double t_end,
                                      const StepControl& ctl, OnStep&& on_step,
                                      std::vector<DenseStep<Dim>>* keep = nullptr)
{
    using Vector = Eigen::Matrix<double, Dim, 1>;

    constexpr double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    constexpr double a21 = 1.0 / 5;
    constexpr double a31 = 3.0 / 40, a32 = 9.0 / 40;
    constexpr double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    constexpr double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                     a54 = -212.0 / 729;
    constexpr double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                     a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    constexpr double a71 = 35.0 / 384, a73 = 500.0 / 1113, a74 = 125.0 / 192,
                     a75 = -2187.0 / 6784, a76 = 11.0 / 84;
    constexpr double e1 = 71.0 / 57600, e3 = -71.0 / 16695, e4 = 71.0 / 1920,
                     e5 = -17253.0 / 339200, e6 = 22.0 / 525, e7 = -1.0 / 40;
    constexpr double d1 = -12715105075.0 / 11282082432.0, d3 = 87487479700.0 / 32700410799.0,
                     d4 = -10690763975.0 / 1880347072.0, d5 = 701980252875.0 / 199316789632.0,
                     d6 = -1453857185.0 / 822651844.0, d7 = 69997945.0 / 29380423.0;

    IntegrationResult<Dim> result;
    result.t = t0;
    result.y = y0;
    const double span = t_end - t0;
    if (!(span > 0.0)) return result;

    auto weighted_norm = [&](const Vector& err, const Vector& ya, const Vector& yb) {
        const Vector scale =
            (ctl.atol + ctl.rtol * ya.cwiseAbs().cwiseMax(yb.cwiseAbs()).array()).matrix();
        return std::sqrt(err.cwiseQuotient(scale).squaredNorm() / double(err.size()));
    };

    Vector y = y0;
    double t = t0;
    Vector k1 = field(t, y);

    double h = ctl.initial_step;
    if (h <= 0.0) {
        const Vector zero = Vector::Zero(y.size());
        const double dn0 = weighted_norm(y, y, zero);
        const double dn1 = weighted_norm(k1, y, zero);
        double h0 = (dn0 < 1e-5 || dn1 < 1e-5) ? 1e-6 * span : 0.01 * dn0 / dn1;
        h0 = std::min(h0, span);
        const Vector y1 = y + h0 * k1;
        const Vector f1 = field(t + h0, y1);
        const double dn2 = weighted_norm(f1 - k1, y, zero) / h0;
        const double big = std::max(dn1, dn2);
        const double h1 = big <= 1e-15 ? std::max(1e-6, 1e-3 * h0) : std::pow(0.01 / big, 0.2);
        h = std::min(100.0 * h0, h1);
    }
    if (ctl.max_step > 0.0) h = std::min(h, ctl.max_step);

    double previous_error = 1e-4;
    bool last_rejected = false;
    while (true) {
        if (result.accepted + result.rejected >= ctl.max_steps) {
            result.status = IntegratorStatus::too_many_steps;
            break;
        }
        bool final_step = false;
        if (t + 1.01 * h >= t_end) {
            h = t_end - t;
            final_step = true;
        }
        if (h < 1e-14 * std::max(1.0, std::abs(t))) {
            result.status = IntegratorStatus::step_underflow;
            break;
        }

        const Vector k2 = field(t + c2 * h, y + h * (a21 * k1));
        const Vector k3 = field(t + c3 * h, y + h * (a31 * k1 + a32 * k2));
        const Vector k4 = field(t + c4 * h, y + h * (a41 * k1 + a42 * k2 + a43 * k3));
        const Vector k5 = field(t + c5 * h, y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4));
        const Vector k6 =
            field(t + h, y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5));
        const Vector ynew =
            y + h * (a71 * k1 + a73 * k3 + a74 * k4 + a75 * k5 + a76 * k6);
        const double tnew = final_step ? t_end : t + h;
        const Vector k7 = field(tnew, ynew);
        const Vector err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        double en = weighted_norm(err, y, ynew);
        if (!std::isfinite(en) || !ynew.allFinite()) en = 1e10;

        if (en <= 1.0) {
            DenseStep<Dim> step;
            step.t0 = t;
            step.h = tnew - t;
            step.r1 = y;
            step.r2 = ynew - y;
            step.r3 = h * k1 - step.r2;
            step.r4 = step.r2 - h * k7 - step.r3;
            step.r5 = h * (d1 * k1 + d3 * k3 + d4 * k4 + d5 * k5 + d6 * k6 + d7 * k7);

            ++result.accepted;
            t = tnew;
            y = ynew;
            k1 = k7;
            result.t = t;
            result.y = y;
            if (keep) keep->push_back(step);
            if (on_step(step) == StepVerdict::stop) {
                result.status = IntegratorStatus::stopped;
                break;
            }
            if (final_step) {
                result.status = IntegratorStatus::reached_end;
                break;
            }
            // PI step-size controller.
            const double safe = std::max(en, 1e-10);
            double fac = 0.9 * std::pow(safe, -0.7 / 5.0) * std::pow(previous_error, 0.4 / 5.0);
            fac = std::clamp(fac, 0.2, last_rejected ? 1.0 : 10.0);
            previous_error = std::max(en, 1e-4);
            h *= fac;
            last_rejected = false;
        } else {
            ++result.rejected;
            h *= std::max(0.2, 0.9 * std::pow(en, -0.2));
            last_rejected = true;
        }
        if (ctl.max_step > 0.0) h = std::min(h, ctl.max_step);
    }
    return result;
}

}  // namespace paneitz
