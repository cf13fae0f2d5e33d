#pragma once

#include <vector>

#include <Eigen/Core>

#include "paneitz/coeffs.hpp"
#include "paneitz/flow.hpp"
#include "paneitz/profile.hpp"

namespace paneitz {

/// Multiple-shooting form of the boundary value problem.
///
/// Unknowns, 4M in total:
///   (a, b)            data at t = 0,
///   X_1 … X_{M−1}     states at the nodes kD/M,
///   (a', b')          data at t = D (u(D), v2(D)).
/// Segment 0 starts from the series at eps; segments 1…M−2 run between
/// nodes; the last segment runs backwards from the series at D − eps.
/// F stacks the 4M matching defects.
class MultipleShooting {
public:
    MultipleShooting(const Profile& p, int segments, double eps_rel = 1e-6);

    int segments() const { return M_; }
    Eigen::Index unknowns() const { return 4 * Eigen::Index(M_); }
    const Profile& profile() const { return p_; }
    double node(int k) const { return p_.length() * k / M_; }
    double eps() const { return eps_; }

    /// Unknown vector of the constant solution u ≡ value.
    Eigen::VectorXd constant(double value = 1.0) const;

    struct Evaluation {
        Eigen::VectorXd F;
        Eigen::MatrixXd J;        ///< ∂F/∂X
        Eigen::MatrixXd dcoeffs;  ///< columns ∂F/∂α, ∂F/∂β
        bool ok = true;           ///< every segment reached its node
    };
    Evaluation evaluate(const PaneitzCoefficients& c, const Eigen::VectorXd& X,
                        bool jacobian = true) const;

    /// Samples the solution encoded by X on points + 1 uniform nodes.
    SolutionProfile assemble(const PaneitzCoefficients& c, const Eigen::VectorXd& X,
                             int points = 800) const;

    /// Unknowns from a single forward solution with data (a, b). Nodes after
    /// the forward flow fails or leaves the box |v| ≤ 10·max(1, a, |b|) keep
    /// the constant guess, and so does the far-end data.
    Eigen::VectorXd from_forward(const PaneitzCoefficients& c, double a, double b) const;

    /// ceil(√r·D/2) clamped to [4, 64], r the growth rate of the linearization at 1.
    static int recommended_segments(const PaneitzCoefficients& c, const Profile& p);

private:
    Profile p_, mirror_;
    int M_;
    double eps_;
};

/// Smallest over largest singular value of ∂F/∂X and the sign of its
/// determinant at the constant solution.
struct TrivialJacobian {
    double rcond = 0.0;
    int det_sign = 0;
    Eigen::VectorXd null_vector;  ///< right singular vector of the smallest singular value
};

TrivialJacobian trivial_jacobian(const MultipleShooting& ms, const PaneitzCoefficients& c);

struct NewtonReport {
    bool converged = false;
    int iterations = 0;
    double residual_norm = 0.0;
};

/// Newton on F(X) = 0 at fixed coefficients.
NewtonReport newton_fixed(const MultipleShooting& ms, const PaneitzCoefficients& c,
                          Eigen::VectorXd& X, int max_iter = 20, double tol = 1e-9);

/// Newton with backtracking on ‖F‖₂, for starts far from a solution.
/// Keeps X(0) = u(0) positive.
NewtonReport newton_damped(const MultipleShooting& ms, const PaneitzCoefficients& c,
                           Eigen::VectorXd& X, int max_iter = 60, double tol = 1e-9);

}  // namespace paneitz
