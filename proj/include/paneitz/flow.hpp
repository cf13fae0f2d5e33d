#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "paneitz/coeffs.hpp"
#include "paneitz/dormand_prince.hpp"
#include "paneitz/profile.hpp"

namespace paneitz {

/// (v0, v1, v2, v3) with v0 = u, v1 = u', v2 = u'' + h u',
/// v3 = u''' + h u'' + h' u' − α u'.
using StateVector = Eigen::Vector4d;

struct State {
    double t = 0.0;
    StateVector v = StateVector::Zero();
};

/// Right-hand side of the first-order system at mean curvature `h`:
///   v0' = v1, v1' = v2 − h v1, v2' = v3 + α v1, v3' = β(v0^q − v0) − h v3.
StateVector paneitz_field(const PaneitzCoefficients& c, double h, const StateVector& v);

/// Regular state at t = eps with v0(0) = a, v2(0) = b, from the endpoint series.
/// Throws std::invalid_argument unless 0 < eps ≤ D/10.
State series_start(const PaneitzCoefficients& c, const Profile& p, double a, double b, double eps);

/// Regular state at t = D − eps with v0(D) = a_end, v2(D) = b_end.
State series_end(const PaneitzCoefficients& c, const Profile& p, double a_end, double b_end,
                 double eps);

/// The reflection t ↦ D − t acting on states: (v0, −v1, v2, −v3).
StateVector reflect(const StateVector& v);

/// Sign-cone witnesses that a trajectory cannot be a global nonnegative solution.
struct Certificate {
    enum class Cone { negative, positive };
    Cone cone = Cone::negative;
    double t = 0.0;
    StateVector state = StateVector::Zero();

    std::string name() const { return cone == Cone::negative ? "negative-cone" : "positive-cone"; }
};

/// Point test: negative cone (v0 < 1, v1, v2, v3 < 0) or positive cone
/// (v0 > 1, v1, v2, v3 > 0).
std::optional<Certificate> cone_membership(double t, const StateVector& v);

enum class Termination { reached_end, certificate, blowup, step_failure };
std::string to_string(Termination t);

struct FlowOptions {
    double rtol = 1e-10;
    double atol = 1e-12;
    double blowup = 1e8;
    bool certificates = false;  ///< stop when a sign cone is entered
    long max_steps = 500000;
};

class Trajectory {
public:
    const std::vector<DenseStep<4>>& steps() const { return steps_; }
    double start_time() const { return start_.t; }
    double end_time() const { return final_.t; }
    const State& start() const { return start_; }
    const State& final_state() const { return final_; }
    Termination termination() const { return termination_; }
    const std::optional<Certificate>& certificate() const { return certificate_; }
    /// Some accepted state had v0 < 0.
    bool nonpositive() const { return nonpositive_; }

    /// Dense evaluation on [start_time, end_time].
    StateVector operator()(double t) const;

private:
    friend Trajectory integrate(const PaneitzCoefficients&, const Profile&, const State&, double,
                                const FlowOptions&);
    std::vector<DenseStep<4>> steps_;
    State start_, final_;
    Termination termination_ = Termination::reached_end;
    std::optional<Certificate> certificate_;
    bool nonpositive_ = false;
};

Trajectory integrate(const PaneitzCoefficients& c, const Profile& p, const State& start,
                     double t_end, const FlowOptions& opts = {});

/// First cone entered along the trajectory's accepted states, if any.
std::optional<Certificate> certificate_nonglobal(const Trajectory& traj,
                                                 const PaneitzCoefficients& c);

struct CriticalPoint {
    double t = 0.0;
    double u = 0.0;
    double d2u = 0.0;
};

/// A solution sampled on a uniform grid of [0, D].
struct SolutionProfile {
    Eigen::VectorXd t, u, du, d2u, d3u;
    Eigen::Matrix<double, 4, Eigen::Dynamic> states;  ///< v0..v3 at t
    std::vector<CriticalPoint> critical_points;       ///< endpoints included
    int critical_point_count = 0;
    double min_value = 0.0;
    double max_value = 0.0;
    double nondegeneracy_margin = 0.0;  ///< min |u''| at critical points / max |u''|
    bool degenerate = false;
    bool constant = false;
    double a = 1.0, b = 0.0;          ///< u(0), v2(0)
    double a_end = 1.0, b_end = 0.0;  ///< u(D), v2(D)
};

/// Nondegeneracy floor: |u''| ≥ 1e−6·max|u''| at every critical point.
constexpr double kNondegeneracyFloor = 1e-6;

/// Fills u-derivatives, extrema and the critical-point census from states on
/// a uniform grid. `dense` evaluates the continuous solution for bisection;
/// the endpoint states must be the exact boundary data.
SolutionProfile build_solution_profile(const PaneitzCoefficients& c, const Profile& p,
                                       const Eigen::VectorXd& t,
                                       const Eigen::Matrix<double, 4, Eigen::Dynamic>& states,
                                       const std::function<StateVector(double)>& dense);

/// The constant function `value` on `points` + 1 grid nodes.
SolutionProfile constant_solution(const PaneitzCoefficients& c, const Profile& p, double value,
                                  int points = 400);

/// Max-norm of the fourth-order equation on interior nodes outside a
/// 5%·D collar; u'''' by fourth-order central differences of u'''.
double residual(const PaneitzCoefficients& c, const Profile& p, const SolutionProfile& sol);

struct QualityReport {
    double identity_relative = 0.0;  ///< |∫(u^q − u)H| / ∫u^q H
    double max_w2 = 0.0;             ///< max (v2 − c·v0)
    double min_u = 0.0;
    double max_u = 0.0;
    bool positive = false;
    bool crosses_one = false;
    bool constant = false;
    bool degenerate = false;
    int critical_point_count = 0;
    double nondegeneracy_margin = 0.0;
    double equation_residual = 0.0;

    nlohmann::json to_json() const;
};

QualityReport quality_checks(const PaneitzCoefficients& c, const Profile& p,
                             const SolutionProfile& sol);

}  // namespace paneitz
