#pragma once

#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

#include "paneitz/coeffs.hpp"
#include "paneitz/flow.hpp"
#include "paneitz/multishoot.hpp"
#include "paneitz/profile.hpp"
#include "paneitz/sturm.hpp"

namespace paneitz {

/// s ↦ (α(s), β(s)) with derivatives, on the domain s > s_min.
class CoefficientPath {
public:
    enum class Kind { builtin, product, user };

    struct Value {
        double alpha, beta, dalpha, dbeta;
    };

    /// α = s, β = c·s².
    static CoefficientPath builtin(double c, double q);
    /// Einstein product with Λ0 fixed and Λ1 = slope·s, on s > s_min.
    static CoefficientPath product(int n, int m, double lambda0, double slope, double q,
                                   double s_min = 1.0);
    /// Polynomials Σ α_k s^k, Σ β_k s^k on s > s_min.
    static CoefficientPath polynomial(std::vector<double> alpha, std::vector<double> beta,
                                      double q, double s_min = 0.0);

    Kind kind() const { return kind_; }
    double q() const { return q_; }
    double s_min() const { return s_min_; }
    /// c of the builtin path; NaN otherwise.
    double builtin_c() const { return c_; }
    const std::string& descriptor() const { return descriptor_; }

    Value operator()(double s) const { return eval_(s); }
    PaneitzCoefficients at(double s) const;
    nlohmann::json to_json() const;

private:
    Kind kind_ = Kind::builtin;
    double q_ = 2.0;
    double s_min_ = 0.0;
    double c_ = 0.0;
    std::string descriptor_;
    nlohmann::json params_;
    std::function<Value(double)> eval_;
};

/// ½(a − √(a² + 4b(q−1))).
double phi(double a, double b, double q);
double phi(const CoefficientPath& path, double s);

/// 2λ(1 − √(1 + 4c(q−1)))^{-1}.
double builtin_instant(double lambda, double c, double q);

/// Sampled structural conditions on a path.
struct HypothesisReport {
    bool discriminant = true;          ///< α² > 4β
    bool increasing = true;            ///< α, β > 0 and α′, β′ > 0
    std::optional<bool> limit_at_zero; ///< only for paths defined from 0
    bool limit_at_infinity = true;
    bool phi_decreasing = true;
    std::vector<std::string> failures;

    bool ok() const
    {
        return discriminant && increasing && limit_at_zero.value_or(true) && limit_at_infinity &&
               phi_decreasing;
    }
    nlohmann::json to_json() const;
};

HypothesisReport validate_hypotheses(const CoefficientPath& path, double s_hi, int samples = 400);

struct BifurcationPoint {
    int index = 0;
    double s = 0.0;
    double lambda = 0.0;
    double tau = 0.0;
    Eigen::Vector2d kernel_tangent = Eigen::Vector2d::Zero();  ///< (δa, δb), unit length
    std::optional<double> closed_form;
    double phi_mismatch = 0.0;
    bool valid = false;
};

/// φ(s) = λ_i for 1 ≤ i ≤ i_max, by bracketing and bisection.
/// Throws std::runtime_error when the sampled hypotheses fail or a root
/// cannot be bracketed.
std::vector<BifurcationPoint> instants(const CoefficientPath& path, const Spectrum& spectra,
                                       int i_max);

struct ContinuationOptions {
    double s_max = 0.0;  ///< 0 selects 3·s_i
    double h0 = 1e-3;    ///< first step, scaled units
    double h_max = 0.1;
    int max_points = 4000;
    int max_iter = 8;
    double tol = 1e-9;
    int max_halvings = 5;
    int profile_points = 800;
    int segments = 0;  ///< 0 picks from the coefficients at s_max
    double eps_rel = 1e-6;
};

struct BranchPoint {
    double s = 0.0;
    double a = 0.0, b = 0.0;
    Eigen::VectorXd X;
    SolutionProfile profile;
    QualityReport quality;
    int iterations = 0;
};

enum class BranchStatus { active, reached_s_max, step_failure, positivity_lost, corrector_failure };
std::string to_string(BranchStatus s);

struct Branch {
    BifurcationPoint origin;
    std::vector<BranchPoint> points;
    int critical_point_count = 0;  ///< origin.index + 1 when the census holds
    BranchStatus status = BranchStatus::active;
    std::string message;
    double tangent_cosine = 0.0;  ///< numeric null vector vs kernel_tangent

    std::shared_ptr<const CoefficientPath> path;
    std::shared_ptr<const MultipleShooting> shooting;

    double s_lo() const;
    double s_hi() const;
    /// Critical-point count equal at every stored point.
    bool census_constant() const;
    /// s strictly increasing after the first `skip` points.
    bool monotone_after(int skip = 1) const;
};

/// Pseudo-arclength continuation from (1, 0, s_i) along the kernel.
Branch continue_branch(const CoefficientPath& path, const Profile& p, const BifurcationPoint& bp,
                       const ContinuationOptions& opts = {});

/// Solution on `branch` at parameter s, polished at fixed s.
std::optional<BranchPoint> branch_at(const Branch& branch, double s);

/// Minimum distance of (a, b) between two branches over common s samples.
double branch_separation(const Branch& x, const Branch& y, int samples = 50);

struct CensusEntry {
    int branch = 0;          ///< position in the input list
    int origin_index = 0;    ///< i of the branch's bifurcation point
    bool reflection = false;
    double a = 0.0, b = 0.0;
    int critical_point_count = 0;
    bool positive = false;
    Eigen::VectorXd u;
};

struct CensusReport {
    double s = 0.0;
    std::vector<CensusEntry> entries;  ///< distinct solutions
    std::map<int, int> by_critical_points;
    int floor = 0;  ///< number of instants below s among the inputs
    bool meets_floor = false;
    bool distinct_counts = false;  ///< floor many pairwise different critical-point counts
    nlohmann::json to_json() const;
};

CensusReport census_at(const std::vector<Branch>& branches, double s);

}  // namespace paneitz
