#pragma once

#include <optional>
#include <string>
#include <vector>

#include "paneitz/coeffs.hpp"
#include "paneitz/flow.hpp"
#include "paneitz/profile.hpp"

namespace paneitz {

struct ShootOptions {
    double eps_rel = 1e-6;  ///< endpoint offset as a fraction of D
    FlowOptions flow{};
};

/// Far-end defect of the shooting map.
///
/// With τ = D − t, regular solutions satisfy v1 ≈ −v2·τ/(1+j1) and
/// v3 ≈ −β(v0^q − v0)·τ/(1+j1) near D. The residual is the remainder,
/// scaled by H(t) so it measures the amplitude of the singular mode and
/// does not depend on eps:
///   r1 = H·(v1 + v2·τ/(1+j1)),  r3 = H·(v3 + β(v0^q − v0)·τ/(1+j1)).
/// Early stops report H·v1 and H·v3 at the stop, which carry the cone signs.
struct ShootResidual {
    double r1 = 0.0;
    double r3 = 0.0;
    bool terminated_early = false;
    std::optional<Certificate> certificate;  ///< first cone entered, stopped or not
    Termination termination = Termination::reached_end;
    bool nonpositive = false;
    State final_state;

    double norm() const { return std::hypot(r1, r3); }
};

/// Requires a > 0.
ShootResidual shoot(const PaneitzCoefficients& c, const Profile& p, double a, double b,
                    const ShootOptions& opts = {});

/// The forward trajectory behind shoot.
Trajectory shoot_trajectory(const PaneitzCoefficients& c, const Profile& p, double a, double b,
                            const ShootOptions& opts = {});

enum class SolveStatus { converged, trivial, nonpositive, no_convergence };
std::string to_string(SolveStatus s);

struct SolveOptions {
    int max_iter = 25;
    double tol = 1e-9;
    double trivial_radius = 1e-8;
    int profile_points = 800;
    ShootOptions shoot{};
};

struct SolveResult {
    SolveStatus status = SolveStatus::no_convergence;
    double a = 0.0, b = 0.0;
    int iterations = 0;
    double residual_norm = 0.0;
    std::optional<SolutionProfile> profile;
    std::optional<QualityReport> quality;
};

/// Damped Newton on (a, b) ↦ (r1, r3) with forward differences.
SolveResult solve(const PaneitzCoefficients& c, const Profile& p, double guess_a, double guess_b,
                  const SolveOptions& opts = {});

struct Rect {
    double a_min = 0.2, a_max = 3.0;
    double b_min = -5.0, b_max = 5.0;
};

struct ScanNode {
    double a = 0.0, b = 0.0;
    ShootResidual r;
};

struct ScanCell {
    int i = 0, j = 0;  ///< lower-left node indices (a, b)
    double a0 = 0.0, a1 = 0.0, b0 = 0.0, b1 = 0.0;
    bool sign_change = false;  ///< r1 and r3 both change sign over the corners
    bool candidate = false;    ///< the sign change survives quadtree refinement
    bool pruned = false;     ///< all four corners fired the same cone
    bool trivial = false;    ///< the closed cell contains (1, 0)
};

struct ScanResult {
    int na = 0, nb = 0;  ///< nodes per axis
    std::vector<ScanNode> nodes;  ///< row-major in b, then a
    std::vector<ScanCell> cells;
    int nontrivial_candidates() const;
    const ScanNode& node(int i, int j) const { return nodes[std::size_t(j) * na + i]; }
};

/// Evaluates shoot on a (cells_a + 1) × (cells_b + 1) node grid. Runs are not
/// stopped by certificates; a cell is pruned when all corners entered the same cone.
/// Sign-change cells are split into quarters `refine` times; a cell stays a
/// candidate while some sub-cell still has both sign changes.
ScanResult scan(const PaneitzCoefficients& c, const Profile& p, const Rect& rect, int cells_a,
                int cells_b, const ShootOptions& opts = {}, int refine = 6);

}  // namespace paneitz
