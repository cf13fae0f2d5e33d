#pragma once

#include <vector>

#include <Eigen/Core>

#include "paneitz/coeffs.hpp"
#include "paneitz/profile.hpp"

namespace paneitz {

/// Finite-volume discretization of (H v')' = λ H v on a uniform cell grid:
///   stiffness(v)_i = [H_{i+1/2}(v_{i+1} − v_i) − H_{i−1/2}(v_i − v_{i−1})] / Δ,
///   mass_i = ∫_{cell i} H.
/// H vanishes on the two boundary faces, so no boundary rows are needed.
struct WeightedPencil {
    double spacing = 0.0;
    Eigen::VectorXd centers;   ///< cell centres
    Eigen::VectorXd mass;      ///< diagonal mass matrix
    Eigen::VectorXd diagonal;  ///< stiffness diagonal
    Eigen::VectorXd offdiag;   ///< stiffness sub/super-diagonal (size n−1)

    Eigen::Index size() const { return centers.size(); }
    /// stiffness · v
    Eigen::VectorXd apply(const Eigen::VectorXd& v) const;
};

WeightedPencil assemble_operator(const Profile& p, int gridsize);

/// Eigenvalues of a symmetric tridiagonal matrix, largest first, by
/// Sturm-sequence bisection.
std::vector<double> tridiagonal_top_eigenvalues(const Eigen::VectorXd& diagonal,
                                                const Eigen::VectorXd& offdiag, int count);

struct Spectrum {
    std::vector<double> eigenvalues;   ///< 0 = λ_0 > λ_1 > …, fine mesh
    std::vector<double> extrapolated;  ///< two-mesh Richardson values
    std::vector<int> interior_zero_counts;
    std::vector<double> endpoint_values;  ///< φ_i(0) > 0
    Eigen::VectorXd grid;                 ///< cell centres
    Eigen::VectorXd mass;
    Eigen::MatrixXd eigenfunctions;  ///< column i = φ_i at the cell centres, ∫φ_i²H = 1
    double length = 0.0;

    int count() const { return int(eigenvalues.size()) - 1; }
    /// φ_i(t), linear between centres and extrapolated to the endpoints.
    double eigenfunction(int i, double t) const;
    /// Discrete ∫ f g H over the grid.
    double weighted_inner(const Eigen::VectorXd& f, const Eigen::VectorXd& g) const;
    /// λ_1², the first positive eigenvalue of the bilaplacian restricted to
    /// invariant functions ("invariant bilaplacian gap").
    double invariant_bilaplacian_gap() const;
};

/// Top `count` + 1 eigenpairs (including λ_0 = 0). Requires count ≤ gridsize/10.
Spectrum spectrum(const Profile& p, int count, int gridsize);

/// λ_i² − α λ_i, eigenvalue of L² − αL on φ_i.
double fourth_order_eigenvalue(const Spectrum& s, int i, const PaneitzCoefficients& coeffs);

/// Strict sign changes of f, ignoring entries with |f| ≤ deadband.
int count_sign_changes(const Eigen::VectorXd& f, double deadband = 1e-10);

}  // namespace paneitz
