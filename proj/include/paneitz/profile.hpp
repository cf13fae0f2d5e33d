#pragma once

#include <array>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "paneitz/spline.hpp"

namespace paneitz {

/// h(τ) ≈ exponent/τ + Σ_k regular[k]·τ^k near an endpoint (τ = distance to it).
struct EndpointExpansion {
    double exponent = 0.0;
    std::array<double, 4> regular{};
};

/// Reduced geometry of an isoparametric foliation: the interval [0, D],
/// the mean curvature h of the level sets and the weight H = exp ∫_{D/2} h.
///
/// Immutable; copies share the tabulated data.
class Profile {
public:
    enum class Kind { sphere, tabulated };

    /// Cartan–Münzner datum of degree k on S^n:
    /// h(t) = (n−1)cot(kt) + ck/(2 sin kt) on (0, π/k).
    /// `require_antisymmetric` rejects c ≠ 0.
    static Profile sphere(int n, int k, double c = 0.0, bool require_antisymmetric = false);

    /// User profile from interior samples of h. The singular parts
    /// j0/t and −j1/(D−t) are added analytically; the remainder is splined.
    static Profile tabulated(double D, double j0, double j1, std::vector<double> t,
                             std::vector<double> h);

    Kind kind() const { return kind_; }
    double length() const { return D_; }
    double j0() const { return j0_; }
    double j1() const { return j1_; }
    bool antisymmetric() const { return antisymmetric_; }
    /// Recorded at construction by sampling h'; not enforced.
    bool decreasing() const { return decreasing_; }

    int sphere_n() const { return n_; }
    int sphere_k() const { return k_; }
    double sphere_c() const { return c_; }

    double h(double t) const;
    double dh(double t) const;
    double d2h(double t) const;
    /// H(t); zero at both endpoints, one at D/2.
    double weight(double t) const;

    EndpointExpansion start_expansion() const;
    /// The same geometry seen from the far end, τ = D − t:
    /// h̃(τ) = −h(D − τ), exponents swapped, H̃(τ) = H(D − τ).
    Profile mirrored() const;

    /// Tabulated samples (t, h); empty for sphere profiles.
    std::vector<std::array<double, 2>> samples() const;

    std::string describe() const;

private:
    struct Table {
        CubicSpline regular;  // h − j0/t + j1/(D−t)
        std::vector<double> t, h;
    };

    Profile() = default;
    void finalize();

    Kind kind_ = Kind::sphere;
    double D_ = 0.0;
    double j0_ = 0.0, j1_ = 0.0;
    bool antisymmetric_ = false;
    bool decreasing_ = false;
    int n_ = 0, k_ = 0;
    double c_ = 0.0;
    std::shared_ptr<const Table> table_;
};

/// H(t) with a range check (throws std::out_of_range outside [0, D]).
double weight_H(const Profile& p, double t);

/// True iff |h(D/2 − t) + h(D/2 + t)| ≤ tol on `samples` interior points.
bool check_antisymmetry(const Profile& p, int samples, double tol);

nlohmann::json to_json(const Profile& p);
Profile profile_from_json(const nlohmann::json& j);

}  // namespace paneitz
