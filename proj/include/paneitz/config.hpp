#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>

#include <nlohmann/json.hpp>

#include "paneitz/bifurcation.hpp"
#include "paneitz/coeffs.hpp"
#include "paneitz/profile.hpp"

namespace paneitz {

/// Raised for malformed configuration; the CLI maps it to exit status 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct RunConfig {
    nlohmann::json profile = {{"kind", "sphere"}, {"n", 3}, {"k", 1}, {"c", 0.0}};
    /// source: fixed {alpha, beta} | builtin {c} | product {n, m, lambda0, slope, s_min}
    /// | polynomial {alpha: [...], beta: [...], s_min}
    nlohmann::json coefficients = {{"source", "builtin"}, {"c", 0.2}};
    double q = 3.0;

    int gridsize = 4000;
    double rtol = 1e-10;
    double atol = 1e-12;
    double eps_rel = 1e-6;
    double s_max = 0.0;  ///< 0: 3·s_{i_max}
    int i_max = 3;
    int profile_points = 800;

    std::string out = "paneitz-out";
    std::uint64_t seed = 20240611;

    /// Throws ConfigError.
    void validate() const;
    nlohmann::json to_json() const;
    static RunConfig from_json(const nlohmann::json& j);
    static RunConfig load(const std::string& path);

    Profile make_profile() const;
    bool has_path() const;
    CoefficientPath make_path() const;
    /// Fixed coefficients, or the path evaluated at `s`.
    PaneitzCoefficients make_coefficients(std::optional<double> s) const;
};

}  // namespace paneitz
