#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace paneitz {

struct VerifyOptions {
    std::uint64_t seed = 20240611;
    int gridsize = 4000;
    int scan_cells = 60;
    int certificate_trials = 1000;
};

struct CriterionResult {
    int id = 0;
    std::string name;
    bool pass = false;
    std::string detail;
    nlohmann::json data;
    double seconds = 0.0;
};

/// Number of acceptance criteria.
constexpr int kCriteria = 11;

/// Runs the listed criteria (all when empty) in order. `on_result` sees each
/// result as soon as it is available.
std::vector<CriterionResult> run_criteria(
    const VerifyOptions& opts, const std::vector<int>& which = {},
    const std::function<void(const CriterionResult&)>& on_result = {});

std::string criterion_name(int id);

/// "PASS [id] name: detail" or "FAIL …".
std::string format_line(const CriterionResult& r);

}  // namespace paneitz
