#pragma once

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "paneitz/config.hpp"
#include "paneitz/shooting.hpp"

namespace paneitz {

inline constexpr const char* kVersion = "0.1.0";

const std::vector<std::string>& command_names();

/// Per-command flags; unused fields are ignored by other commands.
struct CommandOptions {
    std::optional<double> s;
    std::optional<double> a, b;
    bool trajectory = false;
    bool eigenfunctions = false;
    int count = 5;  // spectrum: eigenvalues beyond λ_0
    int index = 1;
    int cells = 60;
    Rect rect{};

    // coeffs / verify-appendix
    std::optional<int> n, m;
    std::optional<double> lambda0, lambda1;

    std::vector<int> criteria;  // verify-all; empty = all
    int trials = 1000;
    bool timings = false;
};

/// Exit status of a command.
enum Exit { ok = 0, failed = 1, usage = 2 };

/// Runs `command`, writing artifacts and manifest.json under config.out.
/// Human-readable output goes to `log`. Never throws for command errors; a
/// bad config or flag gives Exit::usage.
int run_command(const RunConfig& config, const std::string& command, const CommandOptions& opts,
                std::ostream& log);

/// Manifest for a config that could not be built; returns Exit::usage.
int report_config_error(const std::string& out, const std::string& command,
                        const std::string& error, std::ostream& log);

}  // namespace paneitz
