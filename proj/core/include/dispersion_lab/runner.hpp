#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "dispersion_lab/config.hpp"

namespace dispersion_lab {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitHypothesisViolation = 2;

/// In-memory products of one experiment.
struct ExperimentArtifacts {
    std::string report_json;
    /// Starts with the "# schema=1" line.
    std::string data_csv;
    std::string manifest_json;
    std::vector<std::string> warnings;
    bool hypothesis_violation = false;
};

/// Runs a validated config. Throws dispersion_lab::Error on failure.
ExperimentArtifacts execute_experiment(const ExperimentConfig& config);

struct RunOverrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> output_dir;
};

struct RunOutcome {
    int exit_code = kExitSuccess;
    std::filesystem::path output_dir;
    std::string config_hash;
    /// Diagnostics for the user, one per line.
    std::vector<std::string> messages;
};

/// Validates, executes, and writes report.json, data.csv and manifest.json
/// into the output directory. Nothing is written unless the experiment
/// completes. Exit code 2 flags a hypothesis violation (files are written).
RunOutcome run_experiment(ExperimentConfig config, const RunOverrides& overrides = {});

/// Loads the file first; parse errors give exit code 1 without side effects.
RunOutcome run_config_file(const std::filesystem::path& path, const RunOverrides& overrides = {});

/// Parse and validate only.
RunOutcome validate_config_file(const std::filesystem::path& path);

/// One line per experiment: name, then tagline.
std::string list_experiments();

std::string library_version();

}  // namespace dispersion_lab
