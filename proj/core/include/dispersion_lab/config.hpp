#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "dispersion_lab/grid_model.hpp"

namespace dispersion_lab {

enum class ExperimentKind {
    scatter_sweep,
    resonance,
    resolvent_check,
    born_check,
    stone_density,
    sde_convergence,
    dispersive,
    expectation_decay,
    convolution_lemma,
    strichartz_hom,
    strichartz_inhom,
};

struct ExperimentParam {
    std::string name;
    double default_value = 0.0;
    std::string help;
};

struct ExperimentInfo {
    ExperimentKind kind;
    std::string name;
    std::string tagline;
    /// Experiment-specific knobs accepted under `params:`.
    std::vector<ExperimentParam> params;
};

/// All experiments in their stable listing order.
std::span<const ExperimentInfo> experiment_catalog();
const ExperimentInfo& experiment_info(ExperimentKind kind);
std::string_view to_string(ExperimentKind kind);
std::optional<ExperimentKind> parse_experiment(std::string_view name);

struct ExperimentConfig {
    struct GridSection {
        std::size_t n_points = 2048;
        double L_box = 40.0;
        friend bool operator==(const GridSection&, const GridSection&) = default;
    };
    struct StochasticSection {
        double T = 8.0;
        std::size_t n_steps = 1024;
        std::size_t n_paths = 200;
        std::uint64_t seed = 42;
        friend bool operator==(const StochasticSection&, const StochasticSection&) = default;
    };
    struct NormSection {
        double rho = 4.0;
        double r = 4.0;
        double p = 4.0;
        friend bool operator==(const NormSection&, const NormSection&) = default;
    };

    ExperimentKind experiment = ExperimentKind::dispersive;
    PotentialSpec potential;
    GridSection grid;
    StochasticSection stochastic;
    NormSection norms;
    /// Every parameter of the experiment, defaults filled in.
    std::map<std::string, double> params;
    std::string output_dir = "out";

    double param(const std::string& name) const;

    friend bool operator==(const ExperimentConfig& a, const ExperimentConfig& b);
};

/// Defaults for an experiment: grid, stochastic and norm sections tuned to
/// its protocol, plus every parameter at its default.
ExperimentConfig default_config(ExperimentKind kind);

/// Parses the YAML config grammar (see README). Missing fields take the
/// experiment's defaults. Throws ValidationError naming the offending field
/// path for unknown keys, wrong types and unknown experiments.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Canonical text: every field, fixed order, round-trip exact numbers.
std::string serialize_config(const ExperimentConfig& config);

/// FNV-1a 64 of the canonical text, as 16 hex digits.
std::string config_hash(const ExperimentConfig& config);

/// Semantic checks ("field.path: message"); empty when the config is usable.
std::vector<std::string> validate_config(const ExperimentConfig& config);

}  // namespace dispersion_lab
