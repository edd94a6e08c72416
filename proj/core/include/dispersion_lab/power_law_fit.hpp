#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace dispersion_lab {

struct LogLogFit {
    double slope = 0.0;
    double intercept = 0.0;  // log of the prefactor
    double ci_low = 0.0;     // 95% bootstrap interval on the slope
    double ci_high = 0.0;
};

struct FitOptions {
    std::size_t min_pairs = 8;
    double min_decades = 1.5;
    std::size_t bootstrap_resamples = 1000;
    std::uint64_t bootstrap_seed = 0x5eed;
};

/// Ordinary least squares of log(value) on log(abscissa) with a percentile
/// bootstrap interval on the slope. Requires positive data, at least
/// `min_pairs` pairs, and an abscissa span of `min_decades`; throws
/// ConditioningError otherwise.
LogLogFit fit_decay_exponent(std::span<const double> abscissa, std::span<const double> values,
                             const FitOptions& options = {});

/// Raw samples plus the fitted power law, as written to report.json.
struct EstimateReport {
    std::vector<double> abscissa;
    std::vector<double> values;
    std::optional<LogLogFit> fit;
    std::size_t n_paths = 0;
    std::uint64_t seed = 0;
    std::map<std::string, double> metrics;
    /// Extra per-abscissa columns (ratios, right-hand sides, ...).
    std::map<std::string, std::vector<double>> series;
    std::vector<std::string> warnings;
    bool hypothesis_violation = false;
};

}  // namespace dispersion_lab
