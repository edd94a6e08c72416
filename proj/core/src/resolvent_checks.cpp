#include "dispersion_lab/resolvent_checks.hpp"

#include <algorithm>
#include <cmath>

#include "dispersion_lab/errors.hpp"
#include "dispersion_lab/scattering.hpp"

namespace dispersion_lab {

namespace {

Grid box_with_spacing(double half_width, double spacing) {
    const double intervals = std::round(2.0 * half_width / spacing);
    return Grid(half_width, static_cast<std::size_t>(intervals) + 1);
}

std::size_t node_of(const Grid& grid, double x) {
    const std::size_t i = grid.nearest_index(x);
    if (std::abs(grid.x(i) - x) > 1e-9 * std::max(1.0, std::abs(x))) {
        throw ContractViolation("probe x = " + std::to_string(x) + " is not a node of the reference grid");
    }
    return i;
}

}  // namespace

ResolventCheckResult check_jost_resolvent(const PotentialSpec& spec, double lambda,
                                          const ResolventCheckOptions& options) {
    if (!(lambda > 0.0)) throw DomainError("resolvent check needs lambda > 0");
    const PotentialGrid jost_potential =
        sample_potential(spec, Grid(options.jost_half_width, options.jost_points));
    const JostResolvent jost(jost_potential, lambda);

    const Grid oracle_grid = box_with_spacing(options.oracle_half_width, options.oracle_spacing);
    const PotentialGrid oracle_potential = sample_potential(spec, oracle_grid);
    const double energy = lambda * lambda;
    const double epsilon = options.epsilon_per_lambda * lambda;
    const double h = oracle_grid.spacing();

    ResolventCheckResult result;
    result.lambda = lambda;
    for (double y : options.probes) {
        const std::size_t j = node_of(oracle_grid, y);
        State delta = State::Zero(static_cast<Eigen::Index>(oracle_grid.size()));
        delta[static_cast<Eigen::Index>(j)] = 1.0 / h;
        const State column =
            resolvent_boundary_value(oracle_potential, energy, epsilon, ResolventBranch::plus, delta);
        for (double x : options.probes) {
            const std::size_t i = node_of(oracle_grid, x);
            ResolventProbe probe;
            probe.x = x;
            probe.y = y;
            probe.jost = jost(x, y);
            probe.oracle = column[static_cast<Eigen::Index>(i)];
            probe.relative_error = std::abs(probe.jost - probe.oracle) / std::abs(probe.oracle);
            result.max_relative_error = std::max(result.max_relative_error, probe.relative_error);
            result.probes.push_back(probe);
        }
    }
    return result;
}

BornCheckResult check_born_series(const PotentialSpec& spec, const BornCheckOptions& options) {
    BornCheckResult result;
    result.lambda0 = lambda0(spec);
    result.energy = options.energy_factor * result.lambda0;
    result.ratio_bound = std::sqrt(result.lambda0) / (2.0 * std::sqrt(result.energy));

    const Grid born_grid(options.born_half_width, options.born_points);
    const PotentialGrid born_potential = sample_potential(spec, born_grid);
    auto source = [&](double x) {
        const double s = x / options.source_width;
        return std::exp(-0.5 * s * s);
    };
    State f(static_cast<Eigen::Index>(born_grid.size()));
    for (std::size_t i = 0; i < born_grid.size(); ++i) f[static_cast<Eigen::Index>(i)] = source(born_grid.x(i));

    const BornSeries series =
        born_series_apply(born_potential, result.energy, ResolventBranch::plus, f, options.n_max);
    result.term_sup_norms = series.term_sup_norms;
    for (std::size_t n = 1; n < series.term_sup_norms.size(); ++n) {
        const double ratio = series.term_sup_norms[n] / series.term_sup_norms[n - 1];
        result.term_ratios.push_back(ratio);
        result.max_term_ratio = std::max(result.max_term_ratio, ratio);
    }

    const double oracle_spacing = born_grid.spacing() / static_cast<double>(options.refinement);
    const Grid oracle_grid = box_with_spacing(options.oracle_half_width, oracle_spacing);
    const PotentialGrid oracle_potential = sample_potential(spec, oracle_grid);
    State g(static_cast<Eigen::Index>(oracle_grid.size()));
    for (std::size_t i = 0; i < oracle_grid.size(); ++i) g[static_cast<Eigen::Index>(i)] = source(oracle_grid.x(i));
    const State oracle = resolvent_boundary_value(oracle_potential, result.energy, options.epsilon,
                                                  ResolventBranch::plus, g);

    double diff2 = 0.0;
    double ref2 = 0.0;
    for (std::size_t i = 0; i < born_grid.size(); ++i) {
        const cplx ref = oracle[static_cast<Eigen::Index>(node_of(oracle_grid, born_grid.x(i)))];
        diff2 += std::norm(series.sum[static_cast<Eigen::Index>(i)] - ref);
        ref2 += std::norm(ref);
    }
    result.relative_error = std::sqrt(diff2 / ref2);
    return result;
}

}  // namespace dispersion_lab
