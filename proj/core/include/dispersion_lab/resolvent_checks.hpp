#pragma once

#include <vector>

#include "dispersion_lab/grid_model.hpp"
#include "dispersion_lab/spectral_operator.hpp"

namespace dispersion_lab {

/// Comparison of the Jost resolvent kernel against the finite-difference
/// resolvent (H_grid - (lambda^2 + i eps))^{-1} on a large box, extrapolated
/// to eps -> 0+. Both kernels are evaluated on probes x, y in `probes`.
struct ResolventCheckOptions {
    double jost_half_width = 40.0;
    std::size_t jost_points = 2048;
    /// Reference box; probes must be nodes of it.
    double oracle_half_width = 3000.0;
    double oracle_spacing = 0.01;
    /// eps = epsilon_per_lambda * lambda.
    double epsilon_per_lambda = 0.01;
    std::vector<double> probes{-2.0, -1.0, 0.0, 1.0, 2.0};
};

struct ResolventProbe {
    double x = 0.0;
    double y = 0.0;
    cplx jost;
    cplx oracle;
    double relative_error = 0.0;
};

struct ResolventCheckResult {
    double lambda = 0.0;
    std::vector<ResolventProbe> probes;
    double max_relative_error = 0.0;
};

ResolventCheckResult check_jost_resolvent(const PotentialSpec& spec, double lambda,
                                          const ResolventCheckOptions& options = {});

/// Born series for R_V(E + i0) f against the extrapolated finite-difference
/// resolvent, with E = energy_factor * lambda0.
struct BornCheckOptions {
    double energy_factor = 4.0;
    int n_max = 20;
    double born_half_width = 8.0;
    std::size_t born_points = 4097;
    double source_width = 1.0;
    /// Oracle spacing is born spacing / refinement.
    std::size_t refinement = 2;
    double oracle_half_width = 3000.0;
    double epsilon = 0.15;
};

struct BornCheckResult {
    double energy = 0.0;
    double lambda0 = 0.0;
    /// ||V||_1 / (2 sqrt(E)).
    double ratio_bound = 0.0;
    std::vector<double> term_sup_norms;
    std::vector<double> term_ratios;
    double max_term_ratio = 0.0;
    /// ||born - oracle||_2 / ||oracle||_2 on the Born grid.
    double relative_error = 0.0;
};

BornCheckResult check_born_series(const PotentialSpec& spec, const BornCheckOptions& options = {});

}  // namespace dispersion_lab
