#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "dispersion_lab/norms.hpp"
#include "dispersion_lab/power_law_fit.hpp"
#include "dispersion_lab/spectral_operator.hpp"
#include "dispersion_lab/stochastic.hpp"

namespace dispersion_lab {

/// Normalized Gaussian exp(-x^2 / (2 width^2)) on the grid, scaled to unit L^p norm.
State gaussian_state(const Grid& grid, double width, double p_norm);

// --- sup-norm decay -------------------------------------------------------

struct DispersiveOptions {
    double t_min = 0.5;
    double t_max = 8.0;
    std::size_t times_per_path = 16;
    /// Samples with |beta(t)| < beta_min are censored from the fit.
    double beta_min = 0.25;
    bool project = true;
    /// Below this every sup-norm counts as zero and no fit is attempted.
    double zero_threshold = 1e-8;
    FitOptions fit{};
};

/// Samples x = |beta(t)|, v = ||e^{-i beta(t) H} P_ac u0||_inf / ||u0||_1 over
/// the ensemble and fits v ~ x^slope. A resonant (nonzero) potential is run
/// anyway and flagged through `hypothesis_violation`.
EstimateReport dispersive_experiment(const DiscreteHamiltonian& H, const BrownianEnsemble& ensemble,
                                     const State& u0, const DispersiveOptions& options = {});

struct ExpectationDecayOptions {
    double p = 1.0;
    double t_min = 0.5;
    double t_max = 16.0;
    std::size_t n_times = 16;
    bool project = true;
    FitOptions fit{};
};

/// (E ||e^{-i beta(t) H} P_ac u0||_inf^p)^{1/p} / ||u0||_1 against t. The
/// slope interval comes from resampling paths. Throws DomainError unless
/// 1 <= p < 2.
EstimateReport expectation_decay_experiment(const DiscreteHamiltonian& H,
                                            const BrownianEnsemble& ensemble, const State& u0,
                                            const ExpectationDecayOptions& options = {});

/// Same statistic with the propagator replaced by its bound |beta(t)|^{-1/2}.
EstimateReport expectation_decay_abscissa_only(const BrownianEnsemble& ensemble,
                                               const ExpectationDecayOptions& options = {});

/// E|Z|^q for standard normal Z, by Gauss-free substitution quadrature (q > -1).
double normal_abs_moment(double q);

// --- Brownian convolution bound ------------------------------------------

struct ConvolutionLemmaOptions {
    double alpha = 0.5;
    std::vector<double> horizons{0.25, 0.3536, 0.5, 0.7071, 1.0, 1.4142, 2.0, 2.8284, 4.0};
    std::size_t n_paths = 500;
    std::size_t n_steps = 256;
    std::uint64_t seed = 42;
    std::function<double(double)> forcing = [](double) { return 1.0; };
    FitOptions fit{.min_pairs = 5, .min_decades = 1.0};
};

/// Monte Carlo E int_0^T (int_0^t |beta(t) - beta(s)|^{-alpha} |f(s)| ds)^2 dt
/// on a T grid. Inner integral by the left-endpoint rule (s < t strictly,
/// exact ties censored), outer by Simpson. Series "ratio" holds
/// LHS / (T^{2-alpha} int_0^T |f|^2).
EstimateReport convolution_lemma_experiment(const ConvolutionLemmaOptions& options);

// --- Strichartz scalings --------------------------------------------------

struct StrichartzOptions {
    double rho = 4.0;  // used by the inhomogeneous bound; homogeneous uses rho = r
    double r = 4.0;
    double p = 4.0;
    std::vector<double> horizons{0.25, 0.3536, 0.5, 0.7071, 1.0, 1.4142, 2.0, 2.8284, 4.0};
    std::size_t n_paths = 64;
    std::size_t n_times = 64;
    std::uint64_t seed = 42;
    bool project = true;
    FitOptions fit{.min_pairs = 5, .min_decades = 1.0};
};

/// ||e^{-i beta(t) H} P_ac u0||_{L^r(Omega; L^r(0,T; L^p_x))} / ||u0||_2 per T.
/// Series "ratio" is LHS / T^{mu/2} with mu from mu_homogeneous.
EstimateReport strichartz_homogeneous_experiment(const DiscreteHamiltonian& H, const State& u0,
                                                 const StrichartzOptions& options);

/// Adapted forcing: receives beta(t_0..t_k) only, so it cannot peek ahead.
using AdaptedForcing =
    std::function<State(std::span<const double> beta_prefix, std::size_t k, double t)>;

/// Duhamel term D(t_i) = sum_{j<i} dt S(t_i, t_j) P_ac f(t_j) for one path,
/// columns are t_0..t_n of the ensemble.
Eigen::MatrixXcd duhamel_path(const DiscreteHamiltonian& H, const BrownianEnsemble& ensemble,
                              std::size_t path, const AdaptedForcing& forcing);

/// ||D||_{L^rho(Omega; L^r(0,T; L^p))} against
/// T^mu ||f||_{L^rho(Omega; L^{r'}(0,T; L^{p'}))}, mu from mu_inhomogeneous.
/// Series "ratio" is LHS / (T^mu RHS). Throws DomainError unless (r, p) is
/// admissible and r' <= rho <= r.
EstimateReport strichartz_inhomogeneous_experiment(const DiscreteHamiltonian& H,
                                                   const AdaptedForcing& forcing,
                                                   const StrichartzOptions& options);

/// Time- and path-independent forcing f(sigma) = g.
EstimateReport strichartz_inhomogeneous_experiment(const DiscreteHamiltonian& H, const State& g,
                                                   const StrichartzOptions& options);

// --- Ito oracle for the solution operator ----------------------------------

struct SdeConvergenceOptions {
    double horizon = 1.0;
    std::vector<std::size_t> step_counts{64, 128, 256, 512, 1024, 2048, 4096};
    std::size_t n_paths = 200;
    std::uint64_t seed = 42;
    double energy_cutoff = 4.0;
    FitOptions fit{.min_pairs = 5, .min_decades = 1.5};
};

/// Mean L^2 distance between Euler-Maruyama on the Ito form and
/// e^{-i beta(T) H} u0 (u0 truncated to |lambda| <= cutoff) against dt.
/// The fitted slope is the strong order.
EstimateReport sde_convergence_experiment(const DiscreteHamiltonian& H, const State& u0,
                                          const SdeConvergenceOptions& options);

}  // namespace dispersion_lab
