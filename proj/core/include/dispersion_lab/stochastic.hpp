#pragma once

#include <cstdint>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "dispersion_lab/spectral_operator.hpp"

namespace dispersion_lab {

/// Seeded set of discretized Brownian paths on [0, T]. Path p draws its
/// increments from its own generator keyed by (seed, p), so regenerating any
/// subset of paths, in any order or on any number of workers, yields the same
/// bits.
class BrownianEnsemble {
public:
    BrownianEnsemble(double horizon, std::size_t n_steps, std::size_t n_paths, std::uint64_t seed);

    double horizon() const noexcept { return horizon_; }
    std::size_t n_steps() const noexcept { return n_steps_; }
    std::size_t n_paths() const noexcept { return n_paths_; }
    std::uint64_t seed() const noexcept { return seed_; }
    double dt() const noexcept { return horizon_ / static_cast<double>(n_steps_); }
    double time(std::size_t k) const noexcept { return dt() * static_cast<double>(k); }

    /// n_steps increments of path p.
    std::span<const double> increments(std::size_t path) const;
    /// n_steps + 1 values beta(t_k) of path p, beta(0) = 0.
    std::span<const double> values(std::size_t path) const;
    double value(std::size_t path, std::size_t k) const { return values(path)[k]; }

private:
    double horizon_;
    std::size_t n_steps_;
    std::size_t n_paths_;
    std::uint64_t seed_;
    std::vector<double> increments_;
    std::vector<double> values_;
};

BrownianEnsemble sample_brownian(double horizon, std::size_t n_steps, std::size_t n_paths,
                                 std::uint64_t seed);

/// Deterministic 64-bit key mixing (splitmix64 finalizer).
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

/// CSV with one row per time: t, beta_0(t), ..., beta_{m-1}(t) for the first
/// `max_paths` paths.
void write_ensemble_csv(std::ostream& out, const BrownianEnsemble& ensemble, std::size_t max_paths);

struct PathSolution {
    std::size_t path = 0;
    std::vector<double> times;
    /// Column j is u(times[j]).
    Eigen::MatrixXcd states;
    bool ac_projected = false;
};

/// u(t_k) = e^{-i beta(t_k) H} (P_ac) u0 for every path. `time_indices`
/// selects which ensemble times to store; empty means all of them.
std::vector<PathSolution> time_changed_propagate(const DiscreteHamiltonian& H,
                                                 const BrownianEnsemble& ensemble, const State& u0,
                                                 bool project,
                                                 std::span<const std::size_t> time_indices = {});

/// S(t_to, t_from) u = e^{-i (beta(t_to) - beta(t_from)) H} u along one path.
State evolution_operator_apply(const DiscreteHamiltonian& H, const BrownianEnsemble& ensemble,
                               std::size_t path, std::size_t to_index, std::size_t from_index,
                               const State& u);

struct EulerMaruyamaOptions {
    /// Modes with |lambda_k| above the cutoff are dropped from u0 before
    /// integrating; the explicit scheme is only stable where dt lambda^2 <~ 1.
    double energy_cutoff = std::numeric_limits<double>::infinity();
};

struct EulerMaruyamaResult {
    State final_state;
    std::vector<std::string> warnings;
};

/// Explicit Euler-Maruyama for the Ito form du = -(1/2) H^2 u dt - i H u dbeta,
/// mode by mode in the eigenbasis, driven by the path's own increments
/// (summed in groups when n_steps is coarser than the ensemble).
EulerMaruyamaResult euler_maruyama_ito(const DiscreteHamiltonian& H,
                                       const BrownianEnsemble& ensemble, std::size_t path,
                                       const State& u0, std::size_t n_steps,
                                       const EulerMaruyamaOptions& options = {});

/// u0 restricted to eigenmodes with |lambda_k| <= cutoff.
State spectral_truncate(const DiscreteHamiltonian& H, const State& u0, double cutoff);

}  // namespace dispersion_lab
