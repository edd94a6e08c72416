#include "dispersion_lab/stochastic.hpp"

#include <cmath>
#include <iomanip>
#include <random>

#include "dispersion_lab/errors.hpp"
#include "dispersion_lab/parallel.hpp"

namespace dispersion_lab {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

BrownianEnsemble::BrownianEnsemble(double horizon, std::size_t n_steps, std::size_t n_paths,
                                   std::uint64_t seed)
    : horizon_(horizon), n_steps_(n_steps), n_paths_(n_paths), seed_(seed) {
    if (!(horizon > 0.0) || !std::isfinite(horizon)) throw DomainError("horizon T must be > 0");
    if (n_steps < 1) throw DomainError("n_steps must be >= 1");
    if (n_paths < 1) throw DomainError("n_paths must be >= 1");

    increments_.resize(n_steps * n_paths);
    values_.resize((n_steps + 1) * n_paths);
    const double sd = std::sqrt(dt());
    parallel_for(n_paths, [&](std::size_t p) {
        std::mt19937_64 engine(mix_seed(seed, p));
        std::normal_distribution<double> normal(0.0, sd);
        double* inc = increments_.data() + p * n_steps;
        double* val = values_.data() + p * (n_steps + 1);
        val[0] = 0.0;
        for (std::size_t k = 0; k < n_steps; ++k) {
            inc[k] = normal(engine);
            val[k + 1] = val[k] + inc[k];
        }
    });
}

std::span<const double> BrownianEnsemble::increments(std::size_t path) const {
    if (path >= n_paths_) throw ContractViolation("path index out of range");
    return {increments_.data() + path * n_steps_, n_steps_};
}

std::span<const double> BrownianEnsemble::values(std::size_t path) const {
    if (path >= n_paths_) throw ContractViolation("path index out of range");
    return {values_.data() + path * (n_steps_ + 1), n_steps_ + 1};
}

BrownianEnsemble sample_brownian(double horizon, std::size_t n_steps, std::size_t n_paths,
                                 std::uint64_t seed) {
    return BrownianEnsemble(horizon, n_steps, n_paths, seed);
}

void write_ensemble_csv(std::ostream& out, const BrownianEnsemble& ensemble, std::size_t max_paths) {
    const std::size_t m = std::min(max_paths, ensemble.n_paths());
    out << "# schema=1\n";
    out << "t";
    for (std::size_t p = 0; p < m; ++p) out << ",beta_" << p;
    out << '\n' << std::setprecision(17);
    for (std::size_t k = 0; k <= ensemble.n_steps(); ++k) {
        out << ensemble.time(k);
        for (std::size_t p = 0; p < m; ++p) out << ',' << ensemble.value(p, k);
        out << '\n';
    }
}

std::vector<PathSolution> time_changed_propagate(const DiscreteHamiltonian& H,
                                                 const BrownianEnsemble& ensemble, const State& u0,
                                                 bool project,
                                                 std::span<const std::size_t> time_indices) {
    if (u0.size() != static_cast<Eigen::Index>(H.size())) {
        throw ContractViolation("initial state does not live on the Hamiltonian's grid");
    }
    std::vector<std::size_t> indices(time_indices.begin(), time_indices.end());
    if (indices.empty()) {
        indices.resize(ensemble.n_steps() + 1);
        for (std::size_t k = 0; k < indices.size(); ++k) indices[k] = k;
    }
    for (std::size_t k : indices) {
        if (k > ensemble.n_steps()) throw ContractViolation("time index beyond the ensemble horizon");
    }

    const State start = project ? project_ac(H, u0) : u0;
    const State coefficients = H.to_eigenbasis(start);

    std::vector<PathSolution> out(ensemble.n_paths());
    parallel_for(ensemble.n_paths(), [&](std::size_t p) {
        PathSolution& sol = out[p];
        sol.path = p;
        sol.ac_projected = project;
        std::vector<double> taus(indices.size());
        sol.times.resize(indices.size());
        for (std::size_t j = 0; j < indices.size(); ++j) {
            taus[j] = ensemble.value(p, indices[j]);
            sol.times[j] = ensemble.time(indices[j]);
        }
        sol.states = propagate_batch_from_coefficients(H, taus, coefficients);
        for (std::size_t j = 0; j < indices.size(); ++j) {
            if (taus[j] == 0.0) sol.states.col(static_cast<Eigen::Index>(j)) = start;
        }
    });
    return out;
}

State evolution_operator_apply(const DiscreteHamiltonian& H, const BrownianEnsemble& ensemble,
                               std::size_t path, std::size_t to_index, std::size_t from_index,
                               const State& u) {
    if (to_index > ensemble.n_steps() || from_index > ensemble.n_steps()) {
        throw ContractViolation("time index beyond the ensemble horizon");
    }
    const double tau = ensemble.value(path, to_index) - ensemble.value(path, from_index);
    return propagate(H, tau, u);
}

State spectral_truncate(const DiscreteHamiltonian& H, const State& u0, double cutoff) {
    State c = H.to_eigenbasis(u0);
    const Eigen::VectorXd& lambda = H.eigenvalues();
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        if (std::abs(lambda[k]) > cutoff) c[k] = 0.0;
    }
    return H.from_eigenbasis(c);
}

EulerMaruyamaResult euler_maruyama_ito(const DiscreteHamiltonian& H,
                                       const BrownianEnsemble& ensemble, std::size_t path,
                                       const State& u0, std::size_t n_steps,
                                       const EulerMaruyamaOptions& options) {
    if (n_steps == 0 || ensemble.n_steps() % n_steps != 0) {
        throw ContractViolation("Euler-Maruyama steps must evenly group the path's increments");
    }
    const std::size_t group = ensemble.n_steps() / n_steps;
    const double dt = ensemble.horizon() / static_cast<double>(n_steps);
    const std::span<const double> increments = ensemble.increments(path);

    EulerMaruyamaResult result;
    State c = H.to_eigenbasis(u0);
    const Eigen::VectorXd& lambda = H.eigenvalues();
    std::vector<Eigen::Index> active;
    double max_lambda2 = 0.0;
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        if (std::abs(lambda[k]) > options.energy_cutoff) {
            c[k] = 0.0;
        } else if (c[k] != cplx(0.0)) {
            active.push_back(k);
            max_lambda2 = std::max(max_lambda2, lambda[k] * lambda[k]);
        }
    }
    if (dt * max_lambda2 > 1.0) {
        result.warnings.push_back("stability: dt * max lambda^2 = " +
                                  std::to_string(dt * max_lambda2) +
                                  " > 1; explicit scheme amplifies high modes");
    }

    // Zero modes stay zero, so only active ones are stepped.
    for (std::size_t step = 0; step < n_steps; ++step) {
        double dbeta = 0.0;
        for (std::size_t g = 0; g < group; ++g) dbeta += increments[step * group + g];
        for (Eigen::Index k : active) {
            const double l = lambda[k];
            c[k] *= cplx(1.0 - 0.5 * l * l * dt, -l * dbeta);
        }
    }
    result.final_state = H.from_eigenbasis(c);
    return result;
}

}  // namespace dispersion_lab
