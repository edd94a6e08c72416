#pragma once

#include <Eigen/Dense>
#include <complex>
#include <cstddef>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "dispersion_lab/grid_model.hpp"

namespace dispersion_lab {

using cplx = std::complex<double>;
using State = Eigen::VectorXcd;

enum class ResolventBranch { plus, minus };

enum class SpectralBackend {
    /// Sine transform for V = 0, dense eigensolver otherwise.
    automatic,
    dense,
    /// O(N log N) discrete sine transform; only valid for V = 0.
    sine_transform,
};

struct HamiltonianOptions {
    /// Cap for the dense backend (the eigenvector matrix is N x N).
    std::size_t max_points = 8192;
    std::size_t max_sine_points = std::size_t{1} << 22;
    SpectralBackend backend = SpectralBackend::automatic;
};

namespace detail {
class SineTransform;
}

/// H = -d^2/dx^2 + V with the 3-point stencil and Dirichlet walls at
/// +-L_box, together with its full eigendecomposition. Eigenvectors are
/// orthonormal in the Euclidean inner product; grid functions are expanded
/// in that basis directly.
class DiscreteHamiltonian {
public:
    static DiscreteHamiltonian build(const PotentialGrid& potential,
                                     const HamiltonianOptions& options = {});

    const Grid& grid() const noexcept { return potential_.grid; }
    const PotentialGrid& potential() const noexcept { return potential_; }
    std::size_t size() const noexcept { return potential_.grid.size(); }

    /// Ascending.
    const Eigen::VectorXd& eigenvalues() const noexcept { return eigenvalues_; }
    /// Column k belongs to eigenvalues()[k]. Not stored by the sine backend
    /// (throws ContractViolation there).
    const Eigen::MatrixXd& eigenvectors() const;
    bool uses_sine_transform() const noexcept { return sine_ != nullptr; }
    /// Indices with negative eigenvalue: the discrete stand-in for point spectrum.
    const std::vector<std::size_t>& bound_state_indices() const noexcept { return bound_; }

    const Eigen::VectorXd& diagonal() const noexcept { return diagonal_; }
    double off_diagonal() const noexcept { return off_diagonal_; }

    /// Tridiagonal matrix-vector product.
    State apply(const State& u) const;
    Eigen::VectorXd apply(const Eigen::VectorXd& u) const;

    /// Eigen-coordinates c = V^T u, and back.
    State to_eigenbasis(const State& u) const;
    State from_eigenbasis(const State& c) const;
    /// Columns of `coefficients` mapped back to grid space.
    Eigen::MatrixXcd from_eigenbasis(const Eigen::MatrixXcd& coefficients) const;

private:
    PotentialGrid potential_;
    Eigen::VectorXd diagonal_;
    double off_diagonal_ = 0.0;
    Eigen::VectorXd eigenvalues_;
    Eigen::MatrixXd eigenvectors_;
    std::vector<std::size_t> bound_;
    std::shared_ptr<const detail::SineTransform> sine_;

    explicit DiscreteHamiltonian(PotentialGrid potential) : potential_(std::move(potential)) {}
};

DiscreteHamiltonian build_hamiltonian(const PotentialGrid& potential,
                                      const HamiltonianOptions& options = {});

/// Removes the components along bound-state eigenvectors.
State project_ac(const DiscreteHamiltonian& H, const State& u);

/// e^{-i tau H} u through the eigenbasis.
State propagate(const DiscreteHamiltonian& H, double tau, const State& u);

/// Columns are e^{-i tau_j H} u. One basis transform for all times.
Eigen::MatrixXcd propagate_batch(const DiscreteHamiltonian& H, std::span<const double> taus,
                                 const State& u);

/// Same, starting from eigen-coordinates.
Eigen::MatrixXcd propagate_batch_from_coefficients(const DiscreteHamiltonian& H,
                                                   std::span<const double> taus,
                                                   const State& coefficients);

/// R_0(E +- i0)(x, y) = +-i / (2 sqrt(E)) exp(+-i |x - y| sqrt(E)) for energy E > 0.
cplx free_resolvent_kernel(double energy, ResolventBranch branch, double x, double y);

/// (R_0(E +- i0) f)(x_i) as a trapezoid-rule integral over the grid, in O(N).
State apply_free_resolvent(const Grid& grid, double energy, ResolventBranch branch, const State& f);

struct BornSeries {
    State sum;
    /// Sup norm of term n = R_0 (-V R_0)^n f, n = 0..n_max.
    std::vector<double> term_sup_norms;
};

/// Partial sum of the Born series sum_{n <= n_max} R_0 (-V R_0)^n f.
/// Throws ConvergenceRegionError unless E > lambda0 = ||V||_1^2.
BornSeries born_series_apply(const PotentialGrid& potential, double energy, ResolventBranch branch,
                             const State& f, int n_max);

/// Solves (H - z) x = f for the finite-difference H of `potential`
/// (Dirichlet walls) by complex tridiagonal elimination.
State solve_shifted(const PotentialGrid& potential, cplx z, const State& f);

/// Two-point Richardson extrapolation of R(E + i eps) f toward eps -> 0+.
State resolvent_boundary_value(const PotentialGrid& potential, double energy, double epsilon,
                               ResolventBranch branch, const State& f);

struct SpectralDensityEstimate {
    std::vector<double> lambda_grid;
    std::vector<double> density;
    double epsilon = 0.0;
    std::vector<std::string> warnings;

    /// Trapezoid integral over the lambda grid.
    double integral() const;
};

/// (1 / 2 pi i) <[R(l + i eps) - R(l - i eps)] f, f> on n_lambda points of
/// [a, b], with resolvent applications by tridiagonal solves.
SpectralDensityEstimate stone_spectral_density(const DiscreteHamiltonian& H, double a, double b,
                                               double epsilon, std::size_t n_lambda,
                                               const State& f);

/// Trace-normalized variant: (1/N) Tr of the same jump, from the eigenvalues.
SpectralDensityEstimate stone_spectral_density_trace(const DiscreteHamiltonian& H, double a,
                                                     double b, double epsilon,
                                                     std::size_t n_lambda);

}  // namespace dispersion_lab
