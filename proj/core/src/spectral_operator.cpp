#include "dispersion_lab/spectral_operator.hpp"

#include <fftw3.h>
#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numbers>

#include "dispersion_lab/errors.hpp"

namespace dispersion_lab {

namespace {

constexpr cplx kI{0.0, 1.0};

// GEMM column block. Fixed so the arithmetic for a given time never depends
// on how many other times are propagated alongside it.
constexpr Eigen::Index kColumnBlock = 32;

double branch_sign(ResolventBranch branch) { return branch == ResolventBranch::plus ? 1.0 : -1.0; }

// The FFTW planner is not thread-safe; execution of an existing plan is.
std::mutex& planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

namespace detail {

// Orthonormal DST-I: the eigenbasis of the Dirichlet second difference. It is
// its own inverse.
class SineTransform {
public:
    explicit SineTransform(std::size_t n) : n_(n), scale_(1.0 / std::sqrt(2.0 * static_cast<double>(n + 1))) {
        std::vector<double> in(n), out(n);
        std::lock_guard lock(planner_mutex());
        plan_ = fftw_plan_r2r_1d(static_cast<int>(n), in.data(), out.data(), FFTW_RODFT00,
                                 FFTW_ESTIMATE | FFTW_UNALIGNED);
        if (plan_ == nullptr) throw ConditioningError("could not plan the sine transform");
    }
    ~SineTransform() {
        std::lock_guard lock(planner_mutex());
        fftw_destroy_plan(plan_);
    }
    SineTransform(const SineTransform&) = delete;
    SineTransform& operator=(const SineTransform&) = delete;

    State apply(const State& u) const {
        std::vector<double> in(n_), out(n_);
        State result(static_cast<Eigen::Index>(n_));
        for (std::size_t i = 0; i < n_; ++i) in[i] = u[static_cast<Eigen::Index>(i)].real();
        fftw_execute_r2r(plan_, in.data(), out.data());
        for (std::size_t i = 0; i < n_; ++i) result[static_cast<Eigen::Index>(i)].real(scale_ * out[i]);
        for (std::size_t i = 0; i < n_; ++i) in[i] = u[static_cast<Eigen::Index>(i)].imag();
        fftw_execute_r2r(plan_, in.data(), out.data());
        for (std::size_t i = 0; i < n_; ++i) result[static_cast<Eigen::Index>(i)].imag(scale_ * out[i]);
        return result;
    }

private:
    std::size_t n_;
    double scale_;
    fftw_plan plan_ = nullptr;
};

}  // namespace detail

DiscreteHamiltonian DiscreteHamiltonian::build(const PotentialGrid& potential,
                                               const HamiltonianOptions& options) {
    const std::size_t n = potential.grid.size();
    const bool is_free = potential.spec.family == PotentialFamily::zero;
    if (options.backend == SpectralBackend::sine_transform && !is_free) {
        throw ContractViolation("the sine-transform backend needs V = 0");
    }
    if (options.backend != SpectralBackend::dense && is_free) {
        if (n > options.max_sine_points) {
            throw SizeError("n_points = " + std::to_string(n) + " exceeds the sine-transform cap of " +
                            std::to_string(options.max_sine_points));
        }
        DiscreteHamiltonian H(potential);
        const double h = potential.grid.spacing();
        H.diagonal_ = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), 2.0 / (h * h));
        H.off_diagonal_ = -1.0 / (h * h);
        H.eigenvalues_.resize(static_cast<Eigen::Index>(n));
        for (std::size_t k = 0; k < n; ++k) {
            const double s = std::sin(std::numbers::pi * static_cast<double>(k + 1) /
                                      (2.0 * static_cast<double>(n + 1)));
            H.eigenvalues_[static_cast<Eigen::Index>(k)] = 4.0 / (h * h) * s * s;
        }
        H.sine_ = std::make_shared<const detail::SineTransform>(n);
        return H;
    }
    if (n > options.max_points) {
        throw SizeError("n_points = " + std::to_string(n) + " exceeds the dense solver cap of " +
                        std::to_string(options.max_points));
    }
    if (potential.values.size() != n) {
        throw ContractViolation("potential samples do not match the grid size");
    }

    DiscreteHamiltonian H(potential);
    const double h = potential.grid.spacing();
    const double inv_h2 = 1.0 / (h * h);
    H.diagonal_.resize(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        H.diagonal_[static_cast<Eigen::Index>(i)] = 2.0 * inv_h2 + potential.values[i];
    }
    H.off_diagonal_ = -inv_h2;

    const auto ni = static_cast<lapack_int>(n);
    Eigen::VectorXd d = H.diagonal_;
    Eigen::VectorXd e = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), H.off_diagonal_);
    H.eigenvalues_.resize(static_cast<Eigen::Index>(n));
    H.eigenvectors_.resize(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
    std::vector<lapack_int> support(2 * n);
    lapack_int found = 0;
    const lapack_int info =
        LAPACKE_dstevr(LAPACK_COL_MAJOR, 'V', 'A', ni, d.data(), e.data(), 0.0, 0.0, 0, 0, 0.0,
                       &found, H.eigenvalues_.data(), H.eigenvectors_.data(), ni, support.data());
    if (info != 0 || found != ni) {
        throw ConditioningError("tridiagonal eigensolver failed (info = " + std::to_string(info) +
                                ")");
    }
    for (std::size_t k = 0; k < n; ++k) {
        if (H.eigenvalues_[static_cast<Eigen::Index>(k)] < 0.0) H.bound_.push_back(k);
    }
    return H;
}

State DiscreteHamiltonian::apply(const State& u) const {
    const Eigen::Index n = diagonal_.size();
    if (u.size() != n) throw ContractViolation("state size does not match the Hamiltonian");
    State out(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        cplx acc = diagonal_[i] * u[i];
        if (i > 0) acc += off_diagonal_ * u[i - 1];
        if (i + 1 < n) acc += off_diagonal_ * u[i + 1];
        out[i] = acc;
    }
    return out;
}

Eigen::VectorXd DiscreteHamiltonian::apply(const Eigen::VectorXd& u) const {
    return apply(State(u.cast<cplx>())).real();
}

const Eigen::MatrixXd& DiscreteHamiltonian::eigenvectors() const {
    if (sine_) throw ContractViolation("the sine-transform backend stores no eigenvector matrix");
    return eigenvectors_;
}

State DiscreteHamiltonian::to_eigenbasis(const State& u) const {
    if (u.size() != static_cast<Eigen::Index>(size())) {
        throw ContractViolation("state size does not match the Hamiltonian");
    }
    if (sine_) return sine_->apply(u);
    const Eigen::VectorXd re = eigenvectors_.transpose() * u.real();
    const Eigen::VectorXd im = eigenvectors_.transpose() * u.imag();
    State c(re.size());
    c.real() = re;
    c.imag() = im;
    return c;
}

State DiscreteHamiltonian::from_eigenbasis(const State& c) const {
    if (c.size() != static_cast<Eigen::Index>(size())) {
        throw ContractViolation("coefficient vector has wrong size");
    }
    if (sine_) return sine_->apply(c);
    const Eigen::VectorXd re = eigenvectors_ * c.real();
    const Eigen::VectorXd im = eigenvectors_ * c.imag();
    State u(re.size());
    u.real() = re;
    u.imag() = im;
    return u;
}

Eigen::MatrixXcd DiscreteHamiltonian::from_eigenbasis(const Eigen::MatrixXcd& coefficients) const {
    const Eigen::Index n = static_cast<Eigen::Index>(size());
    const Eigen::Index cols = coefficients.cols();
    constexpr Eigen::Index half = kColumnBlock / 2;
    Eigen::MatrixXcd out(n, cols);
    if (sine_) {
        for (Eigen::Index j = 0; j < cols; ++j) out.col(j) = sine_->apply(coefficients.col(j));
        return out;
    }
    Eigen::MatrixXd packed(n, kColumnBlock);
    Eigen::MatrixXd product(n, kColumnBlock);
    for (Eigen::Index start = 0; start < cols; start += half) {
        const Eigen::Index w = std::min(half, cols - start);
        // Real and imaginary parts share one full-width block, zero padded, so
        // every column sees the same kernel.
        packed.setZero();
        packed.leftCols(w) = coefficients.middleCols(start, w).real();
        packed.middleCols(half, w) = coefficients.middleCols(start, w).imag();
        product.noalias() = eigenvectors_ * packed;
        out.middleCols(start, w).real() = product.leftCols(w);
        out.middleCols(start, w).imag() = product.middleCols(half, w);
    }
    return out;
}

DiscreteHamiltonian build_hamiltonian(const PotentialGrid& potential,
                                      const HamiltonianOptions& options) {
    return DiscreteHamiltonian::build(potential, options);
}

State project_ac(const DiscreteHamiltonian& H, const State& u) {
    if (u.size() != static_cast<Eigen::Index>(H.size())) {
        throw ContractViolation("state size does not match the Hamiltonian");
    }
    State out = u;
    for (std::size_t k : H.bound_state_indices()) {
        const auto v = H.eigenvectors().col(static_cast<Eigen::Index>(k));
        const cplx coeff = v.cast<cplx>().dot(u);
        out -= coeff * v.cast<cplx>();
    }
    return out;
}

State propagate(const DiscreteHamiltonian& H, double tau, const State& u) {
    State c = H.to_eigenbasis(u);
    const Eigen::VectorXd& lambda = H.eigenvalues();
    for (Eigen::Index k = 0; k < c.size(); ++k) {
        c[k] *= std::exp(cplx(0.0, -tau * lambda[k]));
    }
    return H.from_eigenbasis(c);
}

Eigen::MatrixXcd propagate_batch_from_coefficients(const DiscreteHamiltonian& H,
                                                   std::span<const double> taus,
                                                   const State& coefficients) {
    const Eigen::Index n = static_cast<Eigen::Index>(H.size());
    if (coefficients.size() != n) throw ContractViolation("coefficient vector has wrong size");
    const Eigen::VectorXd& lambda = H.eigenvalues();
    Eigen::MatrixXcd c(n, static_cast<Eigen::Index>(taus.size()));
    for (std::size_t j = 0; j < taus.size(); ++j) {
        const double tau = taus[j];
        for (Eigen::Index k = 0; k < n; ++k) {
            const double phase = -tau * lambda[k];
            c(k, static_cast<Eigen::Index>(j)) =
                coefficients[k] * cplx(std::cos(phase), std::sin(phase));
        }
    }
    return H.from_eigenbasis(c);
}

Eigen::MatrixXcd propagate_batch(const DiscreteHamiltonian& H, std::span<const double> taus,
                                 const State& u) {
    return propagate_batch_from_coefficients(H, taus, H.to_eigenbasis(u));
}

cplx free_resolvent_kernel(double energy, ResolventBranch branch, double x, double y) {
    if (!(energy > 0.0)) throw DomainError("free resolvent kernel needs energy > 0");
    const double k = std::sqrt(energy);
    const double s = branch_sign(branch);
    return s * kI / (2.0 * k) * std::exp(s * kI * std::abs(x - y) * k);
}

State apply_free_resolvent(const Grid& grid, double energy, ResolventBranch branch, const State& f) {
    if (!(energy > 0.0)) throw DomainError("free resolvent needs energy > 0");
    const auto n = static_cast<Eigen::Index>(grid.size());
    if (f.size() != n) throw ContractViolation("state size does not match the grid");
    const double k = std::sqrt(energy);
    const double s = branch_sign(branch);
    const double h = grid.spacing();
    const cplx q = std::exp(s * kI * k * h);
    const cplx prefactor = s * kI / (2.0 * k);

    State weighted(n);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double w = (i == 0 || i == n - 1) ? 0.5 * h : h;
        weighted[i] = w * f[i];
    }
    // sum_j w_j f_j q^{|i-j|} split into j <= i and j >= i
    State left(n);
    State right(n);
    left[0] = weighted[0];
    for (Eigen::Index i = 1; i < n; ++i) left[i] = q * left[i - 1] + weighted[i];
    right[n - 1] = weighted[n - 1];
    for (Eigen::Index i = n - 1; i > 0; --i) right[i - 1] = q * right[i] + weighted[i - 1];

    State out(n);
    for (Eigen::Index i = 0; i < n; ++i) out[i] = prefactor * (left[i] + right[i] - weighted[i]);
    return out;
}

BornSeries born_series_apply(const PotentialGrid& potential, double energy, ResolventBranch branch,
                             const State& f, int n_max) {
    if (n_max < 0) throw DomainError("n_max must be non-negative");
    const double threshold = lambda0(potential.spec);
    if (!(energy > threshold)) {
        throw ConvergenceRegionError("Born series needs energy above lambda0 = ||V||_1^2 = " +
                                     std::to_string(threshold));
    }
    const Grid& grid = potential.grid;
    const auto n = static_cast<Eigen::Index>(grid.size());
    const Eigen::VectorXd v = Eigen::Map<const Eigen::VectorXd>(potential.values.data(), n);

    BornSeries out;
    State term = apply_free_resolvent(grid, energy, branch, f);
    out.sum = term;
    out.term_sup_norms.push_back(term.cwiseAbs().maxCoeff());
    for (int order = 1; order <= n_max; ++order) {
        const State forcing = -(v.cast<cplx>().cwiseProduct(term));
        term = apply_free_resolvent(grid, energy, branch, forcing);
        out.sum += term;
        out.term_sup_norms.push_back(term.cwiseAbs().maxCoeff());
    }
    return out;
}

State solve_shifted(const PotentialGrid& potential, cplx z, const State& f) {
    const std::size_t n = potential.grid.size();
    if (f.size() != static_cast<Eigen::Index>(n)) {
        throw ContractViolation("state size does not match the grid");
    }
    const double h = potential.grid.spacing();
    const double off = -1.0 / (h * h);
    const double base = 2.0 / (h * h);

    // Thomas elimination; the matrix is complex symmetric with constant off-diagonal.
    std::vector<cplx> c_prime(n);
    State x(static_cast<Eigen::Index>(n));
    cplx denom = base + potential.values[0] - z;
    c_prime[0] = off / denom;
    x[0] = f[0] / denom;
    for (std::size_t i = 1; i < n; ++i) {
        denom = base + potential.values[i] - z - off * c_prime[i - 1];
        if (std::abs(denom) == 0.0) throw ConditioningError("shifted Hamiltonian is singular");
        c_prime[i] = off / denom;
        const auto ii = static_cast<Eigen::Index>(i);
        x[ii] = (f[ii] - off * x[ii - 1]) / denom;
    }
    for (std::size_t i = n - 1; i > 0; --i) {
        const auto ii = static_cast<Eigen::Index>(i - 1);
        x[ii] -= c_prime[i - 1] * x[ii + 1];
    }
    return x;
}

State resolvent_boundary_value(const PotentialGrid& potential, double energy, double epsilon,
                               ResolventBranch branch, const State& f) {
    if (!(epsilon > 0.0)) throw DomainError("epsilon must be positive");
    const double s = branch_sign(branch);
    const State coarse = solve_shifted(potential, cplx(energy, s * epsilon), f);
    const State fine = solve_shifted(potential, cplx(energy, s * 0.5 * epsilon), f);
    return 2.0 * fine - coarse;
}

double SpectralDensityEstimate::integral() const {
    double total = 0.0;
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
        total += 0.5 * (lambda_grid[i] - lambda_grid[i - 1]) * (density[i] + density[i - 1]);
    }
    return total;
}

namespace {

SpectralDensityEstimate make_estimate(double a, double b, double epsilon, std::size_t n_lambda) {
    if (!(a < b)) throw DomainError("stone density needs a < b");
    if (!(epsilon > 0.0)) throw DomainError("stone density needs epsilon > 0");
    if (n_lambda < 2) throw DomainError("stone density needs at least two lambda points");
    SpectralDensityEstimate est;
    est.epsilon = epsilon;
    est.lambda_grid.resize(n_lambda);
    est.density.resize(n_lambda);
    const double step = (b - a) / static_cast<double>(n_lambda - 1);
    for (std::size_t i = 0; i < n_lambda; ++i) est.lambda_grid[i] = a + step * static_cast<double>(i);
    est.lambda_grid.back() = b;
    if (step > 0.5 * epsilon) {
        est.warnings.push_back("aliasing: lambda step " + std::to_string(step) +
                               " exceeds epsilon/2; increase n_lambda");
    }
    return est;
}

}  // namespace

SpectralDensityEstimate stone_spectral_density(const DiscreteHamiltonian& H, double a, double b,
                                               double epsilon, std::size_t n_lambda,
                                               const State& f) {
    SpectralDensityEstimate est = make_estimate(a, b, epsilon, n_lambda);
    for (std::size_t i = 0; i < n_lambda; ++i) {
        const State r = solve_shifted(H.potential(), cplx(est.lambda_grid[i], epsilon), f);
        // (R(z) - R(conj z)) / (2 pi i) = Im R(z) / pi for self-adjoint H
        est.density[i] = f.dot(r).imag() / std::numbers::pi;
    }
    return est;
}

SpectralDensityEstimate stone_spectral_density_trace(const DiscreteHamiltonian& H, double a,
                                                     double b, double epsilon,
                                                     std::size_t n_lambda) {
    SpectralDensityEstimate est = make_estimate(a, b, epsilon, n_lambda);
    const Eigen::VectorXd& ev = H.eigenvalues();
    const double norm = 1.0 / static_cast<double>(ev.size());
    for (std::size_t i = 0; i < n_lambda; ++i) {
        double acc = 0.0;
        for (Eigen::Index k = 0; k < ev.size(); ++k) {
            const double d = est.lambda_grid[i] - ev[k];
            acc += epsilon / (d * d + epsilon * epsilon);
        }
        est.density[i] = norm * acc / std::numbers::pi;
    }
    return est;
}

}  // namespace dispersion_lab
