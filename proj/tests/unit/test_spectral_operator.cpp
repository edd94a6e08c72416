#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "dispersion_lab/errors.hpp"
#include "dispersion_lab/resolvent_checks.hpp"
#include "dispersion_lab/spectral_operator.hpp"

namespace dl = dispersion_lab;
using cplx = std::complex<double>;

namespace {

const cplx I{0.0, 1.0};

dl::DiscreteHamiltonian hamiltonian(const dl::PotentialSpec& spec, std::size_t n, double L,
                                    dl::SpectralBackend backend = dl::SpectralBackend::automatic) {
    dl::HamiltonianOptions o;
    o.backend = backend;
    return dl::build_hamiltonian(dl::sample_potential(spec, dl::Grid(L, n)), o);
}

dl::State random_state(std::size_t n, unsigned seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> z;
    dl::State u(static_cast<Eigen::Index>(n));
    for (auto& v : u) v = cplx(z(rng), z(rng));
    return u;
}

dl::State gaussian(const dl::Grid& g, double sigma) {
    dl::State u(static_cast<Eigen::Index>(g.size()));
    for (std::size_t i = 0; i < g.size(); ++i) u[static_cast<Eigen::Index>(i)] = std::exp(-g.x(i) * g.x(i) / (2 * sigma * sigma));
    return u;
}

}  // namespace

TEST(BuildHamiltonian, FreeSpectrumMatchesDirichletOracle) {
    const std::size_t n = 512;
    const double L = 20.0;
    const auto H = hamiltonian(dl::PotentialSpec::zero(), n, L, dl::SpectralBackend::dense);
    const double h = 2 * L / static_cast<double>(n - 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double s = std::sin(std::numbers::pi * static_cast<double>(k + 1) / (2.0 * static_cast<double>(n + 1)));
        EXPECT_NEAR(H.eigenvalues()[static_cast<Eigen::Index>(k)], 4.0 / (h * h) * s * s, 1e-9 * (1 + 4 / (h * h)));
    }
    // Continuum Dirichlet mode on the wall-to-wall length (n + 1) h.
    const double lowest = std::pow(std::numbers::pi / (static_cast<double>(n + 1) * h), 2);
    EXPECT_NEAR(H.eigenvalues()[0] / lowest, 1.0, 5e-3);
}

TEST(BuildHamiltonian, SechSquaredHasOneBoundStateNearMinusOne) {
    const auto H = hamiltonian(dl::PotentialSpec::sech_squared(-2, 1), 4096, 20.0);
    ASSERT_EQ(H.bound_state_indices().size(), 1u);
    EXPECT_NEAR(H.eigenvalues()[0], -1.0, 1e-3);
    const auto coarse = hamiltonian(dl::PotentialSpec::sech_squared(-2, 1), 2048, 20.0);
    EXPECT_NEAR(coarse.eigenvalues()[0], -1.0, 1e-3);
}

TEST(BuildHamiltonian, RepulsiveGaussianHasNoBoundStates) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 1024, 40.0);
    EXPECT_TRUE(H.bound_state_indices().empty());
    EXPECT_GT(H.eigenvalues()[0], 0.0);
}

TEST(BuildHamiltonian, OrthonormalAndReconstructs) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 400, 20.0);
    const Eigen::MatrixXd& V = H.eigenvectors();
    const Eigen::MatrixXd gram = V.transpose() * V;
    EXPECT_LT((gram - Eigen::MatrixXd::Identity(400, 400)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index k = 0; k < 400; ++k) {
        const Eigen::VectorXd v = V.col(k);
        const double lam = H.eigenvalues()[k];
        EXPECT_LT((H.apply(v) - lam * v).norm(), 1e-8 * std::max(1.0, std::abs(lam)));
    }
}

TEST(BuildHamiltonian, StencilIsSymmetricTridiagonal) {
    const auto pot = dl::sample_potential(dl::PotentialSpec::gaussian(3, 1), dl::Grid(10.0, 101));
    const auto H = dl::build_hamiltonian(pot);
    const double h = pot.grid.spacing();
    EXPECT_DOUBLE_EQ(H.off_diagonal(), -1.0 / (h * h));
    for (std::size_t i = 0; i < 101; ++i) EXPECT_DOUBLE_EQ(H.diagonal()[static_cast<Eigen::Index>(i)], 2.0 / (h * h) + pot.values[i]);
    // <H e_i, e_j> = <e_i, H e_j>
    Eigen::MatrixXd M(101, 101);
    for (Eigen::Index j = 0; j < 101; ++j) M.col(j) = H.apply(Eigen::VectorXd(Eigen::VectorXd::Unit(101, j)));
    EXPECT_EQ((M - M.transpose()).cwiseAbs().maxCoeff(), 0.0);
}

TEST(BuildHamiltonian, DenseCapIsSizeError) {
    const auto pot = dl::sample_potential(dl::PotentialSpec::gaussian(3, 1), dl::Grid(40.0, 8193));
    EXPECT_THROW(dl::build_hamiltonian(pot), dl::SizeError);
    dl::HamiltonianOptions o;
    o.max_points = 100;
    EXPECT_THROW(dl::build_hamiltonian(dl::sample_potential(dl::PotentialSpec::gaussian(3, 1), dl::Grid(4.0, 101)), o),
                 dl::SizeError);
}

TEST(BuildHamiltonian, SineBackendOnlyForZeroPotential) {
    EXPECT_THROW(hamiltonian(dl::PotentialSpec::gaussian(3, 1), 128, 10.0, dl::SpectralBackend::sine_transform),
                 dl::ContractViolation);
    const auto H = hamiltonian(dl::PotentialSpec::zero(), 16384, 160.0);
    EXPECT_TRUE(H.uses_sine_transform());
    EXPECT_THROW(H.eigenvectors(), dl::ContractViolation);
}

TEST(BuildHamiltonian, SineBackendAgreesWithDense) {
    const auto dense = hamiltonian(dl::PotentialSpec::zero(), 300, 15.0, dl::SpectralBackend::dense);
    const auto sine = hamiltonian(dl::PotentialSpec::zero(), 300, 15.0, dl::SpectralBackend::sine_transform);
    EXPECT_LT((dense.eigenvalues() - sine.eigenvalues()).cwiseAbs().maxCoeff(), 1e-9);
    const dl::State u = random_state(300, 3);
    for (double tau : {0.0, 0.37, 5.0}) {
        EXPECT_LT((dl::propagate(dense, tau, u) - dl::propagate(sine, tau, u)).norm(), 1e-10 * u.norm());
    }
    // Eigenvector signs differ between backends; |coefficients| do not.
    EXPECT_LT((dense.to_eigenbasis(u).cwiseAbs() - sine.to_eigenbasis(u).cwiseAbs()).maxCoeff(), 1e-10);
}

TEST(ProjectAc, FreeCaseIsIdentity) {
    const auto H = hamiltonian(dl::PotentialSpec::zero(), 256, 10.0);
    const dl::State u = random_state(256, 1);
    EXPECT_EQ((dl::project_ac(H, u) - u).norm(), 0.0);
}

TEST(ProjectAc, AnnihilatesBoundState) {
    const auto H = hamiltonian(dl::PotentialSpec::sech_squared(-2, 1), 1024, 20.0);
    const dl::State b = H.eigenvectors().col(0).cast<cplx>();
    EXPECT_LT(dl::project_ac(H, b).norm(), 1e-8);
    dl::State w = random_state(1024, 2);
    w -= b * b.dot(w);
    EXPECT_LT((dl::project_ac(H, b + w) - w).norm(), 1e-8);
}

TEST(Propagate, IdentityAtZeroAndUnitary) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 512, 20.0);
    const dl::State u = random_state(512, 4);
    EXPECT_LT((dl::propagate(H, 0.0, u) - u).cwiseAbs().maxCoeff(), 1e-12);
    for (double tau : {0.1, 1.0, -3.7, 50.0}) EXPECT_NEAR(dl::propagate(H, tau, u).norm(), u.norm(), 1e-10 * u.norm());
}

TEST(Propagate, GroupLaw) {
    const auto H = hamiltonian(dl::PotentialSpec::sech_squared(-2, 1), 512, 20.0);
    const dl::State u = random_state(512, 5);
    const dl::State a = dl::propagate(H, 0.7, dl::propagate(H, -1.9, u));
    EXPECT_LT((a - dl::propagate(H, -1.2, u)).norm(), 1e-9 * u.norm());
}

TEST(Propagate, CommutesWithProjection) {
    const auto H = hamiltonian(dl::PotentialSpec::sech_squared(-2, 1), 512, 20.0);
    const dl::State u = random_state(512, 6);
    const dl::State a = dl::propagate(H, 2.3, dl::project_ac(H, u));
    const dl::State b = dl::project_ac(H, dl::propagate(H, 2.3, u));
    EXPECT_LT((a - b).norm(), 1e-9 * u.norm());
}

TEST(Propagate, FreeGaussianClosedForm) {
    const dl::Grid g(40.0, 4096);
    const auto H = dl::build_hamiltonian(dl::sample_potential(dl::PotentialSpec::zero(), g));
    const double tau = 2.0;
    const dl::State u = dl::propagate(H, tau, gaussian(g, 1.0));
    // i u_t = -u_xx spreads exp(-x^2 / (2 s)) with s -> s + 2 i t.
    const cplx s = 1.0 + 2.0 * I * tau;
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx exact = std::sqrt(1.0 / s) * std::exp(-g.x(i) * g.x(i) / (2.0 * s));
        diff += std::norm(u[static_cast<Eigen::Index>(i)] - exact);
        ref += std::norm(exact);
    }
    EXPECT_LT(std::sqrt(diff / ref), 1e-3);
}

TEST(Propagate, BatchMatchesSingle) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 256, 10.0);
    const dl::State u = random_state(256, 7);
    const std::vector<double> taus{0.0, 0.5, 1.5, -2.0};
    const Eigen::MatrixXcd batch = dl::propagate_batch(H, taus, u);
    for (std::size_t j = 0; j < taus.size(); ++j) {
        EXPECT_LT((batch.col(static_cast<Eigen::Index>(j)) - dl::propagate(H, taus[j], u)).norm(), 1e-11 * u.norm());
    }
}

TEST(FreeResolventKernel, Values) {
    using B = dl::ResolventBranch;
    EXPECT_LT(std::abs(dl::free_resolvent_kernel(1.0, B::plus, 0.3, 0.3) - I / 2.0), 1e-15);
    EXPECT_LT(std::abs(dl::free_resolvent_kernel(4.0, B::plus, 0.0, 0.0) - I / 4.0), 1e-15);
    EXPECT_LT(std::abs(dl::free_resolvent_kernel(1.0, B::plus, 0.0, std::numbers::pi) + I / 2.0), 1e-15);
    EXPECT_LT(std::abs(dl::free_resolvent_kernel(1.0, B::minus, 0.0, 0.0) + I / 2.0), 1e-15);
    EXPECT_THROW(dl::free_resolvent_kernel(0.0, B::plus, 0, 0), dl::DomainError);
    EXPECT_THROW(dl::free_resolvent_kernel(-1.0, B::plus, 0, 0), dl::DomainError);
}

TEST(FreeResolvent, ApplyMatchesDirectQuadrature) {
    const dl::Grid g(8.0, 161);
    const dl::State f = gaussian(g, 1.0);
    const double E = 2.5;
    const dl::State fast = dl::apply_free_resolvent(g, E, dl::ResolventBranch::plus, f);
    for (std::size_t i = 0; i < g.size(); i += 20) {
        cplx direct = 0.0;
        for (std::size_t j = 0; j < g.size(); ++j) {
            const double w = (j == 0 || j + 1 == g.size()) ? 0.5 : 1.0;
            direct += w * g.spacing() * dl::free_resolvent_kernel(E, dl::ResolventBranch::plus, g.x(i), g.x(j)) *
                      f[static_cast<Eigen::Index>(j)];
        }
        EXPECT_LT(std::abs(direct - fast[static_cast<Eigen::Index>(i)]), 1e-12);
    }
}

TEST(BornSeries, FreeCaseIsFirstTerm) {
    const dl::Grid g(8.0, 401);
    const auto pot = dl::sample_potential(dl::PotentialSpec::zero(), g);
    const dl::State f = gaussian(g, 1.0);
    const auto s = dl::born_series_apply(pot, 3.0, dl::ResolventBranch::plus, f, 5);
    EXPECT_LT((s.sum - dl::apply_free_resolvent(g, 3.0, dl::ResolventBranch::plus, f)).norm(), 1e-14);
    for (std::size_t n = 1; n < s.term_sup_norms.size(); ++n) EXPECT_EQ(s.term_sup_norms[n], 0.0);
}

TEST(BornSeries, BelowThresholdIsConvergenceRegionError) {
    const dl::Grid g(8.0, 401);
    const auto spec = dl::PotentialSpec::gaussian(3, 1);
    const auto pot = dl::sample_potential(spec, g);
    EXPECT_THROW(dl::born_series_apply(pot, 0.9 * dl::lambda0(spec), dl::ResolventBranch::plus, gaussian(g, 1.0), 5),
                 dl::ConvergenceRegionError);
}

TEST(BornSeries, GaussianRatiosAndOracle) {
    const auto spec = dl::PotentialSpec::gaussian(3, 1);
    const auto r = dl::check_born_series(spec);
    EXPECT_NEAR(r.ratio_bound, dl::weighted_l1_norm(spec, 0) / (2 * std::sqrt(4 * dl::lambda0(spec))), 1e-9);
    EXPECT_NEAR(r.ratio_bound, 0.25, 1e-9);
    ASSERT_EQ(r.term_ratios.size(), 20u);
    for (double q : r.term_ratios) EXPECT_LE(q, 1.1 * r.ratio_bound);
    EXPECT_LT(r.relative_error, 1e-2);
}

TEST(SolveShifted, ResidualIsSmall) {
    const auto pot = dl::sample_potential(dl::PotentialSpec::gaussian(3, 1), dl::Grid(10.0, 301));
    const auto H = dl::build_hamiltonian(pot);
    const dl::State f = random_state(301, 8);
    const cplx z(2.0, 0.1);
    const dl::State x = dl::solve_shifted(pot, z, f);
    EXPECT_LT((H.apply(x) - z * x - f).norm(), 1e-10 * f.norm());
}

namespace {

struct StoneSetup {
    dl::DiscreteHamiltonian H;
    std::size_t k;
    double spacing;
};

StoneSetup stone_setup() {
    dl::HamiltonianOptions o;
    o.backend = dl::SpectralBackend::dense;
    auto H = dl::build_hamiltonian(dl::sample_potential(dl::PotentialSpec::gaussian(3, 1), dl::Grid(40.0, 2048)), o);
    const std::size_t k = 100;
    const auto& ev = H.eigenvalues();
    const double s = 0.5 * (ev[k + 1] - ev[k - 1]);
    return {std::move(H), k, s};
}

}  // namespace

TEST(StoneDensity, EigenvectorMassIsOne) {
    const auto st = stone_setup();
    const double lk = st.H.eigenvalues()[static_cast<Eigen::Index>(st.k)];
    const dl::State f = st.H.eigenvectors().col(static_cast<Eigen::Index>(st.k)).cast<cplx>();
    const auto est = dl::stone_spectral_density(st.H, lk - 10 * st.spacing, lk + 10 * st.spacing, st.spacing / 10, 2001, f);
    EXPECT_NEAR(est.integral(), 1.0, 1e-2);
    for (double d : est.density) EXPECT_GE(d, -1e-10);
}

TEST(StoneDensity, BoundaryEigenvalueGivesHalf) {
    const auto st = stone_setup();
    const double lk = st.H.eigenvalues()[static_cast<Eigen::Index>(st.k)];
    const dl::State f = st.H.eigenvectors().col(static_cast<Eigen::Index>(st.k)).cast<cplx>();
    const auto est = dl::stone_spectral_density(st.H, lk, lk + 20 * st.spacing, st.spacing / 10, 2001, f);
    EXPECT_NEAR(est.integral(), 0.5, 2e-2);
}

TEST(StoneDensity, RandomUnitVectorFullRange) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 128, 10.0, dl::SpectralBackend::dense);
    dl::State f = random_state(128, 9);
    f /= f.norm();
    const auto& ev = H.eigenvalues();
    const auto est = dl::stone_spectral_density(H, ev[0] - 10.0, ev[127] + 10.0, 0.05, 20001, f);
    EXPECT_NEAR(est.integral(), 1.0, 1e-2);
}

TEST(StoneDensity, AdditiveOverDisjointIntervals) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 128, 10.0, dl::SpectralBackend::dense);
    dl::State f = random_state(128, 10);
    f /= f.norm();
    const double eps = 0.05;
    const auto whole = dl::stone_spectral_density(H, 0.0, 20.0, eps, 8001, f);
    const auto left = dl::stone_spectral_density(H, 0.0, 8.0, eps, 3201, f);
    const auto right = dl::stone_spectral_density(H, 8.0, 20.0, eps, 4801, f);
    EXPECT_NEAR(left.integral() + right.integral(), whole.integral(), 1e-4);
}

TEST(StoneDensity, MatchesLorentzianSmoothedHistogram) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 128, 10.0, dl::SpectralBackend::dense);
    dl::State f = random_state(128, 11);
    f /= f.norm();
    const dl::State c = H.to_eigenbasis(f);
    const double eps = 0.05;
    const auto est = dl::stone_spectral_density(H, 1.0, 15.0, eps, 5601, f);
    double diff = 0.0;
    double ref = 0.0;
    for (std::size_t i = 0; i < est.lambda_grid.size(); ++i) {
        double lorentz = 0.0;
        for (Eigen::Index k = 0; k < 128; ++k) {
            const double d = est.lambda_grid[i] - H.eigenvalues()[k];
            lorentz += std::norm(c[k]) * eps / std::numbers::pi / (d * d + eps * eps);
        }
        diff += std::abs(est.density[i] - lorentz);
        ref += std::abs(lorentz);
    }
    EXPECT_LT(diff / ref, 0.05);
}

TEST(StoneDensity, AliasingWarning) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 128, 10.0, dl::SpectralBackend::dense);
    const dl::State f = random_state(128, 12);
    const auto est = dl::stone_spectral_density(H, 0.0, 20.0, 1e-4, 11, f);
    EXPECT_FALSE(est.warnings.empty());
}
