#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "dispersion_lab/estimate_experiments.hpp"
#include "dispersion_lab/parallel.hpp"
#include "dispersion_lab/power_law_fit.hpp"
#include "dispersion_lab/stochastic.hpp"

namespace dl = dispersion_lab;
using cplx = std::complex<double>;

namespace {

dl::DiscreteHamiltonian hamiltonian(const dl::PotentialSpec& spec, std::size_t n, double L) {
    return dl::build_hamiltonian(dl::sample_potential(spec, dl::Grid(L, n)));
}

}  // namespace

TEST(BrownianEnsemble, StartsAtZero) {
    const dl::BrownianEnsemble e(2.0, 64, 50, 7);
    for (std::size_t p = 0; p < 50; ++p) {
        EXPECT_EQ(e.value(p, 0), 0.0);
        EXPECT_EQ(e.values(p).size(), 65u);
        EXPECT_EQ(e.increments(p).size(), 64u);
    }
}

TEST(BrownianEnsemble, SingleStepVariance) {
    const double T = 2.5;
    const dl::BrownianEnsemble e(T, 1, 100000, 42);
    double sum = 0.0;
    double sq = 0.0;
    for (std::size_t p = 0; p < e.n_paths(); ++p) {
        sum += e.value(p, 1);
        sq += e.value(p, 1) * e.value(p, 1);
    }
    const double n = static_cast<double>(e.n_paths());
    const double mean = sum / n;
    const double var = sq / n - mean * mean;
    EXPECT_GT(var, 0.97 * T);
    EXPECT_LT(var, 1.03 * T);
    EXPECT_LT(std::abs(mean), 4.0 * std::sqrt(T / n));
}

TEST(BrownianEnsemble, Covariance) {
    const double T = 1.0;
    const dl::BrownianEnsemble e(T, 2, 100000, 43);
    std::vector<double> prod(e.n_paths());
    for (std::size_t p = 0; p < e.n_paths(); ++p) prod[p] = e.value(p, 1) * e.value(p, 2);
    const double n = static_cast<double>(prod.size());
    const double mean = std::accumulate(prod.begin(), prod.end(), 0.0) / n;
    double var = 0.0;
    for (double v : prod) var += (v - mean) * (v - mean);
    const double se = std::sqrt(var / (n - 1) / n);
    EXPECT_LT(std::abs(mean - T / 2), 4.0 * se);
}

TEST(BrownianEnsemble, VarianceAtHorizon) {
    const double T = 3.0;
    const dl::BrownianEnsemble e(T, 100, 20000, 44);
    std::vector<double> end(e.n_paths());
    for (std::size_t p = 0; p < e.n_paths(); ++p) end[p] = e.value(p, 100);
    const double n = static_cast<double>(end.size());
    const double mean = std::accumulate(end.begin(), end.end(), 0.0) / n;
    double m2 = 0.0;
    for (double v : end) m2 += v * v;
    m2 /= n;
    EXPECT_LT(std::abs(mean), 4.0 * std::sqrt(T / n));
    // Var of the sample second moment is 2 T^2 / n.
    EXPECT_LT(std::abs(m2 - T), 4.0 * std::sqrt(2.0 * T * T / n));
}

TEST(BrownianEnsemble, Deterministic) {
    const dl::BrownianEnsemble a(1.0, 32, 10, 42);
    const dl::BrownianEnsemble b(1.0, 32, 10, 42);
    EXPECT_EQ(a.increments(0)[0], b.increments(0)[0]);
    for (std::size_t p = 0; p < 10; ++p) {
        for (std::size_t k = 0; k < 32; ++k) EXPECT_EQ(a.increments(p)[k], b.increments(p)[k]);
    }
    const dl::BrownianEnsemble c(1.0, 32, 10, 43);
    EXPECT_NE(a.increments(0)[0], c.increments(0)[0]);
}

TEST(BrownianEnsemble, IndependentOfWorkerCountAndPathCount) {
    std::vector<double> one;
    {
        dl::ScopedWorkerCount w(1);
        const dl::BrownianEnsemble e(1.0, 64, 40, 5);
        one.assign(e.values(37).begin(), e.values(37).end());
    }
    dl::ScopedWorkerCount w(8);
    const dl::BrownianEnsemble e(1.0, 64, 80, 5);
    for (std::size_t k = 0; k <= 64; ++k) EXPECT_EQ(e.values(37)[k], one[k]);
}

TEST(BrownianEnsemble, CsvExport) {
    const dl::BrownianEnsemble e(1.0, 4, 3, 1);
    std::ostringstream out;
    dl::write_ensemble_csv(out, e, 2);
    std::istringstream in(out.str());
    std::string line;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        ++rows;
    }
    EXPECT_EQ(rows, 6u);  // header + 5 times
}

TEST(TimeChangedPropagate, InitialTimeAndUnitarity) {
    const auto H = hamiltonian(dl::PotentialSpec::sech_squared(-2, 1), 512, 20.0);
    const dl::BrownianEnsemble e(1.0, 16, 4, 3);
    const dl::State u0 = dl::gaussian_state(H.grid(), 1.0, 2.0);
    for (bool project : {false, true}) {
        const auto sols = dl::time_changed_propagate(H, e, u0, project);
        const dl::State start = project ? dl::project_ac(H, u0) : u0;
        ASSERT_EQ(sols.size(), 4u);
        for (const auto& s : sols) {
            EXPECT_EQ(s.ac_projected, project);
            EXPECT_LT((s.states.col(0) - start).cwiseAbs().maxCoeff(), 1e-12);
            for (Eigen::Index k = 0; k < s.states.cols(); ++k) EXPECT_NEAR(s.states.col(k).norm(), start.norm(), 1e-10);
        }
    }
}

TEST(TimeChangedPropagate, SingleModeIsDiagonal) {
    dl::HamiltonianOptions o;
    o.backend = dl::SpectralBackend::dense;
    const auto H = dl::build_hamiltonian(dl::sample_potential(dl::PotentialSpec::zero(), dl::Grid(10.0, 256)), o);
    const std::size_t k = 7;
    const dl::State u0 = H.eigenvectors().col(k).cast<cplx>();
    const dl::BrownianEnsemble e(2.0, 32, 3, 9);
    const auto sols = dl::time_changed_propagate(H, e, u0, true);
    const double lam = H.eigenvalues()[k];
    for (const auto& s : sols) {
        for (std::size_t j = 0; j < s.times.size(); ++j) {
            const dl::State exact = std::exp(cplx(0, -lam * e.value(s.path, j))) * u0;
            EXPECT_LT((s.states.col(static_cast<Eigen::Index>(j)) - exact).cwiseAbs().maxCoeff(), 1e-10);
        }
    }
}

TEST(TimeChangedPropagate, SelectedTimesAndAdaptedness) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 256, 10.0);
    const dl::State u0 = dl::gaussian_state(H.grid(), 1.0, 2.0);
    const dl::BrownianEnsemble full(1.0, 32, 2, 11);
    const dl::BrownianEnsemble shorter(0.5, 16, 2, 11);
    const std::vector<std::size_t> idx{0, 5, 16};
    const auto a = dl::time_changed_propagate(H, full, u0, false, idx);
    const auto b = dl::time_changed_propagate(H, shorter, u0, false, idx);
    // Same seed, same dt: the first 16 increments coincide, so u(t_k) for k <= 16 does too.
    for (std::size_t p = 0; p < 2; ++p) {
        ASSERT_EQ(a[p].states.cols(), 3);
        EXPECT_EQ(a[p].times[1], full.time(5));
        for (Eigen::Index j = 0; j < 3; ++j) EXPECT_LT((a[p].states.col(j) - b[p].states.col(j)).norm(), 1e-12);
    }
}

TEST(EvolutionOperator, Composition) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 256, 10.0);
    const dl::BrownianEnsemble e(1.0, 20, 2, 12);
    const dl::State u = dl::gaussian_state(H.grid(), 1.0, 2.0);
    const dl::State two = dl::evolution_operator_apply(H, e, 1, 17, 9, dl::evolution_operator_apply(H, e, 1, 9, 3, u));
    const dl::State one = dl::evolution_operator_apply(H, e, 1, 17, 3, u);
    EXPECT_LT((two - one).norm(), 1e-10);
    EXPECT_LT((dl::evolution_operator_apply(H, e, 1, 4, 4, u) - u).norm(), 1e-12);
}

TEST(EulerMaruyama, ZeroEigenvalueIsConstant) {
    // A constant shift by the lowest Dirichlet eigenvalue moves it to zero.
    const std::size_t n = 128;
    const dl::Grid g(10.0, n);
    const double h = g.spacing();
    const double s = std::sin(std::numbers::pi / (2.0 * static_cast<double>(n + 1)));
    const double shift = 4.0 / (h * h) * s * s;
    dl::HamiltonianOptions o;
    o.backend = dl::SpectralBackend::dense;
    const auto H = dl::build_hamiltonian(dl::sample_potential(dl::PotentialSpec::square_well(-shift, 20.0), g), o);
    ASSERT_LT(std::abs(H.eigenvalues()[0]), 1e-10);
    const dl::State u0 = H.eigenvectors().col(0).cast<cplx>();
    const dl::BrownianEnsemble e(1.0, 256, 3, 13);
    for (std::size_t p = 0; p < 3; ++p) {
        EXPECT_LT((dl::euler_maruyama_ito(H, e, p, u0, 256, {.energy_cutoff = 1.0}).final_state - u0).norm(), 1e-8);
    }
}

TEST(EulerMaruyama, SingleModeStrongOrderHalf) {
    dl::HamiltonianOptions o;
    o.backend = dl::SpectralBackend::dense;
    const auto H = dl::build_hamiltonian(dl::sample_potential(dl::PotentialSpec::zero(), dl::Grid(10.0, 128)), o);
    const std::size_t k = 3;
    const double lam = H.eigenvalues()[k];
    const dl::State u0 = H.eigenvectors().col(k).cast<cplx>();
    const double T = 1.0;
    const dl::BrownianEnsemble e(T, 4096, 200, 14);
    std::vector<double> dts;
    std::vector<double> errs;
    for (std::size_t n = 64; n <= 4096; n *= 2) {
        double err = 0.0;
        for (std::size_t p = 0; p < e.n_paths(); ++p) {
            const dl::State exact = std::exp(cplx(0, -lam * e.value(p, 4096))) * u0;
            err += (dl::euler_maruyama_ito(H, e, p, u0, n, {.energy_cutoff = 1.0}).final_state - exact).norm();
        }
        dts.push_back(T / static_cast<double>(n));
        errs.push_back(err / static_cast<double>(e.n_paths()));
    }
    const auto fit = dl::fit_decay_exponent(dts, errs, {.min_pairs = 5, .min_decades = 1.5});
    EXPECT_GE(fit.slope, 0.35);
    EXPECT_LE(fit.slope, 0.65);
}

TEST(EulerMaruyama, StabilityWarning) {
    const auto H = hamiltonian(dl::PotentialSpec::zero(), 256, 10.0);
    const dl::BrownianEnsemble e(1.0, 8, 1, 15);
    const auto r = dl::euler_maruyama_ito(H, e, 0, dl::gaussian_state(H.grid(), 0.2, 2.0), 8);
    EXPECT_FALSE(r.warnings.empty());
}

TEST(EulerMaruyama, GaussianPotentialErrorDecreases) {
    const auto H = hamiltonian(dl::PotentialSpec::gaussian(3, 1), 2048, 40.0);
    dl::SdeConvergenceOptions o;
    o.n_paths = 200;
    const auto r = dl::sde_convergence_experiment(H, dl::gaussian_state(H.grid(), 1.0, 2.0), o);
    ASSERT_EQ(r.values.size(), 7u);
    // Step counts ascend, so dt descends; errors must shrink with dt up to Monte Carlo noise.
    for (std::size_t i = 1; i < r.values.size(); ++i) {
        EXPECT_LT(r.abscissa[i], r.abscissa[i - 1]);
        EXPECT_LT(r.values[i], r.values[i - 1] / 0.9);
    }
    EXPECT_GT(r.values.front(), 4.0 * r.values.back());
    ASSERT_TRUE(r.fit);
    EXPECT_GE(r.fit->slope, 0.35);
    EXPECT_LE(r.fit->slope, 0.65);
}
