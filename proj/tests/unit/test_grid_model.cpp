#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "dispersion_lab/errors.hpp"
#include "dispersion_lab/grid_model.hpp"

namespace dl = dispersion_lab;

namespace {

// Independent adaptive Simpson on a closed-form integrand.
template <class F>
double adaptive_simpson(F f, double a, double b, double tol, int depth = 0) {
    const double m = 0.5 * (a + b);
    const double whole = (b - a) / 6.0 * (f(a) + 4.0 * f(m) + f(b));
    const double lm = 0.5 * (a + m);
    const double rm = 0.5 * (m + b);
    const double left = (m - a) / 6.0 * (f(a) + 4.0 * f(lm) + f(m));
    const double right = (b - m) / 6.0 * (f(m) + 4.0 * f(rm) + f(b));
    if (depth > 40 || std::abs(left + right - whole) < 15.0 * tol) return left + right + (left + right - whole) / 15.0;
    return adaptive_simpson(f, a, m, tol / 2, depth + 1) + adaptive_simpson(f, m, b, tol / 2, depth + 1);
}

}  // namespace

TEST(Grid, SpacingAndSymmetry) {
    const dl::Grid g(40.0, 2048);
    EXPECT_DOUBLE_EQ(g.spacing(), 80.0 / 2047.0);
    EXPECT_DOUBLE_EQ(g.x(0), -40.0);
    EXPECT_NEAR(g.x(2047), 40.0, 1e-12);
    for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(g.x(i), -g.x(g.size() - 1 - i), 1e-12);
}

TEST(Grid, RejectsTooFewPoints) {
    EXPECT_THROW(dl::Grid(10.0, 15), dl::ValidationError);
    EXPECT_THROW(dl::Grid(0.0, 32), dl::ValidationError);
    EXPECT_NO_THROW(dl::Grid(10.0, 16));
}

TEST(SamplePotential, ZeroFamilyIsAllZeros) {
    const auto pg = dl::sample_potential(dl::PotentialSpec::zero(), dl::Grid(7.0, 33));
    for (double v : pg.values) EXPECT_EQ(v, 0.0);
}

TEST(SamplePotential, ClosedFormsAtCenter) {
    const dl::Grid g(10.0, 101);
    EXPECT_DOUBLE_EQ(dl::sample_potential(dl::PotentialSpec::gaussian(3, 1), g).values[50], 3.0);
    EXPECT_DOUBLE_EQ(dl::sample_potential(dl::PotentialSpec::sech_squared(-2, 1), g).values[50], -2.0);
}

TEST(SamplePotential, MatchesClosedFormEverywhere) {
    const dl::Grid g(12.0, 257);
    const auto pg = dl::sample_potential(dl::PotentialSpec::gaussian(3, 1.5), g);
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double x = g.x(i) / 1.5;
        EXPECT_NEAR(pg.values[i], 3.0 * std::exp(-x * x), 1e-15);
    }
}

TEST(SamplePotential, EvenFamiliesAreSymmetric) {
    const dl::Grid g(20.0, 1001);
    for (const auto& spec : {dl::PotentialSpec::gaussian(3, 1), dl::PotentialSpec::sech_squared(-2, 1),
                             dl::PotentialSpec::square_well(-1, 2)}) {
        const auto pg = dl::sample_potential(spec, g);
        for (std::size_t i = 0; i < g.size(); ++i) EXPECT_NEAR(pg.values[i], pg.values[g.size() - 1 - i], 1e-14);
    }
}

TEST(SamplePotential, CustomTableInterpolatesLinearly) {
    const auto spec = dl::PotentialSpec::custom({{-5, 0}, {0, 2}, {5, 0}});
    const auto pg = dl::sample_potential(spec, dl::Grid(5.0, 21));
    EXPECT_DOUBLE_EQ(pg.values[10], 2.0);
    EXPECT_NEAR(pg.values[15], 1.0, 1e-14);
    EXPECT_NEAR(pg.values[5], 1.0, 1e-14);
}

TEST(SamplePotential, TableNotCoveringBoxIsDomainError) {
    const auto spec = dl::PotentialSpec::custom({{-1, 0}, {0, 2}, {1, 0}});
    EXPECT_THROW(dl::sample_potential(spec, dl::Grid(5.0, 21)), dl::DomainError);
}

TEST(SamplePotential, NonFiniteIsValidationError) {
    const auto spec = dl::PotentialSpec::gaussian(std::numeric_limits<double>::quiet_NaN(), 1);
    EXPECT_THROW(dl::sample_potential(spec, dl::Grid(5.0, 21)), dl::ValidationError);
}

TEST(WeightedL1Norm, ZeroPotential) {
    for (int j = 0; j <= 2; ++j) EXPECT_EQ(dl::weighted_l1_norm(dl::PotentialSpec::zero(), j), 0.0);
}

TEST(WeightedL1Norm, GaussianAgainstQuadratureOracle) {
    const auto oracle = adaptive_simpson([](double x) { return 3.0 * std::exp(-x * x); }, -30, 30, 1e-14);
    EXPECT_NEAR(oracle, 3.0 * std::sqrt(std::numbers::pi), 1e-10);
    EXPECT_NEAR(dl::weighted_l1_norm(dl::PotentialSpec::gaussian(3, 1), 0), oracle, 1e-8);
    EXPECT_NEAR(dl::weighted_l1_norm(dl::PotentialSpec::gaussian(3, 1), 0), 5.3174, 1e-4);
}

TEST(WeightedL1Norm, SechSquaredAgainstAntiderivative) {
    // 2 tanh is an antiderivative of 2 sech^2.
    const double oracle = 2.0 * std::tanh(40.0) - 2.0 * std::tanh(-40.0);
    EXPECT_NEAR(dl::weighted_l1_norm(dl::PotentialSpec::sech_squared(-2, 1), 0), oracle, 1e-8);
    EXPECT_NEAR(oracle, 4.0, 1e-12);
}

TEST(WeightedL1Norm, WeightedMomentsAgainstOracle) {
    const auto j1 = adaptive_simpson([](double x) { return 3.0 * std::exp(-x * x) * (1 + std::abs(x)); }, 0, 30, 1e-14);
    EXPECT_NEAR(dl::weighted_l1_norm(dl::PotentialSpec::gaussian(3, 1), 1), 2.0 * j1, 1e-8);
    const auto j2 = adaptive_simpson(
        [](double x) { return 2.0 / std::pow(std::cosh(x), 2) * (1 + x) * (1 + x); }, 0, 40, 1e-14);
    EXPECT_NEAR(dl::weighted_l1_norm(dl::PotentialSpec::sech_squared(-2, 1), 2), 2.0 * j2, 1e-8);
}

TEST(WeightedL1Norm, MonotoneInJ) {
    for (const auto& spec : {dl::PotentialSpec::gaussian(3, 1), dl::PotentialSpec::sech_squared(-2, 1),
                             dl::PotentialSpec::square_well(-1, 2), dl::PotentialSpec::gaussian(-0.5, 0.3)}) {
        const double a = dl::weighted_l1_norm(spec, 0);
        const double b = dl::weighted_l1_norm(spec, 1);
        const double c = dl::weighted_l1_norm(spec, 2);
        EXPECT_LE(a, b);
        EXPECT_LE(b, c);
    }
}

TEST(WeightedL1Norm, BoxDoublingIsStable) {
    for (const auto& spec : {dl::PotentialSpec::gaussian(3, 1), dl::PotentialSpec::sech_squared(-2, 1)}) {
        const double a = dl::weighted_l1_norm(spec, 1, 25.0);
        const double b = dl::weighted_l1_norm(spec, 1, 50.0);
        EXPECT_LT(std::abs(a - b), 1e-10);
    }
}

TEST(WeightedL1Norm, RejectsBadOrder) {
    EXPECT_THROW(dl::weighted_l1_norm(dl::PotentialSpec::gaussian(3, 1), 3), dl::DomainError);
}

TEST(Lambda0, SquaresTheL1Norm) {
    EXPECT_EQ(dl::lambda0(dl::PotentialSpec::zero()), 0.0);
    EXPECT_NEAR(dl::lambda0(dl::PotentialSpec::sech_squared(-2, 1)), 16.0, 1e-8);
    EXPECT_NEAR(dl::lambda0(dl::PotentialSpec::gaussian(3, 1)), 9.0 * std::numbers::pi, 1e-7);
}

TEST(Simpson, ExactForCubics) {
    std::vector<double> f;
    const double h = 0.1;
    for (int i = 0; i <= 20; ++i) f.push_back(std::pow(i * h, 3));
    EXPECT_NEAR(dl::simpson(f, h), 4.0, 1e-12);
    f.push_back(std::pow(2.1, 3));
    EXPECT_NEAR(dl::simpson(f, h), std::pow(2.1, 4) / 4.0, 1e-12);
}
