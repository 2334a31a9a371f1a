#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>
#include <gtest/gtest.h>

#include "ark/heat/heat.hpp"
#include "test_util.hpp"

using namespace ark;
using namespace ark::heat;
using ark::test::random_matrix;

namespace {

double dense_mass(const Matrix& f, double dx, double dy) { return f.sum() * dx * dy; }

} // namespace

TEST(HeatOperator, ConstantsAreInNullSpace) {
    const TridiagonalOperator d = build_heat_operator(50, 0.5, 0.02);
    EXPECT_LE(d.apply(Matrix::Ones(50, 3)).cwiseAbs().maxCoeff(), 1e-10);
    const Matrix dense = d.dense();
    for (Eigen::Index i = 0; i < 50; ++i) {
        EXPECT_NEAR(dense.row(i).sum(), 0.0, 1e-9);
    }
}

TEST(HeatOperator, SecondDerivativeOfSine) {
    for (std::size_t n : {32u, 64u, 128u}) {
        const double dx = 1.0 / static_cast<double>(n);
        const double d = 0.5;
        const TridiagonalOperator op = build_heat_operator(n, d, dx);
        const auto k = static_cast<Eigen::Index>(n);
        Matrix s(k, 1), exact(k, 1);
        const double w = 2.0 * std::numbers::pi;
        for (Eigen::Index i = 0; i < k; ++i) {
            s(i, 0) = std::sin(w * static_cast<double>(i) * dx);
            exact(i, 0) = -d * w * w * s(i, 0);
        }
        const double bound = d * std::pow(w, 4) * dx * dx / 12.0;
        EXPECT_LE((op.apply(s) - exact).cwiseAbs().maxCoeff(), bound * 1.01) << n;
    }
}

TEST(HeatOperator, SymmetricNegativeSemidefinite) {
    const TridiagonalOperator d = build_heat_operator(40, 0.7, 0.025);
    const Matrix m = d.dense();
    EXPECT_LE((m - m.transpose()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Matrix> e(m);
    EXPECT_LE(e.eigenvalues().maxCoeff(), 1e-9);
    EXPECT_NEAR(e.eigenvalues().maxCoeff(), 0.0, 1e-9);
}

TEST(HeatOperator, TooSmallGridRejected) { EXPECT_ANY_THROW(build_heat_operator(2, 0.5, 0.5)); }

TEST(HeatInitialCondition, PointValueAndRank) {
    const LowRankFactors f = heat_initial_condition(20, 20);
    const Matrix m = f.materialize();
    // grid point (x, y) = (0.3, 0.35) is (6, 7)
    const double expected =
        0.5 + 0.8 * std::exp(-400.0 * (0.3 - 0.65) * (0.3 - 0.65)) * std::exp(-400.0 * (0.35 - 0.5) * (0.35 - 0.5));
    EXPECT_NEAR(m(6, 7), expected, 1e-14);
    EXPECT_EQ(truncate(heat_initial_condition(128, 128), 1e-12).rank(), 2);
}

TEST(HeatMass, MatchesDenseSum) {
    std::mt19937_64 rng(60);
    const LowRankFactors f(random_matrix(rng, 30, 3), random_matrix(rng, 3, 3), random_matrix(rng, 20, 3));
    EXPECT_NEAR(total_mass(f, 0.1, 0.2), dense_mass(f.materialize(), 0.1, 0.2), 1e-12);
}

TEST(HeatLomac, RestoresMassRandomized) {
    std::mt19937_64 rng(61);
    std::uniform_real_distribution<double> target(-5.0, 5.0);
    for (int trial = 0; trial < 100; ++trial) {
        const LowRankFactors f(random_matrix(rng, 24, 2), random_matrix(rng, 2, 2), random_matrix(rng, 18, 2));
        const double n_exact = target(rng);
        const double dx = 1.0 / 24.0, dy = 1.0 / 18.0;
        const LowRankFactors g = lomac_null_correction(f, n_exact, dx, dy, 1e-3 * leading_singular_value(f));
        ASSERT_NEAR(total_mass(g, dx, dy), n_exact, 1e-12 * (1.0 + std::abs(n_exact))) << trial;
        ASSERT_NEAR(dense_mass(g.materialize(), dx, dy), n_exact, 1e-11 * (1.0 + std::abs(n_exact))) << trial;
    }
}

TEST(HeatLomac, ExactMassAndNoTruncationIsIdentity) {
    std::mt19937_64 rng(62);
    const LowRankFactors f(random_matrix(rng, 16, 2), random_matrix(rng, 2, 2), random_matrix(rng, 16, 2));
    const double dx = 1.0 / 16.0;
    const LowRankFactors g = lomac_null_correction(f, total_mass(f, dx, dx), dx, dx, 0.0);
    EXPECT_LE((g.materialize() - f.materialize()).norm(), 1e-12 * f.materialize().norm());
    EXPECT_LE(g.orthonormality_defect(), 1e-12);
}

TEST(HeatExact, CosineModeDecay) {
    const std::size_t n = 32;
    const HeatProblem p = HeatProblem::unit_square(n, n);
    const HeatExactPropagator prop(p.op1, p.op2);
    Matrix u(32, 1);
    for (Eigen::Index i = 0; i < 32; ++i) {
        u(i, 0) = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) * p.dx);
    }
    const Matrix f0 = u * u.transpose();
    const double mu = -2.0 * p.d1 * (1.0 - std::cos(2.0 * std::numbers::pi * p.dx)) / (p.dx * p.dx);
    EXPECT_LE((prop.evolve(f0, 0.05) - std::exp(2.0 * mu * 0.05) * f0).norm(), 1e-12 * f0.norm());
    EXPECT_LE((prop.evolve(f0, 0.0) - f0).norm(), 1e-12 * f0.norm());
}

TEST(HeatL1, MatchesMaterializedSum) {
    std::mt19937_64 rng(63);
    const LowRankFactors f(random_matrix(rng, 12, 2), random_matrix(rng, 2, 2), random_matrix(rng, 10, 2));
    const Matrix ref = random_matrix(rng, 12, 10);
    EXPECT_NEAR(l1_error(f, ref, 0.5, 0.25), (f.materialize() - ref).cwiseAbs().sum() * 0.125, 1e-12);
    EXPECT_NEAR(l1_distance_to_constant(f, 0.3, 0.5, 0.25), (f.materialize().array() - 0.3).abs().sum() * 0.125,
                1e-12);
    EXPECT_THROW(l1_error(f, Matrix::Zero(3, 3), 1.0, 1.0), DimensionMismatch);
}

TEST(HeatSteps, Examples) {
    const auto [n1, dt1] = steps_for(0.1, 100.0, 1.0 / 200.0);
    EXPECT_EQ(n1, 40u);
    EXPECT_NEAR(dt1, 0.0025, 1e-16);
    const auto [n2, dt2] = steps_for(0.1, 300.0, 1.0 / 200.0);
    EXPECT_EQ(n2, 14u);
    EXPECT_LE(dt2, 300.0 / 40000.0);
    EXPECT_NEAR(dt2 * 14.0, 0.1, 1e-15);
}

TEST(HeatIntegrate, LomacConservesMass) {
    const HeatProblem p = HeatProblem::unit_square(96, 96);
    const LowRankFactors f0 = heat_initial_condition(96, 96);
    const double n0 = total_mass(f0, p.dx, p.dy);
    HeatRunOptions o;
    o.table = dirk2();
    o.dt = 200.0 * p.dx * p.dx;
    o.steps = 10;
    o.tol_constant = 1e-3;
    o.lomac = true;
    const HeatRunResult r = integrate(p, f0, o);
    ASSERT_EQ(r.history.size(), 10u);
    for (const HeatStepRecord& rec : r.history) {
        EXPECT_NEAR(rec.mass, n0, 1e-13 * n0) << rec.step;
    }
    EXPECT_NEAR(r.history.back().t, 10.0 * o.dt, 1e-15);
}

TEST(HeatIntegrate, MaximumPrinciple) {
    const std::size_t n = 128;
    const HeatProblem p = HeatProblem::unit_square(n, n);
    const LowRankFactors f0 = heat_initial_condition(n, n);
    const double hi = f0.materialize().maxCoeff();
    HeatRunOptions o;
    o.dt = 100.0 * p.dx * p.dx;
    o.steps = 16;
    o.lomac = true;
    const HeatRunResult r = integrate(p, f0, o);
    const Matrix f = r.f.materialize();
    EXPECT_GE(f.minCoeff(), -1e-3 * hi);
    EXPECT_LE(f.maxCoeff(), hi * (1.0 + 1e-3));
}

TEST(HeatIntegrate, ApproachesMeanMonotonically) {
    const std::size_t n = 64;
    const HeatProblem p = HeatProblem::unit_square(n, n);
    const LowRankFactors f0 = heat_initial_condition(n, n);
    const double mean = total_mass(f0, p.dx, p.dy);
    HeatRunOptions o;
    o.dt = 0.01;
    o.steps = 50;
    o.lomac = true;
    std::vector<double> dist{l1_distance_to_constant(f0, mean, p.dx, p.dy)};
    integrate(p, f0, o, [&](const HeatStepRecord&, const LowRankFactors& f) {
        dist.push_back(l1_distance_to_constant(f, mean, p.dx, p.dy));
    });
    for (std::size_t i = 1; i < dist.size(); ++i) {
        EXPECT_LE(dist[i], dist[i - 1] * (1.0 + 1e-6) + 1e-12) << i;
    }
    EXPECT_LT(dist.back(), 1e-2 * dist.front());
}
