#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "ark/dirk/stepper.hpp"
#include "ark/heat/heat.hpp"
#include "ark/krylov/adaptive.hpp"
#include "oracles.hpp"

using namespace ark;
using ark::test::random_matrix;

namespace {

// Scalar DIRK for y' = l y, stage by stage: S_k (1 - dt a_kk l) = y + dt sum_{j<k} a_kj l S_j.
double scalar_dirk(const ButcherTable& t, double l, double dt, double y) {
    std::vector<double> s;
    for (std::size_t k = 0; k < t.stages(); ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        double rhs = y;
        for (std::size_t j = 0; j < k; ++j) {
            rhs += dt * t.a(kk, static_cast<Eigen::Index>(j)) * l * s[j];
        }
        s.push_back(rhs / (1.0 - dt * t.a(kk, kk) * l));
    }
    return s.back();
}

std::vector<double> tolerances(const ButcherTable& t, double tol) { return std::vector<double>(t.stages(), tol); }

LowRankFactors cosine_mode(std::size_t n) {
    Matrix u(static_cast<Eigen::Index>(n), 1);
    for (std::size_t i = 0; i < n; ++i) {
        u(static_cast<Eigen::Index>(i), 0) = std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
    }
    return {u, Matrix::Ones(1, 1), u};
}

} // namespace

TEST(ButcherTable, BuiltinTablesValidate) {
    for (const ButcherTable& t : builtin_tables()) {
        EXPECT_NO_THROW(t.validate()) << t.name;
        EXPECT_EQ(table_by_name(t.name).name, t.name);
    }
    EXPECT_THROW(table_by_name("rk4"), InvalidArgument);
}

TEST(ButcherTable, OrderConditions) {
    for (const ButcherTable& t : builtin_tables()) {
        const auto s = static_cast<Eigen::Index>(t.stages());
        double b = 0, bc = 0, bc2 = 0, bac = 0;
        for (Eigen::Index i = 0; i < s; ++i) {
            const double bi = t.b[static_cast<std::size_t>(i)];
            const double ci = t.c[static_cast<std::size_t>(i)];
            b += bi;
            bc += bi * ci;
            bc2 += bi * ci * ci;
            for (Eigen::Index j = 0; j < s; ++j) {
                bac += bi * t.a(i, j) * t.c[static_cast<std::size_t>(j)];
            }
        }
        EXPECT_NEAR(b, 1.0, 1e-14) << t.name;
        if (t.order >= 2) {
            EXPECT_NEAR(bc, 0.5, 1e-14) << t.name;
        }
        if (t.order >= 3) {
            EXPECT_NEAR(bc2, 1.0 / 3.0, 1e-12) << t.name;
            EXPECT_NEAR(bac, 1.0 / 6.0, 1e-12) << t.name;
        }
    }
}

TEST(ButcherTable, Dirk2Coefficients) {
    const ButcherTable t = dirk2();
    const double g = 1.0 - std::sqrt(2.0) / 2.0;
    EXPECT_DOUBLE_EQ(t.a(0, 0), g);
    EXPECT_DOUBLE_EQ(t.a(1, 0), 1.0 - g);
    EXPECT_DOUBLE_EQ(t.a(1, 1), g);
    EXPECT_DOUBLE_EQ(t.c[0], g);
    EXPECT_DOUBLE_EQ(t.c[1], 1.0);
}

TEST(ButcherTable, Dirk3Coefficients) {
    const ButcherTable t = dirk3();
    const double x = 0.4358665215;
    EXPECT_NEAR(t.a(0, 0), x, 1e-10);
    EXPECT_NEAR(t.c[1], (1.0 + x) / 2.0, 1e-10);
    EXPECT_NEAR(t.a(1, 0), (1.0 - x) / 2.0, 1e-10);
    EXPECT_NEAR(t.b[0], -1.5 * x * x + 4.0 * x - 0.25, 1e-9);
    EXPECT_NEAR(t.b[2], x, 1e-10);
    // x is the root of 6x^3 - 18x^2 + 9x - 1 = 0 in (0, 1)
    const double xd = kDirk3Diagonal;
    EXPECT_NEAR(6 * xd * xd * xd - 18 * xd * xd + 9 * xd - 1, 0.0, 1e-14);
    // With b2 = -3x^2/2 - 5x + 5/4 the weights would not sum to one;
    // +3x^2/2 restores consistency.
    EXPECT_GT(std::abs((-1.5 * x * x + 4 * x - 0.25) + (-1.5 * x * x - 5 * x + 1.25) + x - 1.0), 0.5);
    EXPECT_NEAR(t.b[1], 1.5 * xd * xd - 5.0 * xd + 1.25, 1e-15);
}

TEST(ButcherTable, ValidateRejectsBadTables) {
    ButcherTable t = dirk2();
    t.b[0] += 0.1;
    EXPECT_THROW(t.validate(), InvalidArgument);
    t = dirk2();
    t.a(0, 1) = 0.2;
    EXPECT_THROW(t.validate(), InvalidArgument);
    t = dirk2();
    t.c.pop_back();
    EXPECT_THROW(t.validate(), DimensionMismatch);
}

TEST(StageOperator, HalfIdentityMinusScaledD) {
    const TridiagonalOperator d({0.0, 1.0, 1.0}, {-2.0, -2.0, -2.0}, {1.0, 1.0, 0.0});
    const Matrix a = assemble_stage_operator(d, 0.1, 0.5).dense();
    EXPECT_DOUBLE_EQ(a(0, 0), 0.5 + 0.1);
    EXPECT_DOUBLE_EQ(a(0, 1), -0.05);
    EXPECT_DOUBLE_EQ(a(1, 0), -0.05);
    EXPECT_DOUBLE_EQ(a(0, 2), 0.0);
}

TEST(StageRhs, ScalarDirkOracle) {
    for (const ButcherTable& t : builtin_tables()) {
        for (double l : {-0.3, -4.0, -50.0}) {
            const double dt = 0.1;
            const double y0 = 1.7;
            // split l = l1 + l2 between the two directions
            const double l1 = 0.25 * l, l2 = 0.75 * l;
            const Matrix b1 = Matrix::Constant(1, 1, y0);
            std::vector<Matrix> inc;
            double sk = 0.0;
            for (std::size_t k = 0; k < t.stages(); ++k) {
                const auto kk = static_cast<Eigen::Index>(k);
                const Matrix bk = stage_rhs(b1, inc, t, k);
                const double c = dt * t.a(kk, kk);
                sk = bk(0, 0) / ((0.5 - c * l1) + (0.5 - c * l2));
                inc.push_back((Matrix::Constant(1, 1, sk) - bk) / t.a(kk, kk));
            }
            EXPECT_NEAR(sk, scalar_dirk(t, l, dt, y0), 1e-14) << t.name << " " << l;
        }
    }
}

TEST(StageRhs, MissingStage) {
    const ButcherTable t = dirk3();
    const std::vector<Matrix> inc{Matrix::Ones(2, 2)};
    EXPECT_THROW(stage_rhs(Matrix::Ones(2, 2), inc, t, 2), MissingStage);
    EXPECT_THROW(stage_rhs(Matrix::Ones(2, 2), inc, t, 3), MissingStage);
    EXPECT_NO_THROW(stage_rhs(Matrix::Ones(2, 2), inc, t, 1));
}

TEST(DirkStep, ZeroOperatorIsStationary) {
    std::mt19937_64 rng(50);
    const LowRankFactors f(random_matrix(rng, 20, 2), random_matrix(rng, 2, 2), random_matrix(rng, 16, 2));
    const StageOperators ops{TridiagonalOperator::zero(20), TridiagonalOperator::zero(16)};
    for (const ButcherTable& t : builtin_tables()) {
        const DirkStepResult r = dirk_step(f, ops, t, 0.3, tolerances(t, 1e-12), {});
        EXPECT_LE((r.f.materialize() - f.materialize()).norm(), 1e-12 * f.materialize().norm()) << t.name;
        EXPECT_EQ(r.diagnostics.iterations, 0);
    }
}

TEST(DirkStep, BackwardEulerMatchesSolveAdaptive) {
    std::mt19937_64 rng(51);
    const heat::HeatProblem p = heat::HeatProblem::unit_square(64, 48);
    const LowRankFactors f = heat::heat_initial_condition(64, 48);
    const double dt = 200.0 * p.dx * p.dx;
    const double tol = 1e-6;
    const DirkStepResult r =
        dirk_step(f, StageOperators{p.op1, p.op2}, backward_euler(), dt, std::vector<double>{tol}, {});
    const AdaptiveResult a = solve_adaptive(assemble_stage_operator(p.op1, dt, 1.0),
                                            assemble_stage_operator(p.op2, dt, 1.0), f, tol);
    EXPECT_EQ(r.diagnostics.iterations, a.diagnostics.iterations);
    EXPECT_LE((r.f.materialize() - a.f.materialize()).norm(), 1e-12 * a.f.materialize().norm());
    EXPECT_NEAR(r.diagnostics.stage_residuals[0], a.diagnostics.residual, 1e-9 * tol);
}

TEST(DirkStep, StiffAccuracyWithoutPostProcess) {
    const heat::HeatProblem p = heat::HeatProblem::unit_square(40, 40);
    const LowRankFactors f = heat::heat_initial_condition(40, 40);
    const double dt = 50.0 * p.dx * p.dx;
    for (const ButcherTable& t : builtin_tables()) {
        const DirkStepResult r = dirk_step(f, StageOperators{p.op1, p.op2}, t, dt, tolerances(t, 1e-9), {});
        EXPECT_LE((r.f.materialize() - r.diagnostics.pre_post.materialize()).norm(), 0.0) << t.name;
        ASSERT_EQ(r.diagnostics.stage_residuals.size(), t.stages());
        for (std::size_t k = 0; k < t.stages(); ++k) {
            EXPECT_LT(r.diagnostics.stage_residuals[k], 1e-9);
        }
    }
}

TEST(DirkStep, PostProcessAppliedOnce) {
    const heat::HeatProblem p = heat::HeatProblem::unit_square(32, 32);
    const LowRankFactors f = heat::heat_initial_condition(32, 32);
    int calls = 0;
    const PostProcess post = [&](const LowRankFactors& g) {
        ++calls;
        return lr_scale(g, 2.0);
    };
    const DirkStepResult r =
        dirk_step(f, StageOperators{p.op1, p.op2}, dirk3(), 0.01, tolerances(dirk3(), 1e-10), post);
    EXPECT_EQ(calls, 1);
    EXPECT_LE((r.f.materialize() - 2.0 * r.diagnostics.pre_post.materialize()).norm(), 1e-12);
}

TEST(DirkStep, ArgumentChecks) {
    const LowRankFactors f(Matrix::Ones(8, 1), Matrix::Ones(1, 1), Matrix::Ones(8, 1));
    const StageOperators ops{TridiagonalOperator::identity(8), TridiagonalOperator::identity(8)};
    EXPECT_THROW(dirk_step(f, ops, dirk2(), 0.1, std::vector<double>{1.0}, {}), DimensionMismatch);
    EXPECT_THROW(dirk_step(f, ops, backward_euler(), 0.0, std::vector<double>{1.0}, {}), InvalidArgument);
    const StageOperators bad{TridiagonalOperator::identity(7), TridiagonalOperator::identity(8)};
    EXPECT_THROW(dirk_step(f, bad, backward_euler(), 0.1, std::vector<double>{1.0}, {}), DimensionMismatch);
}

TEST(DirkStep, FourierModeConvergenceOrder) {
    const std::size_t n = 32;
    const heat::HeatProblem p = heat::HeatProblem::unit_square(n, n);
    const LowRankFactors f0 = cosine_mode(n);
    const double mu = -2.0 * p.d1 * (1.0 - std::cos(2.0 * std::numbers::pi * p.dx)) / (p.dx * p.dx);
    const double t_final = 0.1;
    for (const ButcherTable& t : builtin_tables()) {
        std::vector<double> err;
        for (int steps : {10, 20, 40}) {
            const double dt = t_final / steps;
            LowRankFactors f = f0;
            for (int s = 0; s < steps; ++s) {
                f = dirk_step(f, StageOperators{p.op1, p.op2}, t, dt, tolerances(t, 1e-13), {}).f;
            }
            const Matrix exact = std::exp(2.0 * mu * t_final) * f0.materialize();
            err.push_back((f.materialize() - exact).norm());
        }
        const double order = std::log2(err[1] / err[2]);
        EXPECT_NEAR(order, t.order, 0.25) << t.name << " errors " << err[0] << " " << err[1] << " " << err[2];
    }
}

TEST(DirkStep, HeatRestartsBounded) {
    const heat::HeatProblem p = heat::HeatProblem::unit_square(128, 128);
    heat::HeatRunOptions o;
    o.table = dirk2();
    o.dt = 400.0 * p.dx * p.dx;
    o.steps = 8;
    o.tol_constant = 1e-3;
    const heat::HeatRunResult r = heat::integrate(p, heat::heat_initial_condition(128, 128), o);
    for (const heat::HeatStepRecord& rec : r.history) {
        EXPECT_LE(rec.restarts, 2) << rec.step;
    }
}
