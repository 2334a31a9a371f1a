#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include <Eigen/Eigenvalues>

#include "ark/dirk/butcher.hpp"
#include "ark/dirk/stepper.hpp"
#include "ark/krylov/galerkin.hpp"
#include "ark/linalg/tridiagonal.hpp"
#include "ark/lowrank/factors.hpp"

namespace ark::heat {

/// d * (second difference) on a periodic grid with spacing dx.
inline TridiagonalOperator build_heat_operator(std::size_t n, double d, double dx) {
    if (n < 3) {
        throw InvalidArgument("build_heat_operator: need at least 3 nodes");
    }
    const double k = d / (dx * dx);
    std::vector<double> lower(n, k), diag(n, -2.0 * k), upper(n, k);
    return {std::move(lower), std::move(diag), std::move(upper), PeriodicCorners{k, k}};
}

/// Periodic unit-square heat problem.
struct HeatProblem {
    std::size_t n1 = 0;
    std::size_t n2 = 0;
    double dx = 0.0;
    double dy = 0.0;
    double d1 = 0.5;
    double d2 = 0.5;
    TridiagonalOperator op1;
    TridiagonalOperator op2;

    static HeatProblem unit_square(std::size_t n1, std::size_t n2, double d1 = 0.5,
                                   double d2 = 0.5) {
        HeatProblem p;
        p.n1 = n1;
        p.n2 = n2;
        p.dx = 1.0 / static_cast<double>(n1);
        p.dy = 1.0 / static_cast<double>(n2);
        p.d1 = d1;
        p.d2 = d2;
        p.op1 = build_heat_operator(n1, d1, p.dx);
        p.op2 = build_heat_operator(n2, d2, p.dy);
        return p;
    }

    std::vector<double> x() const { return nodes(n1, dx); }
    std::vector<double> y() const { return nodes(n2, dy); }

    static std::vector<double> nodes(std::size_t n, double h) {
        std::vector<double> v(n);
        for (std::size_t i = 0; i < n; ++i) {
            v[i] = static_cast<double>(i) * h;
        }
        return v;
    }
};

inline double gaussian_bump(double x, double center) {
    const double r = x - center;
    return std::exp(-400.0 * r * r);
}

/// 0.5 g(x; 0.3) g(y; 0.35) + 0.8 g(x; 0.65) g(y; 0.5), g(x; c) = exp(-400 (x - c)^2),
/// as unnormalized rank-2 factors.
inline LowRankFactors heat_initial_condition(std::size_t n1, std::size_t n2) {
    const auto r1 = static_cast<Eigen::Index>(n1);
    const auto r2 = static_cast<Eigen::Index>(n2);
    const double dx = 1.0 / static_cast<double>(n1);
    const double dy = 1.0 / static_cast<double>(n2);
    Matrix u(r1, 2), v(r2, 2), s = Matrix::Zero(2, 2);
    for (Eigen::Index i = 0; i < r1; ++i) {
        const double x = static_cast<double>(i) * dx;
        u(i, 0) = gaussian_bump(x, 0.3);
        u(i, 1) = gaussian_bump(x, 0.65);
    }
    for (Eigen::Index j = 0; j < r2; ++j) {
        const double y = static_cast<double>(j) * dy;
        v(j, 0) = gaussian_bump(y, 0.35);
        v(j, 1) = gaussian_bump(y, 0.5);
    }
    s(0, 0) = 0.5;
    s(1, 1) = 0.8;
    return {std::move(u), std::move(s), std::move(v), false};
}

/// dx dy * sum of all entries of U S V^T.
inline double total_mass(const LowRankFactors& f, double dx, double dy) {
    const Vector cu = f.u().colwise().sum().transpose();
    const Vector cv = f.v().colwise().sum().transpose();
    return dx * dy * cu.dot(f.s() * cv);
}

/// Splits F into its mean times the all-ones matrix plus a zero-mass
/// remainder F2, truncates F2 at eps and puts back the constant that makes
/// the total mass equal `n_exact`. The result is orthonormal.
inline LowRankFactors lomac_null_correction(const LowRankFactors& f, double n_exact, double dx,
                                            double dy, double eps) {
    const double cells = static_cast<double>(f.rows()) * static_cast<double>(f.cols()) * dx * dy;
    const Matrix ones_u = Matrix::Ones(f.rows(), 1);
    const Matrix ones_v = Matrix::Ones(f.cols(), 1);
    const double mean = total_mass(f, dx, dy) / cells;
    Matrix c(1, 1);
    c(0, 0) = -mean;
    const LowRankFactors f2 = truncate(lr_add(f, LowRankFactors(ones_u, c, ones_v, false)), eps);
    c(0, 0) = (n_exact - total_mass(f2, dx, dy)) / cells;
    return orthonormalize(lr_add(LowRankFactors(ones_u, c, ones_v, false), f2));
}

/// Exact solution of the semi-discrete problem dF/dt = D1 F + F D2^T via
/// the eigen-decomposition of the symmetric operators.
class HeatExactPropagator {
public:
    HeatExactPropagator(const TridiagonalOperator& d1, const TridiagonalOperator& d2) {
        Eigen::SelfAdjointEigenSolver<Matrix> e1(d1.dense());
        Eigen::SelfAdjointEigenSolver<Matrix> e2(d2.dense());
        q1_ = e1.eigenvectors();
        q2_ = e2.eigenvectors();
        l1_ = e1.eigenvalues();
        l2_ = e2.eigenvalues();
    }

    Matrix evolve(const Matrix& f0, double t) const {
        Matrix c = q1_.transpose() * f0 * q2_;
        for (Eigen::Index j = 0; j < c.cols(); ++j) {
            for (Eigen::Index i = 0; i < c.rows(); ++i) {
                c(i, j) *= std::exp(t * (l1_(i) + l2_(j)));
            }
        }
        return q1_ * c * q2_.transpose();
    }

private:
    Matrix q1_, q2_;
    Vector l1_, l2_;
};

inline constexpr Eigen::Index kL1RowBlock = 1024;

/// dx dy * sum |U S V^T - ref|, materialized 1024 rows at a time.
inline double l1_error(const LowRankFactors& f, const Matrix& ref, double dx, double dy) {
    if (ref.rows() != f.rows() || ref.cols() != f.cols()) {
        throw DimensionMismatch("l1_error: reference shape differs");
    }
    const Matrix sv = f.s() * f.v().transpose();
    double sum = 0.0;
    for (Eigen::Index r0 = 0; r0 < f.rows(); r0 += kL1RowBlock) {
        const Eigen::Index nr = std::min(kL1RowBlock, f.rows() - r0);
        const Matrix block = f.u().middleRows(r0, nr) * sv;
        sum += (block - ref.middleRows(r0, nr)).cwiseAbs().sum();
    }
    return dx * dy * sum;
}

/// dx dy * sum |U S V^T - c|.
inline double l1_distance_to_constant(const LowRankFactors& f, double c, double dx, double dy) {
    const Matrix sv = f.s() * f.v().transpose();
    double sum = 0.0;
    for (Eigen::Index r0 = 0; r0 < f.rows(); r0 += kL1RowBlock) {
        const Eigen::Index nr = std::min(kL1RowBlock, f.rows() - r0);
        sum += ((f.u().middleRows(r0, nr) * sv).array() - c).abs().sum();
    }
    return dx * dy * sum;
}

struct HeatRunOptions {
    ButcherTable table = backward_euler();
    double dt = 0.0;
    std::size_t steps = 0;
    double tol_constant = 1.0; // C in C dt^(p+1)
    double eps_rel = 1e-10;    // truncation threshold relative to sigma_1
    bool lomac = false;
    int max_iter = kDefaultMaxKrylovIterations;
};

struct HeatStepRecord {
    std::size_t step = 0;
    double t = 0.0;
    Eigen::Index rank = 0;
    int iterations = 0;
    int restarts = 0;
    double mass = 0.0;
    std::vector<double> stage_residuals;
    std::vector<double> stage_tolerances;
};

struct HeatRunResult {
    LowRankFactors f;
    std::vector<HeatStepRecord> history;
};

/// Number of steps and the step size that lands exactly on t_final with
/// dt <= lambda dx^2.
inline std::pair<std::size_t, double> steps_for(double t_final, double lambda, double dx) {
    const double target = lambda * dx * dx;
    const auto n = static_cast<std::size_t>(std::ceil(t_final / target - 1e-12));
    const std::size_t steps = std::max<std::size_t>(n, 1);
    return {steps, t_final / static_cast<double>(steps)};
}

/// Adaptive-rank integration of the heat problem from f0.
/// `on_step` (optional) sees each accepted step.
inline HeatRunResult integrate(const HeatProblem& p, const LowRankFactors& f0,
                               const HeatRunOptions& o,
                               const std::function<void(const HeatStepRecord&, const LowRankFactors&)>&
                                   on_step = {}) {
    const StageOperators ops{p.op1, p.op2};
    const double n_exact = total_mass(f0, p.dx, p.dy);
    const std::vector<double> tol(o.table.stages(),
                                  lte_tolerance(o.tol_constant, o.dt, o.table.order));
    const PostProcess post = [&](const LowRankFactors& g) {
        const double eps = o.eps_rel * leading_singular_value(g);
        return o.lomac ? lomac_null_correction(g, n_exact, p.dx, p.dy, eps) : truncate(g, eps);
    };
    HeatRunResult out;
    out.f = truncate(f0, 0.0);
    for (std::size_t n = 0; n < o.steps; ++n) {
        DirkStepResult r = dirk_step(out.f, ops, o.table, o.dt, tol, post, o.max_iter);
        out.f = std::move(r.f);
        HeatStepRecord rec;
        rec.step = n + 1;
        rec.t = static_cast<double>(n + 1) * o.dt;
        rec.rank = out.f.rank();
        rec.iterations = r.diagnostics.iterations;
        rec.restarts = r.diagnostics.restarts;
        rec.mass = total_mass(out.f, p.dx, p.dy);
        rec.stage_residuals = std::move(r.diagnostics.stage_residuals);
        rec.stage_tolerances = std::move(r.diagnostics.stage_tolerances);
        if (on_step) {
            on_step(rec, out.f);
        }
        out.history.push_back(std::move(rec));
    }
    return out;
}

} // namespace ark::heat
