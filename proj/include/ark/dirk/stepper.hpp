#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ark/dirk/butcher.hpp"
#include "ark/krylov/adaptive.hpp"
#include "ark/krylov/basis.hpp"
#include "ark/krylov/galerkin.hpp"
#include "ark/linalg/sylvester.hpp"
#include "ark/linalg/tridiagonal.hpp"
#include "ark/lowrank/factors.hpp"

namespace ark {

/// Right-hand-side operators of dF/dt = D1 F + F D2^T for one stage.
struct StageOperators {
    TridiagonalOperator d1;
    TridiagonalOperator d2;
};

/// 1/2 I - dt * a_kk * D.
inline TridiagonalOperator assemble_stage_operator(const TridiagonalOperator& d, double dt,
                                                   double a_kk) {
    return d.affine(0.5, -dt * a_kk);
}

/// Reduced right-hand side of stage k (0-based):
///   B_k = B_1 + sum_{l<k} a_kl * Y_l,  Y_l = (S_l - B_l) / a_ll.
/// `increments` holds Y_0 ... Y_{k-1}.
inline Matrix stage_rhs(const Matrix& b1, std::span<const Matrix> increments,
                        const ButcherTable& table, std::size_t k) {
    if (k >= table.stages()) {
        throw MissingStage("stage_rhs: stage " + std::to_string(k) + " beyond table " + table.name);
    }
    if (increments.size() < k) {
        throw MissingStage("stage_rhs: stage " + std::to_string(k) + " needs " +
                           std::to_string(k) + " increments, have " +
                           std::to_string(increments.size()));
    }
    Matrix b = b1;
    for (std::size_t l = 0; l < k; ++l) {
        if (increments[l].rows() != b1.rows() || increments[l].cols() != b1.cols()) {
            throw DimensionMismatch("stage_rhs: increment shape differs from B_1");
        }
        b.noalias() += table.a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) *
                       increments[l];
    }
    return b;
}

struct DirkDiagnostics {
    int iterations = 0;                  // basis growth steps
    int restarts = 0;                    // rejections raised by stages after the first
    std::vector<double> stage_residuals; // of the accepted pass
    std::vector<double> stage_tolerances;
    Eigen::Index rank_u = 0;             // shared basis sizes
    Eigen::Index rank_v = 0;
    LowRankFactors pre_post;             // U1 S^(s) V1^T before post-processing
};

struct DirkStepResult {
    LowRankFactors f;
    DirkDiagnostics diagnostics;
};

using PostProcess = std::function<LowRankFactors(const LowRankFactors&)>;

namespace detail {

// Projections of one D on a basis Q: Q^T D Q and R of [Q, D Q]. The stage
// operator 1/2 I - c D then projects to 1/2 I - c Q^T D Q and its R factor
// is R_D [[I, I/2], [0, -c I]].
struct ProjectedRhsOperator {
    Matrix reduced;
    Matrix r;
};

inline ProjectedRhsOperator project_rhs_operator(const TridiagonalOperator& d, const Matrix& q) {
    Matrix dq = d.apply(q);
    return {q.transpose() * dq, triangular_factor(hstack(q, dq))};
}

inline Matrix stage_r_factor(const Matrix& r_d, double c) {
    const Eigen::Index k = r_d.cols() / 2;
    Matrix t = Matrix::Zero(2 * k, 2 * k);
    t.topLeftCorner(k, k).setIdentity();
    t.topRightCorner(k, k) = 0.5 * Matrix::Identity(k, k);
    t.bottomRightCorner(k, k) = -c * Matrix::Identity(k, k);
    return r_d * t;
}

inline Matrix stage_reduced(const Matrix& reduced_d, double c) {
    Matrix a = -c * reduced_d;
    a.diagonal().array() += 0.5;
    return a;
}

} // namespace detail

/// One step of a stiffly accurate DIRK scheme for dF/dt = D1 F + F D2^T on
/// a single pair of extended Krylov bases.
///
/// `ops` holds either one operator pair used by every stage or one pair per
/// stage. The bases are grown with the first stage's operators; when any
/// stage misses its tolerance the step returns to basis growth. The accepted
/// result U1 S^(s) V1^T is passed through `post` exactly once.
inline DirkStepResult dirk_step(const LowRankFactors& fn, std::span<const StageOperators> ops,
                                const ButcherTable& table, double dt,
                                std::span<const double> tolerances, const PostProcess& post,
                                int max_iter = kDefaultMaxKrylovIterations) {
    const std::size_t s = table.stages();
    if (ops.size() != 1 && ops.size() != s) {
        throw DimensionMismatch("dirk_step: need 1 or " + std::to_string(s) + " operator pairs");
    }
    if (tolerances.size() != s) {
        throw DimensionMismatch("dirk_step: need " + std::to_string(s) + " stage tolerances");
    }
    if (!(dt > 0.0)) {
        throw InvalidArgument("dirk_step: dt must be positive");
    }
    for (const StageOperators& op : ops) {
        if (static_cast<Eigen::Index>(op.d1.size()) != fn.rows() ||
            static_cast<Eigen::Index>(op.d2.size()) != fn.cols()) {
            throw DimensionMismatch("dirk_step: operator sizes do not match the solution");
        }
    }
    auto op_index = [&](std::size_t k) { return ops.size() == 1 ? std::size_t{0} : k; };

    TridiagonalOperator a1 = assemble_stage_operator(ops[0].d1, dt, table.a(0, 0));
    TridiagonalOperator a2 = assemble_stage_operator(ops[0].d2, dt, table.a(0, 0));
    a1.factorize_now();
    a2.factorize_now();
    ExtendedKrylovBasis bu(fn.u(), std::move(a1));
    ExtendedKrylovBasis bv(fn.v(), std::move(a2));

    DirkDiagnostics diag;
    diag.stage_tolerances.assign(tolerances.begin(), tolerances.end());
    for (;;) {
        const Matrix& u1 = bu.q();
        const Matrix& v1 = bv.q();
        const Matrix b1 = project_rhs(u1, v1, fn);

        std::vector<detail::ProjectedRhsOperator> pu(ops.size()), pv(ops.size());
        std::vector<bool> projected(ops.size(), false);

        std::vector<Matrix> increments;
        increments.reserve(s);
        diag.stage_residuals.clear();
        Matrix s_last;
        Matrix s_k;
        bool accepted = true;
        std::size_t rejected_stage = 0;
        for (std::size_t k = 0; k < s; ++k) {
            const std::size_t oi = op_index(k);
            if (!projected[oi]) {
                pu[oi] = detail::project_rhs_operator(ops[oi].d1, u1);
                pv[oi] = detail::project_rhs_operator(ops[oi].d2, v1);
                projected[oi] = true;
            }
            const auto kk = static_cast<Eigen::Index>(k);
            const double c = dt * table.a(kk, kk);
            const Matrix bk = stage_rhs(b1, increments, table, k);
            s_k = solve_sylvester_dense(detail::stage_reduced(pu[oi].reduced, c),
                                        detail::stage_reduced(pv[oi].reduced, c), bk);
            const double res = residual_norm(detail::stage_r_factor(pu[oi].r, c),
                                             detail::stage_r_factor(pv[oi].r, c), bk, s_k);
            diag.stage_residuals.push_back(res);
            if (!(res < tolerances[k])) {
                accepted = false;
                rejected_stage = k;
                break;
            }
            increments.push_back((s_k - bk) / table.a(kk, kk));
        }
        diag.rank_u = u1.cols();
        diag.rank_v = v1.cols();
        if (accepted) {
            diag.pre_post = LowRankFactors(u1, s_k, v1, true);
            LowRankFactors out = post ? post(diag.pre_post) : diag.pre_post;
            return {std::move(out), std::move(diag)};
        }
        if (rejected_stage > 0) {
            ++diag.restarts;
        }
        AdaptiveDiagnostics ad;
        ad.iterations = diag.iterations;
        ad.residual = diag.stage_residuals.back();
        ad.rank_u = u1.cols();
        ad.rank_v = v1.cols();
        ad.residual_history = diag.stage_residuals;
        if (diag.iterations >= max_iter) {
            throw MaxIterationsExceeded("dirk_step: stage " + std::to_string(rejected_stage + 1) +
                                            " residual above tolerance after " +
                                            std::to_string(max_iter) + " iterations",
                                        LowRankFactors(u1, s_k, v1, true), std::move(ad));
        }
        const Eigen::Index added = bu.grow() + bv.grow();
        ++diag.iterations;
        if (added == 0) {
            throw MaxIterationsExceeded("dirk_step: basis saturated with stage " +
                                            std::to_string(rejected_stage + 1) +
                                            " residual above tolerance",
                                        LowRankFactors(u1, s_k, v1, true), std::move(ad));
        }
    }
}

/// Convenience overload for a single operator pair shared by every stage.
inline DirkStepResult dirk_step(const LowRankFactors& fn, const StageOperators& op,
                                const ButcherTable& table, double dt,
                                std::span<const double> tolerances, const PostProcess& post,
                                int max_iter = kDefaultMaxKrylovIterations) {
    return dirk_step(fn, std::span<const StageOperators>(&op, 1), table, dt, tolerances, post,
                     max_iter);
}

} // namespace ark
