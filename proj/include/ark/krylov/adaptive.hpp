#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "ark/krylov/basis.hpp"
#include "ark/krylov/galerkin.hpp"
#include "ark/linalg/sylvester.hpp"
#include "ark/lowrank/factors.hpp"

namespace ark {

inline constexpr int kDefaultMaxKrylovIterations = 50;

struct AdaptiveDiagnostics {
    int iterations = 0;          // growth steps taken
    double residual = 0.0;       // residual of the returned iterate
    Eigen::Index rank_u = 0;     // basis sizes of the returned iterate
    Eigen::Index rank_v = 0;
    std::vector<double> residual_history;
};

struct AdaptiveResult {
    LowRankFactors f;
    AdaptiveDiagnostics diagnostics;
};

/// The residual never dropped below the requested tolerance. Carries the
/// last Galerkin iterate and the residual history.
class MaxIterationsExceeded : public Error {
public:
    MaxIterationsExceeded(const std::string& what, LowRankFactors best, AdaptiveDiagnostics diag)
        : Error(what), best_(std::move(best)), diag_(std::move(diag)) {}

    const LowRankFactors& best() const noexcept { return best_; }
    const AdaptiveDiagnostics& diagnostics() const noexcept { return diag_; }

private:
    LowRankFactors best_;
    AdaptiveDiagnostics diag_;
};

/// Solves A1 F + F A2^T = B for factored B on growing extended Krylov bases
/// until the residual norm drops below eps_tol. The returned factors are the
/// untruncated Galerkin iterate U1 S1 V1^T.
inline AdaptiveResult solve_adaptive(const TridiagonalOperator& a1, const TridiagonalOperator& a2,
                                     const LowRankFactors& b, double eps_tol,
                                     int max_iter = kDefaultMaxKrylovIterations) {
    if (b.rows() != static_cast<Eigen::Index>(a1.size()) ||
        b.cols() != static_cast<Eigen::Index>(a2.size())) {
        throw DimensionMismatch("solve_adaptive: right-hand side does not match operator sizes");
    }
    a1.factorize_now();
    a2.factorize_now();
    ExtendedKrylovBasis bu(b.u(), a1);
    ExtendedKrylovBasis bv(b.v(), a2);

    AdaptiveDiagnostics diag;
    for (;;) {
        const Matrix& u1 = bu.q();
        const Matrix& v1 = bv.q();
        GalerkinSystem sys = assemble_galerkin(a1, a2, u1, v1, b);
        Matrix s = solve_sylvester_dense(sys.a1, sys.a2, sys.b);
        const double res = residual_norm(sys, s);
        diag.residual_history.push_back(res);
        diag.iterations = bu.iterations();
        diag.residual = res;
        diag.rank_u = u1.cols();
        diag.rank_v = v1.cols();
        LowRankFactors f(u1, std::move(s), v1, true);
        if (res < eps_tol) {
            return {std::move(f), std::move(diag)};
        }
        if (bu.iterations() >= max_iter) {
            throw MaxIterationsExceeded("solve_adaptive: residual " + std::to_string(res) +
                                            " above tolerance after " +
                                            std::to_string(max_iter) + " iterations",
                                        std::move(f), std::move(diag));
        }
        const Eigen::Index added = bu.grow() + bv.grow();
        if (added == 0) {
            throw MaxIterationsExceeded("solve_adaptive: basis saturated with residual " +
                                            std::to_string(res) + " above tolerance",
                                        std::move(f), std::move(diag));
        }
    }
}

} // namespace ark
