#pragma once

#include <cmath>

#include "ark/linalg/matrix.hpp"
#include "ark/linalg/tridiagonal.hpp"
#include "ark/lowrank/factors.hpp"

namespace ark {

/// Projection of one operator onto an orthonormal basis Q:
/// the reduced matrix Q^T A Q and the triangular factor R of [Q, A Q].
struct ProjectedOperator {
    Matrix reduced;
    Matrix r;
};

inline Matrix triangular_factor(const Matrix& m) {
    Eigen::HouseholderQR<Matrix> qr(m);
    const Eigen::Index k = std::min(m.rows(), m.cols());
    Matrix r = qr.matrixQR().topRows(k).triangularView<Eigen::Upper>();
    return r;
}

inline ProjectedOperator project_operator(const TridiagonalOperator& a, const Matrix& q) {
    Matrix aq = a.apply(q);
    ProjectedOperator p;
    p.reduced = q.transpose() * aq;
    p.r = triangular_factor(hstack(q, aq));
    return p;
}

/// Reduced system on bases U1 (rows) and V1 (columns).
struct GalerkinSystem {
    Matrix a1;  // U1^T A1 U1
    Matrix a2;  // V1^T A2 V1
    Matrix b;   // U1^T B V1
    Matrix r_u; // R of [U1, A1 U1]
    Matrix r_v; // R of [V1, A2 V1]
};

/// (U1^T U0) S0 (V1^T V0)^T for B = U0 S0 V0^T.
inline Matrix project_rhs(const Matrix& u1, const Matrix& v1, const LowRankFactors& b) {
    if (u1.rows() != b.rows() || v1.rows() != b.cols()) {
        throw DimensionMismatch("project_rhs: basis rows do not match the right-hand side");
    }
    return (u1.transpose() * b.u()) * b.s() * (v1.transpose() * b.v()).transpose();
}

inline GalerkinSystem assemble_galerkin(const TridiagonalOperator& a1, const TridiagonalOperator& a2,
                                        const Matrix& u1, const Matrix& v1,
                                        const LowRankFactors& b) {
    if (u1.rows() != static_cast<Eigen::Index>(a1.size()) ||
        v1.rows() != static_cast<Eigen::Index>(a2.size())) {
        throw DimensionMismatch("assemble_galerkin: basis rows do not match operator sizes");
    }
    ProjectedOperator p1 = project_operator(a1, u1);
    ProjectedOperator p2 = project_operator(a2, v1);
    return {std::move(p1.reduced), std::move(p2.reduced), project_rhs(u1, v1, b),
            std::move(p1.r), std::move(p2.r)};
}

/// || R_U [[-B, S], [S, 0]] R_V^T ||_F, which equals the Frobenius norm of
/// A1 U S V^T + U S V^T A2^T - B whenever B lies in span(U) x span(V).
inline double residual_norm(const Matrix& r_u, const Matrix& r_v, const Matrix& b,
                            const Matrix& s) {
    const Eigen::Index a = s.rows();
    const Eigen::Index c = s.cols();
    if (b.rows() != a || b.cols() != c || r_u.cols() != 2 * a || r_v.cols() != 2 * c) {
        throw DimensionMismatch("residual_norm: core shapes do not match the triangular factors");
    }
    Matrix z = Matrix::Zero(2 * a, 2 * c);
    z.topLeftCorner(a, c) = -b;
    z.topRightCorner(a, c) = s;
    z.bottomLeftCorner(a, c) = s;
    return (r_u * z * r_v.transpose()).norm();
}

inline double residual_norm(const GalerkinSystem& sys, const Matrix& s) {
    return residual_norm(sys.r_u, sys.r_v, sys.b, s);
}

/// Residual acceptance tolerance C * dt^(p+1).
inline double lte_tolerance(double c, double dt, int order) {
    return c * std::pow(dt, order + 1);
}

} // namespace ark
