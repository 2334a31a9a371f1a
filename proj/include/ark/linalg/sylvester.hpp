#pragma once

#include <cmath>
#include <complex>
#include <string>

#include <Eigen/Eigenvalues>

#include "ark/linalg/matrix.hpp"

namespace ark {

inline constexpr double kSylvesterResidualFactor = 1e-10;

namespace detail {

/// Complex Schur form of a real matrix: real Schur first, then each 2x2
/// block of a complex pair is made upper triangular by a complex Givens
/// rotation. Returns false if the QR iteration did not converge.
inline bool complex_schur(const Matrix& a, Eigen::MatrixXcd& q, Eigen::MatrixXcd& t) {
    Eigen::RealSchur<Matrix> rs(a);
    if (rs.info() != Eigen::Success) {
        return false;
    }
    using C = std::complex<double>;
    t = rs.matrixT().cast<C>();
    q = rs.matrixU().cast<C>();
    const Eigen::Index n = a.rows();
    for (Eigen::Index m = n - 1; m >= 1; --m) {
        const C sub = t(m, m - 1);
        if (sub == C(0.0)) {
            continue;
        }
        const C a11 = t(m - 1, m - 1), a12 = t(m - 1, m), a22 = t(m, m);
        const C half = 0.5 * (a11 - a22);
        const C mu = half + std::sqrt(half * half + a12 * sub); // eigenvalue minus a22
        const double r = std::hypot(std::abs(mu), std::abs(sub));
        const C c = mu / r;
        const C s = sub / r;
        // G = [conj(c) s; -s c]
        for (Eigen::Index j = m - 1; j < n; ++j) {
            const C x = t(m - 1, j), y = t(m, j);
            t(m - 1, j) = std::conj(c) * x + s * y;
            t(m, j) = -s * x + c * y;
        }
        for (Eigen::Index i = 0; i <= m; ++i) {
            const C x = t(i, m - 1), y = t(i, m);
            t(i, m - 1) = x * c + y * std::conj(s);
            t(i, m) = -x * std::conj(s) + y * std::conj(c);
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            const C x = q(i, m - 1), y = q(i, m);
            q(i, m - 1) = x * c + y * std::conj(s);
            q(i, m) = -x * std::conj(s) + y * std::conj(c);
        }
        t(m, m - 1) = 0.0;
    }
    return true;
}

} // namespace detail

/// Bartels-Stewart solver for A1 X + X A2^T = B with the complex Schur
/// forms of A1 and A2 computed once and reused for every right-hand side.
/// Each solve checks its residual; a failure means the spectra of A1 and
/// -A2 (nearly) overlap.
class DenseSylvesterSolver {
public:
    using CMatrix = Eigen::MatrixXcd;

    DenseSylvesterSolver(const Matrix& a1, const Matrix& a2) : a1_(a1), a2_(a2) {
        if (a1.rows() != a1.cols() || a2.rows() != a2.cols()) {
            throw DimensionMismatch("DenseSylvesterSolver: coefficients must be square");
        }
        require_finite(a1, "DenseSylvesterSolver: A1");
        require_finite(a2, "DenseSylvesterSolver: A2");
        if (a1.rows() > 0 && a2.rows() > 0) {
            if (!detail::complex_schur(a1, q1_, t1_) || !detail::complex_schur(a2, q2_, t2_)) {
                throw ConvergenceFailure("DenseSylvesterSolver: Schur decomposition did not converge");
            }
        }
        scale_ = a1.norm() + a2.norm();
    }

    Matrix solve(const Matrix& b) const {
        const Eigen::Index m = a1_.rows();
        const Eigen::Index k = a2_.rows();
        if (b.rows() != m || b.cols() != k) {
            throw DimensionMismatch("DenseSylvesterSolver::solve: expected B " + std::to_string(m) +
                                    "x" + std::to_string(k) + ", got " +
                                    std::to_string(b.rows()) + "x" + std::to_string(b.cols()));
        }
        if (m == 0 || k == 0) {
            return Matrix::Zero(m, k);
        }
        require_finite(b, "DenseSylvesterSolver::solve: B");

        // A1 = Q1 T1 Q1^*, A2^T = conj(Q2) T2^T Q2^T. With X = Q1 Y Q2^T the
        // equation becomes T1 Y + Y T2^T = Q1^* B conj(Q2); T2^T is lower
        // triangular, so columns are resolved from the last one backwards.
        const CMatrix c = q1_.adjoint() * b.cast<std::complex<double>>() * q2_.conjugate();
        CMatrix y(m, k);
        CMatrix shifted = t1_;
        for (Eigen::Index j = k - 1; j >= 0; --j) {
            Eigen::VectorXcd rhs = c.col(j);
            if (j + 1 < k) {
                rhs.noalias() -= y.rightCols(k - j - 1) * t2_.row(j).tail(k - j - 1).transpose();
            }
            shifted.diagonal() = t1_.diagonal().array() + t2_(j, j);
            y.col(j) = shifted.triangularView<Eigen::Upper>().solve(rhs);
        }
        Matrix x = (q1_ * y * q2_.transpose()).real();

        const double res = (a1_ * x + x * a2_.transpose() - b).norm();
        if (!std::isfinite(res) || res > kSylvesterResidualFactor * scale_ * x.norm() + 1e-300) {
            throw SpectralOverlap("solve_sylvester_dense: residual " + std::to_string(res) +
                                  " exceeds tolerance; spectra of A1 and -A2 overlap");
        }
        return x;
    }

private:
    Matrix a1_;
    Matrix a2_;
    CMatrix q1_, t1_, q2_, t2_;
    double scale_ = 0.0;
};

inline Matrix solve_sylvester_dense(const Matrix& a1, const Matrix& a2, const Matrix& b) {
    if (b.rows() != a1.rows() || b.cols() != a2.rows()) {
        throw DimensionMismatch("solve_sylvester_dense: B is " + std::to_string(b.rows()) + "x" +
                                std::to_string(b.cols()) + ", expected " +
                                std::to_string(a1.rows()) + "x" + std::to_string(a2.rows()));
    }
    return DenseSylvesterSolver(a1, a2).solve(b);
}

} // namespace ark
