#pragma once

#include <utility>

#include "ark/linalg/matrix.hpp"
#include "ark/linalg/tridiagonal.hpp"

namespace ark {

/// Orthonormalizes the columns of `w` against the orthonormal columns of `q`
/// and against each other (block Gram-Schmidt, applied twice). A column is
/// dropped when less than `drop_tol` of its original norm survives.
inline Matrix orthonormalize_against(const Matrix& q, const Matrix& w,
                                     double drop_tol = kDeflationTolerance) {
    const Eigen::Index n = w.rows();
    Matrix out(n, w.cols());
    Eigen::Index kept = 0;
    for (Eigen::Index j = 0; j < w.cols(); ++j) {
        Vector x = w.col(j);
        const double nrm0 = x.norm();
        if (!(nrm0 > 0.0)) {
            continue;
        }
        for (int pass = 0; pass < 2; ++pass) {
            if (q.cols() > 0) {
                x.noalias() -= q * (q.transpose() * x);
            }
            for (Eigen::Index i = 0; i < kept; ++i) {
                x -= out.col(i).dot(x) * out.col(i);
            }
        }
        const double nrm = x.norm();
        if (nrm > drop_tol * nrm0) {
            out.col(kept++) = x / nrm;
        }
    }
    return out.leftCols(kept);
}

/// Orthonormal basis of the extended Krylov space
/// span{U0, A U0, A^-1 U0, A^2 U0, A^-2 U0, ...}.
///
/// Every growth step appends one forward block (A times the last forward
/// block) and one inverse block (A^-1 times the last inverse block), so the
/// dimension after m steps is at most (2m + 1) r for a rank-r seed.
class ExtendedKrylovBasis {
public:
    ExtendedKrylovBasis(const Matrix& u0, TridiagonalOperator a) : a_(std::move(a)) {
        if (u0.rows() != static_cast<Eigen::Index>(a_.size())) {
            throw DimensionMismatch("ExtendedKrylovBasis: seed rows do not match operator size");
        }
        q_ = orthonormalize_against(Matrix(u0.rows(), 0), u0);
        forward_ = q_;
        inverse_ = q_;
        seed_rank_ = q_.cols();
    }

    const Matrix& q() const noexcept { return q_; }
    Eigen::Index dim() const noexcept { return q_.cols(); }
    int iterations() const noexcept { return m_; }
    Eigen::Index seed_rank() const noexcept { return seed_rank_; }
    const TridiagonalOperator& op() const noexcept { return a_; }

    /// Appends the next forward and inverse blocks. Returns the number of
    /// columns that survived deflation; 0 means the basis spans an invariant
    /// subspace and further growth is pointless.
    Eigen::Index grow() {
        Matrix nf = forward_.cols() > 0 ? orthonormalize_against(q_, a_.apply(forward_))
                                        : Matrix(q_.rows(), 0);
        Matrix with_forward = hstack(q_, nf);
        Matrix ni = inverse_.cols() > 0 ? orthonormalize_against(with_forward, a_.solve(inverse_))
                                        : Matrix(q_.rows(), 0);
        q_ = hstack(with_forward, ni);
        const Eigen::Index added = nf.cols() + ni.cols();
        forward_ = std::move(nf);
        inverse_ = std::move(ni);
        ++m_;
        return added;
    }

private:
    TridiagonalOperator a_;
    Matrix q_;
    Matrix forward_;
    Matrix inverse_;
    Eigen::Index seed_rank_ = 0;
    int m_ = 0;
};

/// Free-function form of ExtendedKrylovBasis::grow.
inline Eigen::Index grow_basis(ExtendedKrylovBasis& basis) { return basis.grow(); }

} // namespace ark
