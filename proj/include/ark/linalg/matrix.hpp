#pragma once

#include <algorithm>
#include <cmath>
#include <string_view>
#include <vector>

#include <Eigen/Dense>

#include "ark/core/errors.hpp"

namespace ark {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

inline void require_finite(const Matrix& m, std::string_view what) {
    if (!m.allFinite()) {
        throw NonFiniteValue(std::string(what) + ": non-finite entry");
    }
}

// Reduced QR by modified Gram-Schmidt with one re-orthogonalization pass.
// Columns whose remainder drops below `drop_tol * ||M||_F` are not given a
// Q column; their coefficients against the retained columns stay in R, so
// Q * R reproduces M up to the dropped remainders.
struct QrResult {
    Matrix q; // n x k'
    Matrix r; // k' x k
};

inline constexpr double kDeflationTolerance = 1e-12;

inline QrResult mgs_qr(const Matrix& m, double drop_tol = kDeflationTolerance) {
    const Eigen::Index n = m.rows();
    const Eigen::Index k = m.cols();
    if (n == 0 && k > 0) {
        throw DimensionMismatch("mgs_qr: matrix has columns but no rows");
    }
    const double threshold = drop_tol * m.norm();

    Matrix q(n, k);
    Matrix r = Matrix::Zero(k, k);
    Eigen::Index kept = 0;
    for (Eigen::Index j = 0; j < k; ++j) {
        Vector v = m.col(j);
        for (int pass = 0; pass < 2; ++pass) {
            for (Eigen::Index i = 0; i < kept; ++i) {
                const double c = q.col(i).dot(v);
                r(i, j) += c;
                v.noalias() -= c * q.col(i);
            }
        }
        const double nrm = v.norm();
        if (nrm > threshold && nrm > 0.0) {
            q.col(kept) = v / nrm;
            r(kept, j) = nrm;
            ++kept;
        }
    }
    return {q.leftCols(kept), r.topRows(kept)};
}

struct SvdResult {
    Matrix left;             // m x p
    std::vector<double> sigma; // p, nonincreasing
    Matrix right;            // k x p
};

inline SvdResult reduced_svd(const Matrix& s) {
    const Eigen::Index p = std::min(s.rows(), s.cols());
    if (p == 0) {
        return {Matrix(s.rows(), 0), {}, Matrix(s.cols(), 0)};
    }
    Eigen::BDCSVD<Matrix> svd(s, Eigen::ComputeThinU | Eigen::ComputeThinV);
    const Vector& sv = svd.singularValues();
    if (!sv.allFinite()) {
        throw ConvergenceFailure("reduced_svd: singular values did not converge");
    }
    SvdResult out{svd.matrixU(), std::vector<double>(sv.data(), sv.data() + sv.size()),
                  svd.matrixV()};
    return out;
}

inline Matrix hstack(const Matrix& a, const Matrix& b) {
    if (a.rows() != b.rows()) {
        throw DimensionMismatch("hstack: row counts differ");
    }
    Matrix out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

inline Matrix block_diag(const Matrix& a, const Matrix& b) {
    Matrix out = Matrix::Zero(a.rows() + b.rows(), a.cols() + b.cols());
    out.topLeftCorner(a.rows(), a.cols()) = a;
    out.bottomRightCorner(b.rows(), b.cols()) = b;
    return out;
}

} // namespace ark
