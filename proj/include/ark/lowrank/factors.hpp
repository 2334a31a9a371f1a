#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ark/linalg/matrix.hpp"

namespace ark {

/// Factored matrix U * S * V^T.
///
/// U is N1 x r1, S is r1 x r2, V is N2 x r2. Truncated factors always have
/// a square diagonal core; Galerkin iterates may carry a rectangular one when
/// the two bases deflated to different sizes.
class LowRankFactors {
public:
    LowRankFactors() = default;

    LowRankFactors(Matrix u, Matrix s, Matrix v, bool orthonormal = false)
        : u_(std::move(u)), s_(std::move(s)), v_(std::move(v)), orthonormal_(orthonormal) {
        if (s_.rows() != u_.cols() || s_.cols() != v_.cols()) {
            throw DimensionMismatch("LowRankFactors: core is " + std::to_string(s_.rows()) + "x" +
                                    std::to_string(s_.cols()) + " but factors have " +
                                    std::to_string(u_.cols()) + " and " +
                                    std::to_string(v_.cols()) + " columns");
        }
        require_finite(u_, "LowRankFactors: U");
        require_finite(s_, "LowRankFactors: S");
        require_finite(v_, "LowRankFactors: V");
    }

    const Matrix& u() const noexcept { return u_; }
    const Matrix& s() const noexcept { return s_; }
    const Matrix& v() const noexcept { return v_; }
    bool orthonormal() const noexcept { return orthonormal_; }

    Eigen::Index rows() const noexcept { return u_.rows(); }
    Eigen::Index cols() const noexcept { return v_.rows(); }
    Eigen::Index rank() const noexcept { return std::max(s_.rows(), s_.cols()); }

    Matrix materialize() const { return u_ * s_ * v_.transpose(); }

    /// Largest deviation of U^T U and V^T V from the identity (Frobenius).
    double orthonormality_defect() const {
        const double du = (u_.transpose() * u_ - Matrix::Identity(u_.cols(), u_.cols())).norm();
        const double dv = (v_.transpose() * v_ - Matrix::Identity(v_.cols(), v_.cols())).norm();
        return std::max(du, dv);
    }

private:
    Matrix u_;
    Matrix s_;
    Matrix v_;
    bool orthonormal_ = false;
};

namespace detail {

// Orthonormal U, V and the core R1 S R2^T they carry. No truncation.
struct OrthoForm {
    Matrix q1;
    Matrix core;
    Matrix q2;
};

inline OrthoForm ortho_form(const LowRankFactors& f) {
    if (f.orthonormal()) {
        return {f.u(), f.s(), f.v()};
    }
    QrResult a = mgs_qr(f.u());
    QrResult b = mgs_qr(f.v());
    Matrix core = a.r * f.s() * b.r.transpose();
    return {std::move(a.q), std::move(core), std::move(b.q)};
}

inline Matrix unit_column(Eigen::Index n) {
    Matrix e = Matrix::Zero(n, 1);
    if (n > 0) {
        e(0, 0) = 1.0;
    }
    return e;
}

} // namespace detail

/// Truncation to the singular values strictly above `eps`.
/// The result is orthonormal with a diagonal core and never has rank 0:
/// when nothing survives, the leading mode is kept.
inline LowRankFactors truncate(const LowRankFactors& f, double eps) {
    if (!(eps >= 0.0)) {
        throw InvalidArgument("truncate: eps must be >= 0");
    }
    detail::OrthoForm o = detail::ortho_form(f);
    SvdResult svd = reduced_svd(o.core);
    if (svd.sigma.empty()) {
        // Zero input: one zero mode on arbitrary unit directions.
        return {detail::unit_column(f.rows()), Matrix::Zero(1, 1), detail::unit_column(f.cols()),
                true};
    }
    std::size_t keep = 0;
    while (keep < svd.sigma.size() && svd.sigma[keep] > eps) {
        ++keep;
    }
    keep = std::max<std::size_t>(keep, 1);
    const auto k = static_cast<Eigen::Index>(keep);
    Matrix s = Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        s(i, i) = svd.sigma[static_cast<std::size_t>(i)];
    }
    return {o.q1 * svd.left.leftCols(k), std::move(s), o.q2 * svd.right.leftCols(k), true};
}

/// Re-expresses `f` with orthonormal factors and a diagonal core, dropping
/// nothing but exactly-zero directions.
inline LowRankFactors orthonormalize(const LowRankFactors& f) {
    detail::OrthoForm o = detail::ortho_form(f);
    SvdResult svd = reduced_svd(o.core);
    if (svd.sigma.empty()) {
        return {detail::unit_column(f.rows()), Matrix::Zero(1, 1), detail::unit_column(f.cols()),
                true};
    }
    const auto k = static_cast<Eigen::Index>(svd.sigma.size());
    Matrix s = Matrix::Zero(k, k);
    for (Eigen::Index i = 0; i < k; ++i) {
        s(i, i) = svd.sigma[static_cast<std::size_t>(i)];
    }
    return {o.q1 * svd.left, std::move(s), o.q2 * svd.right, true};
}

inline double lr_frobenius(const LowRankFactors& f) {
    if (f.orthonormal()) {
        return f.s().norm();
    }
    return detail::ortho_form(f).core.norm();
}

/// Largest singular value of U S V^T.
inline double leading_singular_value(const LowRankFactors& f) {
    const SvdResult svd = reduced_svd(detail::ortho_form(f).core);
    return svd.sigma.empty() ? 0.0 : svd.sigma.front();
}

/// Block concatenation [U_F, U_G] diag(S_F, S_G) [V_F, V_G]^T.
inline LowRankFactors lr_add(const LowRankFactors& f, const LowRankFactors& g) {
    if (f.rows() != g.rows() || f.cols() != g.cols()) {
        throw DimensionMismatch("lr_add: grid dimensions differ");
    }
    return {hstack(f.u(), g.u()), block_diag(f.s(), g.s()), hstack(f.v(), g.v()), false};
}

inline LowRankFactors lr_scale(const LowRankFactors& f, double c) {
    return {f.u(), c * f.s(), f.v(), f.orthonormal()};
}

/// Discrete velocity moments: density, the two flux components and the
/// total energy density (half the trace of the second moment).
struct Moments {
    double n = 0.0;
    double gamma1 = 0.0;
    double gamma2 = 0.0;
    double energy = 0.0;
};

inline Moments operator+(const Moments& a, const Moments& b) {
    return {a.n + b.n, a.gamma1 + b.gamma1, a.gamma2 + b.gamma2, a.energy + b.energy};
}

inline Moments operator-(const Moments& a, const Moments& b) {
    return {a.n - b.n, a.gamma1 - b.gamma1, a.gamma2 - b.gamma2, a.energy - b.energy};
}

/// Midpoint-rule moments of U S V^T on the tensor grid grid1 x grid2 with
/// uniform cell size dv in both directions. O(N r + r^2).
inline Moments lr_moments(const LowRankFactors& f, std::span<const double> grid1,
                          std::span<const double> grid2, double dv) {
    if (static_cast<Eigen::Index>(grid1.size()) != f.rows() ||
        static_cast<Eigen::Index>(grid2.size()) != f.cols()) {
        throw DimensionMismatch("lr_moments: grid lengths do not match factor rows");
    }
    const Eigen::Index r1 = f.u().cols();
    const Eigen::Index r2 = f.v().cols();
    Vector u0 = Vector::Zero(r1), u1 = Vector::Zero(r1), u2 = Vector::Zero(r1);
    for (Eigen::Index i = 0; i < f.rows(); ++i) {
        const double x = grid1[static_cast<std::size_t>(i)];
        u0 += f.u().row(i).transpose();
        u1 += x * f.u().row(i).transpose();
        u2 += x * x * f.u().row(i).transpose();
    }
    Vector v0 = Vector::Zero(r2), v1 = Vector::Zero(r2), v2 = Vector::Zero(r2);
    for (Eigen::Index i = 0; i < f.cols(); ++i) {
        const double y = grid2[static_cast<std::size_t>(i)];
        v0 += f.v().row(i).transpose();
        v1 += y * f.v().row(i).transpose();
        v2 += y * y * f.v().row(i).transpose();
    }
    const Matrix& s = f.s();
    const double w = dv * dv;
    Moments m;
    m.n = w * u0.dot(s * v0);
    m.gamma1 = w * u1.dot(s * v0);
    m.gamma2 = w * u0.dot(s * v1);
    m.energy = 0.5 * w * (u2.dot(s * v0) + u0.dot(s * v2));
    return m;
}

} // namespace ark
