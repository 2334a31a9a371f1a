#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ark/linalg/matrix.hpp"

namespace ark {

// Wrap-around entries of a periodic tridiagonal matrix:
// `top_right` sits at (0, n-1) and `bottom_left` at (n-1, 0).
struct PeriodicCorners {
    double top_right = 0.0;
    double bottom_left = 0.0;
};

/// Tridiagonal matrix with optional periodic corners.
///
/// Band storage uses length-n sequences: `lower[i]` is A(i, i-1) (lower[0]
/// is unused and kept at zero), `upper[i]` is A(i, i+1) (upper[n-1] unused).
/// Solves go through a Thomas factorization that is built on first use and
/// dropped whenever a coefficient is modified. Call `factorize_now()` before
/// sharing an operator across threads.
class TridiagonalOperator {
public:
    static constexpr double kPivotGuard = 1e-300;

    TridiagonalOperator() = default;

    TridiagonalOperator(std::vector<double> lower, std::vector<double> diag,
                        std::vector<double> upper,
                        std::optional<PeriodicCorners> corners = std::nullopt)
        : lower_(std::move(lower)), diag_(std::move(diag)), upper_(std::move(upper)),
          corners_(corners) {
        const std::size_t n = diag_.size();
        if (n == 0 || lower_.size() != n || upper_.size() != n) {
            throw DimensionMismatch("TridiagonalOperator: band lengths must all equal n >= 1");
        }
        if (corners_ && n < 3) {
            throw DimensionMismatch("TridiagonalOperator: periodic corners need n >= 3");
        }
        lower_[0] = 0.0;
        upper_[n - 1] = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::isfinite(lower_[i]) || !std::isfinite(diag_[i]) ||
                !std::isfinite(upper_[i])) {
                throw NonFiniteValue("TridiagonalOperator: non-finite coefficient");
            }
        }
    }

    static TridiagonalOperator identity(std::size_t n) {
        return {std::vector<double>(n, 0.0), std::vector<double>(n, 1.0),
                std::vector<double>(n, 0.0)};
    }

    static TridiagonalOperator zero(std::size_t n) {
        return {std::vector<double>(n, 0.0), std::vector<double>(n, 0.0),
                std::vector<double>(n, 0.0)};
    }

    std::size_t size() const noexcept { return diag_.size(); }
    std::span<const double> lower() const noexcept { return lower_; }
    std::span<const double> diag() const noexcept { return diag_; }
    std::span<const double> upper() const noexcept { return upper_; }
    const std::optional<PeriodicCorners>& corners() const noexcept { return corners_; }

    void set_lower(std::size_t i, double v) { check_index(i); if (i > 0) lower_[i] = v; invalidate(); }
    void set_diag(std::size_t i, double v) { check_index(i); diag_[i] = v; invalidate(); }
    void set_upper(std::size_t i, double v) { check_index(i); if (i + 1 < size()) upper_[i] = v; invalidate(); }
    void set_corners(std::optional<PeriodicCorners> c) {
        if (c && size() < 3) {
            throw DimensionMismatch("TridiagonalOperator: periodic corners need n >= 3");
        }
        corners_ = c;
        invalidate();
    }

    /// Returns shift * I + scale * A.
    TridiagonalOperator affine(double shift, double scale) const {
        const std::size_t n = size();
        std::vector<double> lo(n), di(n), up(n);
        for (std::size_t i = 0; i < n; ++i) {
            lo[i] = scale * lower_[i];
            di[i] = shift + scale * diag_[i];
            up[i] = scale * upper_[i];
        }
        std::optional<PeriodicCorners> c;
        if (corners_) {
            c = PeriodicCorners{scale * corners_->top_right, scale * corners_->bottom_left};
        }
        return {std::move(lo), std::move(di), std::move(up), c};
    }

    Matrix dense() const {
        const auto n = static_cast<Eigen::Index>(size());
        Matrix a = Matrix::Zero(n, n);
        for (Eigen::Index i = 0; i < n; ++i) {
            a(i, i) = diag_[i];
            if (i > 0) a(i, i - 1) = lower_[i];
            if (i + 1 < n) a(i, i + 1) = upper_[i];
        }
        if (corners_) {
            a(0, n - 1) += corners_->top_right;
            a(n - 1, 0) += corners_->bottom_left;
        }
        return a;
    }

    double max_abs_entry() const {
        double m = 0.0;
        for (std::size_t i = 0; i < size(); ++i) {
            m = std::max({m, std::abs(lower_[i]), std::abs(diag_[i]), std::abs(upper_[i])});
        }
        if (corners_) {
            m = std::max({m, std::abs(corners_->top_right), std::abs(corners_->bottom_left)});
        }
        return m;
    }

    /// A * X, column by column. Cost O(n k).
    Matrix apply(const Matrix& x) const {
        const auto n = static_cast<Eigen::Index>(size());
        if (x.rows() != n) {
            throw DimensionMismatch("TridiagonalOperator::apply: rhs has " +
                                    std::to_string(x.rows()) + " rows, expected " +
                                    std::to_string(n));
        }
        Matrix y(n, x.cols());
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            const double* xc = x.col(j).data();
            double* yc = y.col(j).data();
            if (n == 1) {
                yc[0] = diag_[0] * xc[0];
                continue;
            }
            yc[0] = diag_[0] * xc[0] + upper_[0] * xc[1];
            for (Eigen::Index i = 1; i + 1 < n; ++i) {
                yc[i] = lower_[i] * xc[i - 1] + diag_[i] * xc[i] + upper_[i] * xc[i + 1];
            }
            yc[n - 1] = lower_[n - 1] * xc[n - 2] + diag_[n - 1] * xc[n - 1];
            if (corners_) {
                yc[0] += corners_->top_right * xc[n - 1];
                yc[n - 1] += corners_->bottom_left * xc[0];
            }
        }
        return y;
    }

    /// Solves A * X = rhs. Periodic corners are handled by a rank-2
    /// Sherman-Morrison-Woodbury correction of the banded solve.
    Matrix solve(const Matrix& rhs) const {
        const auto n = static_cast<Eigen::Index>(size());
        if (rhs.rows() != n) {
            throw DimensionMismatch("TridiagonalOperator::solve: rhs has " +
                                    std::to_string(rhs.rows()) + " rows, expected " +
                                    std::to_string(n));
        }
        const Factorization& f = factorize();
        Matrix x = rhs;
        for (Eigen::Index j = 0; j < x.cols(); ++j) {
            f.banded_solve_in_place(lower_, x.col(j).data());
        }
        if (corners_) {
            // x <- y - Y C^{-1} (c_hi y[n-1], c_lo y[0])^T
            for (Eigen::Index j = 0; j < x.cols(); ++j) {
                Eigen::Vector2d z(corners_->top_right * x(n - 1, j),
                                  corners_->bottom_left * x(0, j));
                const Eigen::Vector2d coef = f.capacitance_lu.solve(z);
                x.col(j).noalias() -= f.border * coef;
            }
        }
        return x;
    }

    /// Builds the cached factorization if it is missing.
    /// Throws SingularOperator when a pivot falls below kPivotGuard.
    void factorize_now() const { (void)factorize(); }

private:
    struct Factorization {
        std::vector<double> pivot;       // w_i
        std::vector<double> upper_ratio; // c'_i = u_i / w_i
        Matrix border;                   // T^{-1} [e_0, e_{n-1}] (periodic only)
        Eigen::PartialPivLU<Eigen::Matrix2d> capacitance_lu;

        void banded_solve_in_place(const std::vector<double>& lower, double* b) const {
            const std::size_t n = pivot.size();
            b[0] /= pivot[0];
            for (std::size_t i = 1; i < n; ++i) {
                b[i] = (b[i] - lower[i] * b[i - 1]) / pivot[i];
            }
            for (std::size_t i = n - 1; i-- > 0;) {
                b[i] -= upper_ratio[i] * b[i + 1];
            }
        }
    };

    const Factorization& factorize() const {
        if (factor_) {
            return *factor_;
        }
        const std::size_t n = size();
        auto f = std::make_shared<Factorization>();
        f->pivot.resize(n);
        f->upper_ratio.resize(n);
        double w = diag_[0];
        for (std::size_t i = 0; i < n; ++i) {
            if (i > 0) {
                w = diag_[i] - lower_[i] * f->upper_ratio[i - 1];
            }
            if (!(std::abs(w) > kPivotGuard)) {
                throw SingularOperator("TridiagonalOperator: pivot " + std::to_string(i) +
                                       " vanished during elimination");
            }
            f->pivot[i] = w;
            f->upper_ratio[i] = upper_[i] / w;
        }
        if (corners_) {
            const auto ni = static_cast<Eigen::Index>(n);
            f->border = Matrix::Zero(ni, 2);
            f->border(0, 0) = 1.0;
            f->border(ni - 1, 1) = 1.0;
            for (int j = 0; j < 2; ++j) {
                f->banded_solve_in_place(lower_, f->border.col(j).data());
            }
            Eigen::Matrix2d cap;
            cap(0, 0) = 1.0 + corners_->top_right * f->border(ni - 1, 0);
            cap(0, 1) = corners_->top_right * f->border(ni - 1, 1);
            cap(1, 0) = corners_->bottom_left * f->border(0, 0);
            cap(1, 1) = 1.0 + corners_->bottom_left * f->border(0, 1);
            if (!(std::abs(cap.determinant()) > kPivotGuard)) {
                throw SingularOperator("TridiagonalOperator: periodic capacitance matrix is singular");
            }
            f->capacitance_lu.compute(cap);
        }
        factor_ = std::move(f);
        return *factor_;
    }

    void check_index(std::size_t i) const {
        if (i >= size()) {
            throw DimensionMismatch("TridiagonalOperator: index out of range");
        }
    }

    void invalidate() { factor_.reset(); }

    std::vector<double> lower_;
    std::vector<double> diag_;
    std::vector<double> upper_;
    std::optional<PeriodicCorners> corners_;
    mutable std::shared_ptr<const Factorization> factor_;
};

} // namespace ark
