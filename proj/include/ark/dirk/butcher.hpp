#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

#include "ark/linalg/matrix.hpp"

namespace ark {

/// Diagonally implicit Runge-Kutta coefficients.
struct ButcherTable {
    std::string name;
    int order = 1;
    Matrix a;              // s x s, lower triangular
    std::vector<double> b; // s
    std::vector<double> c; // s

    std::size_t stages() const noexcept { return b.size(); }

    /// Throws when the table is not a stiffly accurate
    /// DIRK table (shape, triangularity, a_kk > 0, b = last row, c = row sums).
    void validate(double tol = 1e-14) const {
        const auto s = static_cast<Eigen::Index>(b.size());
        if (s == 0 || a.rows() != s || a.cols() != s || c.size() != b.size()) {
            throw DimensionMismatch("ButcherTable " + name + ": inconsistent stage count");
        }
        for (Eigen::Index i = 0; i < s; ++i) {
            if (!(a(i, i) > 0.0)) {
                throw InvalidArgument("ButcherTable " + name + ": diagonal entry not positive");
            }
            double row = 0.0;
            for (Eigen::Index j = 0; j < s; ++j) {
                if (j > i && a(i, j) != 0.0) {
                    throw InvalidArgument("ButcherTable " + name + ": not lower triangular");
                }
                row += a(i, j);
            }
            if (std::abs(row - c[static_cast<std::size_t>(i)]) > tol) {
                throw InvalidArgument("ButcherTable " + name + ": c is not the row sum of a");
            }
            if (std::abs(b[static_cast<std::size_t>(i)] - a(s - 1, i)) > tol) {
                throw InvalidArgument("ButcherTable " + name + ": not stiffly accurate");
            }
        }
    }
};

namespace detail {

inline ButcherTable make_table(std::string name, int order, const std::vector<std::vector<double>>& rows) {
    const auto s = static_cast<Eigen::Index>(rows.size());
    ButcherTable t;
    t.name = std::move(name);
    t.order = order;
    t.a = Matrix::Zero(s, s);
    for (Eigen::Index i = 0; i < s; ++i) {
        for (Eigen::Index j = 0; j <= i; ++j) {
            t.a(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    t.b.resize(static_cast<std::size_t>(s));
    t.c.resize(static_cast<std::size_t>(s));
    for (Eigen::Index i = 0; i < s; ++i) {
        t.b[static_cast<std::size_t>(i)] = t.a(s - 1, i);
        t.c[static_cast<std::size_t>(i)] = t.a.row(i).sum();
    }
    t.validate();
    return t;
}

} // namespace detail

inline ButcherTable backward_euler() { return detail::make_table("be", 1, {{1.0}}); }

inline ButcherTable dirk2() {
    const double g = 1.0 - std::sqrt(2.0) / 2.0;
    return detail::make_table("dirk2", 2, {{g}, {1.0 - g, g}});
}

// Root of x^3 - 3x^2 + 3x/2 - 1/6 in (0, 1).
inline constexpr double kDirk3Diagonal = 0.43586652150845899942;

inline ButcherTable dirk3() {
    const double x = kDirk3Diagonal;
    return detail::make_table("dirk3", 3,
                              {{x},
                               {(1.0 - x) / 2.0, x},
                               {-1.5 * x * x + 4.0 * x - 0.25, 1.5 * x * x - 5.0 * x + 1.25, x}});
}

inline std::vector<ButcherTable> builtin_tables() { return {backward_euler(), dirk2(), dirk3()}; }

/// Looks up "be", "dirk2" or "dirk3".
inline ButcherTable table_by_name(std::string_view name) {
    for (ButcherTable& t : builtin_tables()) {
        if (t.name == name) {
            return t;
        }
    }
    throw InvalidArgument("unknown integrator '" + std::string(name) + "'");
}

} // namespace ark
