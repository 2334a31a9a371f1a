#pragma once

#include <cstddef>
#include <vector>

#include "ark/dirk/butcher.hpp"
#include "ark/linalg/sylvester.hpp"
#include "ark/linalg/tridiagonal.hpp"

namespace ark {

/// D1 F + F D2^T.
inline Matrix apply_matrix_rhs(const TridiagonalOperator& d1, const TridiagonalOperator& d2,
                               const Matrix& f) {
    Matrix y = d1.apply(f);
    y += d2.apply(f.transpose()).transpose();
    return y;
}

/// Full-rank DIRK integrator for dF/dt = D1 F + F D2^T. Each stage is one
/// dense Bartels-Stewart solve; Schur forms are computed once per distinct
/// diagonal coefficient and reused across steps.
class DenseDirkIntegrator {
public:
    DenseDirkIntegrator(TridiagonalOperator d1, TridiagonalOperator d2, ButcherTable table,
                        double dt)
        : d1_(std::move(d1)), d2_(std::move(d2)), table_(std::move(table)), dt_(dt) {
        table_.validate();
        if (!(dt > 0.0)) {
            throw InvalidArgument("DenseDirkIntegrator: dt must be positive");
        }
        const Matrix dd1 = d1_.dense();
        const Matrix dd2 = d2_.dense();
        for (std::size_t k = 0; k < table_.stages(); ++k) {
            const double akk = table_.a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
            std::size_t found = solvers_.size();
            for (std::size_t j = 0; j < diag_.size(); ++j) {
                if (diag_[j] == akk) {
                    found = j;
                }
            }
            if (found == solvers_.size()) {
                const auto n1 = dd1.rows();
                const auto n2 = dd2.rows();
                solvers_.emplace_back(0.5 * Matrix::Identity(n1, n1) - dt_ * akk * dd1,
                                      0.5 * Matrix::Identity(n2, n2) - dt_ * akk * dd2);
                diag_.push_back(akk);
            }
            stage_solver_.push_back(found);
        }
    }

    Matrix step(const Matrix& f) const {
        const std::size_t s = table_.stages();
        std::vector<Matrix> y;
        y.reserve(s);
        Matrix fk;
        for (std::size_t k = 0; k < s; ++k) {
            Matrix b = f;
            for (std::size_t l = 0; l < k; ++l) {
                b += dt_ * table_.a(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(l)) * y[l];
            }
            fk = solvers_[stage_solver_[k]].solve(b);
            if (k + 1 < s) {
                y.push_back(apply_matrix_rhs(d1_, d2_, fk));
            }
        }
        return fk;
    }

    double dt() const noexcept { return dt_; }

private:
    TridiagonalOperator d1_;
    TridiagonalOperator d2_;
    ButcherTable table_;
    double dt_;
    std::vector<DenseSylvesterSolver> solvers_;
    std::vector<double> diag_;
    std::vector<std::size_t> stage_solver_;
};

} // namespace ark
