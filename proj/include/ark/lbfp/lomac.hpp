#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "ark/lbfp/collision.hpp"
#include "ark/lbfp/grid.hpp"
#include "ark/lowrank/factors.hpp"

namespace ark::lbfp {

/// Polynomials p0, p1, p2 in xi = v / v_th, orthonormal under
/// <f, g> = sum_i f(xi_i) g(xi_i) exp(-xi_i^2 / 2) dv.
/// coef(k, j) is the coefficient of xi^j in p_k.
struct WeightedPolynomials {
    double vth = 1.0;
    Eigen::Matrix3d coef = Eigen::Matrix3d::Zero();
    Vector weight; // exp(-xi^2 / 2) at the nodes
    Matrix values; // n x 3, p_k(xi_i)

    static WeightedPolynomials build(const VelocityGrid& grid, double vth) {
        const auto n = static_cast<Eigen::Index>(grid.size());
        WeightedPolynomials wp;
        wp.vth = vth;
        wp.weight.resize(n);
        Matrix mono(n, 3);
        for (Eigen::Index i = 0; i < n; ++i) {
            const double xi = grid.nodes[static_cast<std::size_t>(i)] / vth;
            wp.weight(i) = std::exp(-0.5 * xi * xi);
            mono(i, 0) = 1.0;
            mono(i, 1) = xi;
            mono(i, 2) = xi * xi;
        }
        const Vector qw = wp.weight * grid.dv;
        auto inner = [&](const Vector& f, const Vector& g) { return (f.array() * g.array() * qw.array()).sum(); };
        wp.values.resize(n, 3);
        for (int k = 0; k < 3; ++k) {
            Vector p = mono.col(k);
            Eigen::Vector3d c = Eigen::Vector3d::Zero();
            c(k) = 1.0;
            for (int pass = 0; pass < 2; ++pass) {
                for (int j = 0; j < k; ++j) {
                    const double h = inner(wp.values.col(j), p);
                    p -= h * wp.values.col(j);
                    c -= h * wp.coef.row(j).transpose();
                }
            }
            const double nrm = std::sqrt(inner(p, p));
            wp.values.col(k) = p / nrm;
            wp.coef.row(k) = (c / nrm).transpose();
        }
        return wp;
    }
};

/// Projection onto the Maxwellian-weighted span of {1, v1, v2, v1^2 + v2^2}
/// with prescribed moments, as rank-3 factors [w p0, w p1, w p2] C [w p0, w p1, w p2]^T.
class MomentSubspace {
public:
    MomentSubspace(const VelocityGrid& grid, double vth)
        : poly_(WeightedPolynomials::build(grid, vth)) {
        const Eigen::Matrix3d& k = poly_.coef;
        // Both directions share the grid, so p2 p0 and p0 p2 enter e4 equally.
        a_ = b_ = std::sqrt(0.5);
        // Monomial content of e1..e4 in terms of (1, xi1, xi2, xi1^2 + xi2^2).
        // e1 = p0 p0, e2 = p1 p0, e3 = p0 p1, e4 = a' p2 p0 + b' p0 p2.
        rows_.setZero();
        rows_(0, 0) = k(0, 0) * k(0, 0);
        rows_(1, 0) = k(1, 0) * k(0, 0);
        rows_(1, 1) = k(1, 1) * k(0, 0);
        rows_(2, 0) = k(0, 0) * k(1, 0);
        rows_(2, 2) = k(0, 0) * k(1, 1);
        rows_(3, 0) = (a_ + b_) * k(2, 0) * k(0, 0);
        rows_(3, 1) = a_ * k(2, 1) * k(0, 0);
        rows_(3, 2) = b_ * k(0, 0) * k(2, 1);
        rows_(3, 3) = a_ * k(2, 2) * k(0, 0);
        const Vector w = poly_.weight;
        factor_ = Matrix(w.size(), 3);
        for (int j = 0; j < 3; ++j) {
            factor_.col(j) = w.cwiseProduct(poly_.values.col(j));
        }
    }

    /// Factors whose lr_moments equal `m`.
    LowRankFactors with_moments(const Moments& m) const {
        const double vth = poly_.vth;
        const Eigen::Vector4d mm(m.n, m.gamma1 / vth, m.gamma2 / vth, 2.0 * m.energy / (vth * vth));
        const Eigen::Vector4d c = rows_ * mm;
        Matrix core = Matrix::Zero(3, 3);
        core(0, 0) = c(0);
        core(1, 0) = c(1);
        core(0, 1) = c(2);
        core(2, 0) = c(3) * a_;
        core(0, 2) = c(3) * b_;
        return {factor_, core, factor_, false};
    }

    const WeightedPolynomials& polynomials() const noexcept { return poly_; }

private:
    WeightedPolynomials poly_;
    double a_ = 0.0;
    double b_ = 0.0;
    Eigen::Matrix4d rows_;
    Matrix factor_;
};

/// Replaces the moment-carrying part of F by one with the `exact` moments:
///   F = P(F) + F2,  output = P(exact - moments(T(F2))) + T(F2),
/// where P is the weighted projection, T truncation at eps. The weight uses
/// the thermal speed of the exact state.
inline LowRankFactors lomac_project(const LowRankFactors& f, const Moments& exact,
                                    const VelocityGrid& grid, double mass, double eps) {
    if (f.rows() != static_cast<Eigen::Index>(grid.size()) ||
        f.cols() != static_cast<Eigen::Index>(grid.size())) {
        throw DimensionMismatch("lomac_project: factors do not match the grid");
    }
    const double t = temperature(exact, mass);
    if (!(t > 0.0)) {
        throw NonPositiveDiffusion("lomac_project: exact temperature is not positive");
    }
    const MomentSubspace sub(grid, std::sqrt(t / mass));
    const Moments current = lr_moments(f, grid.nodes, grid.nodes, grid.dv);
    const LowRankFactors f2 = truncate(lr_add(f, lr_scale(sub.with_moments(current), -1.0)), eps);
    const Moments rest = lr_moments(f2, grid.nodes, grid.nodes, grid.dv);
    return orthonormalize(lr_add(sub.with_moments(exact - rest), f2));
}

} // namespace ark::lbfp
