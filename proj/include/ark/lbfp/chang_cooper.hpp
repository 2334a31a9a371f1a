#pragma once

#include <cmath>
#include <cstddef>
#include <utility>
#include <vector>

#include "ark/lbfp/collision.hpp"
#include "ark/lbfp/grid.hpp"
#include "ark/linalg/tridiagonal.hpp"

namespace ark::lbfp {

inline constexpr double kDeltaSeriesCutoff = 1e-2;

/// delta(w) = 1/w - 1/(e^w - 1), the face weight that makes the discrete
/// drift-diffusion flux vanish on a Maxwellian.
inline double chang_cooper_delta(double w) {
    if (std::abs(w) < kDeltaSeriesCutoff) {
        const double w2 = w * w;
        return 0.5 - w / 12.0 + w * w2 / 720.0 - w * w2 * w2 / 30240.0;
    }
    return 1.0 / w - 1.0 / std::expm1(w);
}

/// One collision partner as seen along one velocity direction.
struct DirectionalTerm {
    double nu = 0.0;
    double diffusion = 0.0;
    double drift = 0.0;
};

/// Flux-form operator (phi_{i+1/2} - phi_{i-1/2}) / dv with
///   phi_{i+1/2} = sum nu (D (F_{i+1} - F_i) / dv + (v_{i+1/2} - u) F_{i+1/2}),
///   F_{i+1/2} = delta F_i + (1 - delta) F_{i+1},
/// and zero flux through both end faces.
inline TridiagonalOperator chang_cooper_operator(const VelocityGrid& grid,
                                                 std::span<const DirectionalTerm> terms) {
    const std::size_t n = grid.size();
    const double dv = grid.dv;
    // phi_{i+1/2} = a_i F_i + b_i F_{i+1}
    std::vector<double> a(n - 1, 0.0), b(n - 1, 0.0);
    for (const DirectionalTerm& t : terms) {
        if (!(t.diffusion > 0.0)) {
            throw NonPositiveDiffusion("chang_cooper_operator: diffusion must be positive");
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            const double drift = grid.faces[i] - t.drift;
            const double delta = chang_cooper_delta(dv * drift / t.diffusion);
            a[i] += t.nu * (-t.diffusion / dv + drift * delta);
            b[i] += t.nu * (t.diffusion / dv + drift * (1.0 - delta));
        }
    }
    std::vector<double> lower(n, 0.0), diag(n, 0.0), upper(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        if (i + 1 < n) {
            diag[i] += a[i] / dv;
            upper[i] = b[i] / dv;
        }
        if (i > 0) {
            diag[i] -= b[i - 1] / dv;
            lower[i] = -a[i - 1] / dv;
        }
    }
    return {std::move(lower), std::move(diag), std::move(upper)};
}

/// Collision operators of species `alpha` along v1 and v2 (dF/dt = A1 F + F A2^T),
/// summing over every partner including alpha itself.
inline std::pair<TridiagonalOperator, TridiagonalOperator>
build_lbfp_operators(std::size_t alpha, const CollisionCoefficients& coeffs,
                     const VelocityGrid& grid) {
    if (alpha >= coeffs.species) {
        throw DimensionMismatch("build_lbfp_operators: species index out of range");
    }
    std::vector<DirectionalTerm> t1, t2;
    for (std::size_t b = 0; b < coeffs.species; ++b) {
        const PairCoefficients& p = coeffs.pair(alpha, b);
        t1.push_back({p.nu, p.diffusion, p.u1});
        t2.push_back({p.nu, p.diffusion, p.u2});
    }
    return {chang_cooper_operator(grid, t1), chang_cooper_operator(grid, t2)};
}

} // namespace ark::lbfp
