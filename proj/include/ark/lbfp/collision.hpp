#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "ark/dirk/butcher.hpp"
#include "ark/lbfp/grid.hpp"
#include "ark/linalg/matrix.hpp"
#include "ark/lowrank/factors.hpp"

namespace ark::lbfp {

// Moment sets (n, gamma1, gamma2, E) reuse ark::Moments.

inline double drift1(const Moments& s) { return s.gamma1 / s.n; }
inline double drift2(const Moments& s) { return s.gamma2 / s.n; }

/// T = m (2E - u.gamma) / (d n).
inline double temperature(const Moments& s, double mass) {
    const double ug = drift1(s) * s.gamma1 + drift2(s) * s.gamma2;
    return mass * (2.0 * s.energy - ug) / (kVelocityDims * s.n);
}

/// Moments of a drifting Maxwellian with density n, drift (u1, u2), temperature T.
inline Moments maxwellian_moments(double n, double u1, double u2, double t, double mass) {
    Moments s;
    s.n = n;
    s.gamma1 = n * u1;
    s.gamma2 = n * u2;
    s.energy = 0.5 * n * (u1 * u1 + u2 * u2) + 0.5 * kVelocityDims * n * t / mass;
    return s;
}

struct PairCoefficients {
    double nu = 0.0;          // collision frequency
    double diffusion = 0.0;   // D = T_ab / m_a
    double u1 = 0.0;          // mixed drift (u_a + u_b) / 2
    double u2 = 0.0;
    double temperature = 0.0; // mixed temperature T_ab
};

/// Ordered-pair coefficients; pair(a, b) describes species a colliding with b.
struct CollisionCoefficients {
    std::size_t species = 0;
    std::vector<PairCoefficients> pairs;

    const PairCoefficients& pair(std::size_t a, std::size_t b) const { return pairs[a * species + b]; }
    PairCoefficients& pair(std::size_t a, std::size_t b) { return pairs[a * species + b]; }
};

inline void check_species(std::span<const Moments> states, std::span<const SpeciesParams> params) {
    if (states.size() != params.size() || states.empty()) {
        throw DimensionMismatch("lbfp: one moment set per species required");
    }
}

inline CollisionCoefficients collision_coefficients(std::span<const Moments> states,
                                                    std::span<const SpeciesParams> params) {
    check_species(states, params);
    const std::size_t ns = states.size();
    std::vector<double> temp(ns), vth(ns);
    for (std::size_t a = 0; a < ns; ++a) {
        if (!(states[a].n > 0.0)) {
            throw NonPositiveDiffusion("species " + params[a].name + ": density is not positive");
        }
        temp[a] = temperature(states[a], params[a].mass);
        if (!(temp[a] > 0.0)) {
            throw NonPositiveDiffusion("species " + params[a].name + ": temperature is not positive");
        }
        vth[a] = std::sqrt(temp[a] / params[a].mass);
    }
    CollisionCoefficients c;
    c.species = ns;
    c.pairs.resize(ns * ns);
    for (std::size_t a = 0; a < ns; ++a) {
        const double ma = params[a].mass;
        const double ea2 = params[a].charge * params[a].charge;
        for (std::size_t b = 0; b < ns; ++b) {
            const double mb = params[b].mass;
            const double eb2 = params[b].charge * params[b].charge;
            const double msum = ma + mb;
            const double du1 = drift1(states[b]) - drift1(states[a]);
            const double du2 = drift2(states[b]) - drift2(states[a]);
            PairCoefficients& p = c.pair(a, b);
            p.nu = std::pow(2.0, 2.5) * ea2 * eb2 * states[b].n * (mb / msum) *
                   std::pow(vth[a] + vth[b], -1.5);
            p.temperature = (ma * temp[b] + mb * temp[a]) / msum +
                            ma * mb / (2.0 * kVelocityDims * msum) * (du1 * du1 + du2 * du2);
            p.diffusion = p.temperature / ma;
            p.u1 = 0.5 * (drift1(states[a]) + drift1(states[b]));
            p.u2 = 0.5 * (drift2(states[a]) + drift2(states[b]));
            if (!(p.diffusion > 0.0) || !std::isfinite(p.diffusion) || !std::isfinite(p.nu)) {
                throw NonPositiveDiffusion("pair (" + params[a].name + ", " + params[b].name +
                                           "): diffusion coefficient " +
                                           std::to_string(p.diffusion));
            }
        }
    }
    return c;
}

/// Time derivatives of (n, gamma, E) for every species under inter-species
/// collisions (self-collisions conserve all three and drop out).
inline std::vector<Moments> moment_rhs(std::span<const Moments> states,
                                       std::span<const SpeciesParams> params) {
    const CollisionCoefficients c = collision_coefficients(states, params);
    const std::size_t ns = states.size();
    std::vector<Moments> d(ns);
    for (std::size_t a = 0; a < ns; ++a) {
        const Moments& s = states[a];
        const double ua1 = drift1(s), ua2 = drift2(s);
        for (std::size_t b = 0; b < ns; ++b) {
            if (b == a) {
                continue;
            }
            const PairCoefficients& p = c.pair(a, b);
            const double ub1 = drift1(states[b]), ub2 = drift2(states[b]);
            d[a].gamma1 += 0.5 * p.nu * s.n * (ub1 - ua1);
            d[a].gamma2 += 0.5 * p.nu * s.n * (ub2 - ua2);
            d[a].energy += p.nu * (2.0 * p.diffusion * s.n - 2.0 * s.energy +
                                   0.5 * (s.gamma1 * (ua1 + ub1) + s.gamma2 * (ua2 + ub2)));
        }
    }
    return d;
}

struct Equilibrium {
    double u1 = 0.0;
    double u2 = 0.0;
    double temperature = 0.0;
};

/// Common drift and temperature implied by momentum and energy conservation.
inline Equilibrium equilibrium_state(std::span<const Moments> states,
                                     std::span<const SpeciesParams> params) {
    check_species(states, params);
    double mn = 0.0, p1 = 0.0, p2 = 0.0, kinetic = 0.0, thermal = 0.0, n = 0.0;
    for (std::size_t a = 0; a < states.size(); ++a) {
        const double m = params[a].mass;
        const Moments& s = states[a];
        const double u1 = drift1(s), u2 = drift2(s);
        mn += m * s.n;
        p1 += m * s.n * u1;
        p2 += m * s.n * u2;
        kinetic += 0.5 * m * s.n * (u1 * u1 + u2 * u2);
        thermal += s.n * temperature(s, m);
        n += s.n;
    }
    Equilibrium e;
    e.u1 = p1 / mn;
    e.u2 = p2 / mn;
    e.temperature = (kinetic + thermal - 0.5 * (e.u1 * e.u1 + e.u2 * e.u2) * mn) / n;
    return e;
}

inline constexpr double kNewtonTolerance = 1e-12;
inline constexpr int kNewtonMaxIterations = 50;
inline constexpr double kJacobianStep = 1e-7;

struct MomentSolveResult {
    std::vector<std::vector<Moments>> stages; // [stage][species]
    std::vector<Moments> final_state;
    int newton_iterations = 0;                // summed over stages
};

namespace detail {

inline Vector pack(std::span<const Moments> s) {
    Vector x(4 * static_cast<Eigen::Index>(s.size()));
    for (std::size_t a = 0; a < s.size(); ++a) {
        const auto i = 4 * static_cast<Eigen::Index>(a);
        x(i) = s[a].n;
        x(i + 1) = s[a].gamma1;
        x(i + 2) = s[a].gamma2;
        x(i + 3) = s[a].energy;
    }
    return x;
}

inline std::vector<Moments> unpack(const Vector& x) {
    std::vector<Moments> s(static_cast<std::size_t>(x.size() / 4));
    for (std::size_t a = 0; a < s.size(); ++a) {
        const auto i = 4 * static_cast<Eigen::Index>(a);
        s[a] = {x(i), x(i + 1), x(i + 2), x(i + 3)};
    }
    return s;
}

inline Vector rhs_vector(const Vector& x, std::span<const SpeciesParams> params) {
    const std::vector<Moments> s = unpack(x);
    return pack(moment_rhs(s, params));
}

} // namespace detail

/// Integrates the moment ODEs over one step with the given DIRK table.
/// Each stage equation x_k = x_n + dt sum_l a_kl f(x_l) is solved by Newton
/// iteration with a forward-difference Jacobian. The step-end state is
/// assembled as x_n + dt sum_l b_l f(x_l), which keeps the conserved sums
/// exact up to rounding.
inline MomentSolveResult moment_dirk_solve(std::span<const Moments> state_n,
                                           std::span<const SpeciesParams> params, double dt,
                                           const ButcherTable& table) {
    check_species(state_n, params);
    const std::size_t s = table.stages();
    const Vector xn = detail::pack(state_n);
    const Eigen::Index dim = xn.size();
    std::vector<Vector> f(s);
    MomentSolveResult out;
    for (std::size_t k = 0; k < s; ++k) {
        const auto kk = static_cast<Eigen::Index>(k);
        Vector base = xn;
        for (std::size_t l = 0; l < k; ++l) {
            base += dt * table.a(kk, static_cast<Eigen::Index>(l)) * f[l];
        }
        const double c = dt * table.a(kk, kk);
        Vector x = k == 0 ? xn : Vector(base);
        std::vector<double> history;
        bool converged = false;
        for (int it = 0; it <= kNewtonMaxIterations; ++it) {
            const Vector fx = detail::rhs_vector(x, params);
            const Vector g = x - base - c * fx;
            double err = 0.0;
            for (Eigen::Index i = 0; i < dim; ++i) {
                err = std::max(err, std::abs(g(i)) / (1.0 + std::abs(x(i))));
            }
            history.push_back(err);
            if (!std::isfinite(err)) {
                break;
            }
            if (err <= kNewtonTolerance) {
                converged = true;
                f[k] = fx;
                break;
            }
            if (it == kNewtonMaxIterations) {
                break;
            }
            Matrix jac(dim, dim);
            for (Eigen::Index j = 0; j < dim; ++j) {
                const double h = kJacobianStep * (1.0 + std::abs(x(j)));
                Vector xp = x;
                xp(j) += h;
                jac.col(j) = (detail::rhs_vector(xp, params) - fx) / h;
            }
            const Matrix gjac = Matrix::Identity(dim, dim) - c * jac;
            x -= gjac.partialPivLu().solve(g);
            ++out.newton_iterations;
        }
        if (!converged) {
            throw NewtonDivergence("moment_dirk_solve: Newton failed in stage " +
                                       std::to_string(k + 1),
                                   std::move(history));
        }
        out.stages.push_back(detail::unpack(x));
    }
    Vector xe = xn;
    for (std::size_t l = 0; l < s; ++l) {
        xe += dt * table.b[l] * f[l];
    }
    out.final_state = detail::unpack(xe);
    return out;
}

} // namespace ark::lbfp
