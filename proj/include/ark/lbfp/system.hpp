#pragma once

#include <cmath>
#include <cstddef>
#include <future>
#include <numbers>
#include <string>
#include <utility>
#include <vector>

#include "ark/dirk/butcher.hpp"
#include "ark/dirk/stepper.hpp"
#include "ark/krylov/galerkin.hpp"
#include "ark/lbfp/chang_cooper.hpp"
#include "ark/lbfp/collision.hpp"
#include "ark/lbfp/grid.hpp"
#include "ark/lbfp/lomac.hpp"
#include "ark/lowrank/factors.hpp"

namespace ark::lbfp {

/// n / (2 pi vth^2) * (1/2 M(v - u) + 1/2 M(v + u)) with M(v) = exp(-|v|^2 / (2 vth^2)),
/// as unnormalized rank-2 factors.
inline LowRankFactors bimaxwellian_initial_condition(const SpeciesParams& p,
                                                     const VelocityGrid& grid) {
    const auto n = static_cast<Eigen::Index>(grid.size());
    const double vth2 = p.t0 / p.mass;
    Matrix u(n, 2), v(n, 2);
    for (Eigen::Index i = 0; i < n; ++i) {
        const double x = grid.nodes[static_cast<std::size_t>(i)];
        u(i, 0) = std::exp(-(x - p.u1) * (x - p.u1) / (2.0 * vth2));
        u(i, 1) = std::exp(-(x + p.u1) * (x + p.u1) / (2.0 * vth2));
        v(i, 0) = std::exp(-(x - p.u2) * (x - p.u2) / (2.0 * vth2));
        v(i, 1) = std::exp(-(x + p.u2) * (x + p.u2) / (2.0 * vth2));
    }
    const double amp = 0.5 * p.n0 / (2.0 * std::numbers::pi * vth2);
    Matrix s = Matrix::Zero(2, 2);
    s(0, 0) = amp;
    s(1, 1) = amp;
    return {std::move(u), std::move(s), std::move(v), false};
}

/// Ions (m = 1, drift +-(2, 2), T = 1.1) and electrons (m = 1/1836,
/// drift +-(10, 10), T = 0.9), unit density and charge magnitude.
inline std::vector<SpeciesParams> two_species_relaxation(std::size_t nv) {
    SpeciesParams ion{"ion", 1.0, 1.0, 1.0, 2.0, 2.0, 1.1, nv, 10.0};
    SpeciesParams electron{"electron", 1.0 / 1836.0, -1.0, 1.0, 10.0, 10.0, 0.9, nv, 10.0};
    return {ion, electron};
}

struct Species {
    SpeciesParams params;
    VelocityGrid grid;
    LowRankFactors f;
    Moments exact; // moments carried by the macroscopic ODEs

    Moments kinetic_moments() const { return lr_moments(f, grid.nodes, grid.nodes, grid.dv); }
};

struct LbfpSystem {
    std::vector<Species> species;
    double t = 0.0;

    std::vector<SpeciesParams> params() const {
        std::vector<SpeciesParams> p;
        for (const Species& s : species) {
            p.push_back(s.params);
        }
        return p;
    }

    std::vector<Moments> exact_moments() const {
        std::vector<Moments> m;
        for (const Species& s : species) {
            m.push_back(s.exact);
        }
        return m;
    }

    std::vector<Moments> kinetic_moments() const {
        std::vector<Moments> m;
        for (const Species& s : species) {
            m.push_back(s.kinetic_moments());
        }
        return m;
    }
};

/// Builds grids and truncated initial factors. The macroscopic state starts
/// from the discrete moments of the initial factors.
inline LbfpSystem make_system(const std::vector<SpeciesParams>& params, double eps_rel = 1e-8) {
    LbfpSystem sys;
    for (const SpeciesParams& p : params) {
        p.validate();
        Species s;
        s.params = p;
        s.grid = VelocityGrid::for_species(p);
        const LowRankFactors raw = bimaxwellian_initial_condition(p, s.grid);
        s.f = truncate(raw, eps_rel * leading_singular_value(raw));
        s.exact = s.kinetic_moments();
        sys.species.push_back(std::move(s));
    }
    return sys;
}

struct LbfpStepOptions {
    ButcherTable table = backward_euler();
    double dt = 0.1;
    std::vector<double> tol_constants{1.0}; // C_k, one per stage or one for all
    bool relative_tolerance = true;          // scale C_k dt^(p+1) by ||F^n||_F
    double eps_rel = 1e-8;
    int max_iter = kDefaultMaxKrylovIterations;
    int threads = 1;
};

struct SpeciesStepReport {
    int iterations = 0;
    int restarts = 0;
    Eigen::Index rank = 0;
    Eigen::Index basis_rank = 0;
    std::vector<double> stage_residuals;
    std::vector<double> stage_tolerances;
};

struct LbfpStepReport {
    int newton_iterations = 0;
    std::vector<SpeciesStepReport> species;
};

inline std::vector<double> stage_tolerances(const LbfpStepOptions& o, double scale) {
    const std::size_t s = o.table.stages();
    if (o.tol_constants.size() != 1 && o.tol_constants.size() != s) {
        throw InvalidArgument("lbfp_step: need 1 or " + std::to_string(s) + " tolerance constants");
    }
    std::vector<double> tol(s);
    for (std::size_t k = 0; k < s; ++k) {
        const double c = o.tol_constants.size() == 1 ? o.tol_constants[0] : o.tol_constants[k];
        tol[k] = lte_tolerance(c, o.dt, o.table.order) * scale;
    }
    return tol;
}

/// Advances every species by one step:
/// (1) moment ODEs by DIRK + Newton, (2) Chang-Cooper operators from the
/// final-stage moments, (3) adaptive-rank DIRK step, (4) LoMaC projection
/// onto the step-end moments.
inline LbfpStepReport lbfp_step(LbfpSystem& sys, const LbfpStepOptions& o) {
    const std::vector<SpeciesParams> params = sys.params();
    const std::vector<Moments> state = sys.exact_moments();
    const MomentSolveResult ms = moment_dirk_solve(state, params, o.dt, o.table);
    const CollisionCoefficients coeffs = collision_coefficients(ms.stages.back(), params);

    LbfpStepReport report;
    report.newton_iterations = ms.newton_iterations;
    report.species.resize(sys.species.size());

    auto advance = [&](std::size_t a) {
        Species& sp = sys.species[a];
        auto [d1, d2] = build_lbfp_operators(a, coeffs, sp.grid);
        const StageOperators ops{std::move(d1), std::move(d2)};
        const double scale = o.relative_tolerance ? lr_frobenius(sp.f) : 1.0;
        const std::vector<double> tol = stage_tolerances(o, scale);
        const Moments target = ms.final_state[a];
        const PostProcess post = [&](const LowRankFactors& g) {
            return lomac_project(g, target, sp.grid, sp.params.mass,
                                 o.eps_rel * leading_singular_value(g));
        };
        DirkStepResult r = dirk_step(sp.f, ops, o.table, o.dt, tol, post, o.max_iter);
        sp.f = std::move(r.f);
        sp.exact = target;
        SpeciesStepReport& rep = report.species[a];
        rep.iterations = r.diagnostics.iterations;
        rep.restarts = r.diagnostics.restarts;
        rep.rank = sp.f.rank();
        rep.basis_rank = std::max(r.diagnostics.rank_u, r.diagnostics.rank_v);
        rep.stage_residuals = std::move(r.diagnostics.stage_residuals);
        rep.stage_tolerances = std::move(r.diagnostics.stage_tolerances);
    };

    if (o.threads > 1 && sys.species.size() > 1) {
        std::vector<std::future<void>> jobs;
        for (std::size_t a = 0; a < sys.species.size(); ++a) {
            jobs.push_back(std::async(std::launch::async, advance, a));
        }
        for (auto& j : jobs) {
            j.get();
        }
    } else {
        for (std::size_t a = 0; a < sys.species.size(); ++a) {
            advance(a);
        }
    }
    sys.t += o.dt;
    return report;
}

/// Conservation errors relative to a reference state:
/// per-species relative mass change, |total momentum change| divided by
/// sum m n v_th, and relative total energy change.
struct ConservationErrors {
    std::vector<double> mass;
    double momentum = 0.0;
    double energy = 0.0;
};

inline ConservationErrors conservation_errors(std::span<const Moments> ref,
                                              std::span<const Moments> now,
                                              std::span<const SpeciesParams> params) {
    check_species(ref, params);
    check_species(now, params);
    ConservationErrors e;
    double p1r = 0.0, p2r = 0.0, p1 = 0.0, p2 = 0.0, er = 0.0, en = 0.0, pscale = 0.0;
    for (std::size_t a = 0; a < params.size(); ++a) {
        const double m = params[a].mass;
        e.mass.push_back(std::abs(now[a].n - ref[a].n) / std::abs(ref[a].n));
        p1r += m * ref[a].gamma1;
        p2r += m * ref[a].gamma2;
        p1 += m * now[a].gamma1;
        p2 += m * now[a].gamma2;
        er += m * ref[a].energy;
        en += m * now[a].energy;
        pscale += m * ref[a].n * std::sqrt(temperature(ref[a], m) / m);
    }
    e.momentum = std::hypot(p1 - p1r, p2 - p2r) / pscale;
    e.energy = std::abs(en - er) / std::abs(er);
    return e;
}

} // namespace ark::lbfp
