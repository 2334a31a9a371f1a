#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstddef>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "ark/cli/config.hpp"
#include "ark/cli/csv.hpp"
#include "ark/fullrank/dense_dirk.hpp"
#include "ark/heat/heat.hpp"
#include "ark/lbfp/system.hpp"

namespace ark::cli {

// Solver failure with the experiment point that raised it.
class RunError : public Error {
public:
    using Error::Error;
};

/// Evaluates fn(0..count-1) on up to `threads` workers; results come back
/// in index order. The first exception is rethrown after all workers join.
template <class T>
std::vector<T> parallel_map(std::size_t count, int threads, const std::function<T(std::size_t)>& fn) {
    std::vector<std::optional<T>> slots(count);
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(std::max(threads, 1)), count);
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            slots[i] = fn(i);
        }
    } else {
        std::atomic<std::size_t> next{0};
        std::exception_ptr failure;
        std::mutex m;
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) {
            pool.emplace_back([&] {
                for (std::size_t i = next++; i < count; i = next++) {
                    try {
                        slots[i] = fn(i);
                    } catch (...) {
                        std::lock_guard<std::mutex> lock(m);
                        if (!failure) {
                            failure = std::current_exception();
                        }
                    }
                }
            });
        }
        for (auto& t : pool) {
            t.join();
        }
        if (failure) {
            std::rethrow_exception(failure);
        }
    }
    std::vector<T> out;
    out.reserve(count);
    for (auto& s : slots) {
        out.push_back(std::move(*s));
    }
    return out;
}

/// Least-squares slope of log(y) against log(x).
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) {
        throw InvalidArgument("loglog_slope: need at least two paired points");
    }
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        mx += std::log(x[i]);
        my += std::log(y[i]);
    }
    mx /= static_cast<double>(x.size());
    my /= static_cast<double>(x.size());
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

inline double median(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

// ---------------------------------------------------------------- heat

struct HeatPoint {
    double lambda = 0.0;
    double dt = 0.0;
    std::size_t steps = 0;
    double error = 0.0;
    int max_iterations = 0;
    Eigen::Index max_rank = 0;
    std::vector<heat::HeatStepRecord> history;
};

inline heat::HeatProblem heat_problem(const ExperimentConfig& c) {
    return heat::HeatProblem::unit_square(c.grid_size(), c.grid_size(), c.diffusion1, c.diffusion2);
}

inline heat::HeatRunOptions heat_options(const ExperimentConfig& c, double lambda,
                                         const heat::HeatProblem& p) {
    heat::HeatRunOptions o;
    o.table = c.table();
    const auto [steps, dt] = heat::steps_for(c.t_final, lambda, p.dx);
    o.steps = steps;
    o.dt = dt;
    o.tol_constant = c.tolerance.front();
    o.eps_rel = c.truncation();
    o.lomac = c.lomac;
    return o;
}

/// Adaptive-rank run at one lambda, L1 error against `reference` at t_final.
inline HeatPoint heat_lowrank_point(const ExperimentConfig& c, double lambda, const Matrix& reference) {
    const heat::HeatProblem p = heat_problem(c);
    const heat::HeatRunOptions o = heat_options(c, lambda, p);
    const LowRankFactors f0 = heat::heat_initial_condition(p.n1, p.n2);
    HeatPoint pt;
    pt.lambda = lambda;
    pt.dt = o.dt;
    pt.steps = o.steps;
    try {
        heat::HeatRunResult r = heat::integrate(p, f0, o);
        pt.error = heat::l1_error(r.f, reference, p.dx, p.dy);
        for (const auto& h : r.history) {
            pt.max_iterations = std::max(pt.max_iterations, h.iterations);
            pt.max_rank = std::max(pt.max_rank, h.rank);
        }
        pt.history = std::move(r.history);
    } catch (const Error& e) {
        throw RunError("heat lowrank lambda=" + format_number(lambda) + ": " + e.what());
    }
    return pt;
}

/// Full-rank Bartels-Stewart run on the same steps.
inline double heat_dense_error(const ExperimentConfig& c, double lambda, const Matrix& reference) {
    const heat::HeatProblem p = heat_problem(c);
    const heat::HeatRunOptions o = heat_options(c, lambda, p);
    try {
        const DenseDirkIntegrator integ(p.op1, p.op2, o.table, o.dt);
        Matrix f = heat::heat_initial_condition(p.n1, p.n2).materialize();
        for (std::size_t n = 0; n < o.steps; ++n) {
            f = integ.step(f);
        }
        return p.dx * p.dy * (f - reference).cwiseAbs().sum();
    } catch (const Error& e) {
        throw RunError("heat dense lambda=" + format_number(lambda) + ": " + e.what());
    }
}

inline Matrix heat_reference(const ExperimentConfig& c) {
    const heat::HeatProblem p = heat_problem(c);
    const heat::HeatExactPropagator prop(p.op1, p.op2);
    return prop.evolve(heat::heat_initial_condition(p.n1, p.n2).materialize(), c.t_final);
}

struct HeatConvergenceResult {
    std::vector<HeatPoint> points;
    CsvTable convergence{{"lambda", "dt", "error", "observed_order"}};
    CsvTable rank_history{{"lambda", "t", "rank", "krylov_iters"}};
    double slope = 0.0; // least-squares order over all points
};

/// Order between consecutive rows; empty for the first row.
inline std::vector<std::string> observed_orders(const std::vector<double>& dt, const std::vector<double>& err) {
    std::vector<std::string> out{""};
    for (std::size_t i = 1; i < dt.size(); ++i) {
        if (dt[i] == dt[i - 1]) {
            out.emplace_back("");
        } else {
            out.push_back(format_number(std::log(err[i] / err[i - 1]) / std::log(dt[i] / dt[i - 1])));
        }
    }
    return out;
}

inline HeatConvergenceResult run_heat_convergence(const ExperimentConfig& c, int threads) {
    const Matrix reference = heat_reference(c);
    HeatConvergenceResult r;
    r.points = parallel_map<HeatPoint>(c.lambda.size(), threads, [&](std::size_t i) {
        return heat_lowrank_point(c, c.lambda[i], reference);
    });
    std::vector<double> dts, errs;
    for (const HeatPoint& p : r.points) {
        dts.push_back(p.dt);
        errs.push_back(p.error);
        for (const auto& h : p.history) {
            r.rank_history.add({p.lambda, h.t, h.rank, h.iterations});
        }
    }
    const auto orders = observed_orders(dts, errs);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        r.convergence.add({r.points[i].lambda, r.points[i].dt, r.points[i].error, orders[i]});
    }
    if (r.points.size() >= 2) {
        r.slope = loglog_slope(dts, errs);
        r.convergence.add_meta("fitted_order", format_number(r.slope));
    }
    return r;
}

struct HeatCompareRow {
    double lambda = 0.0;
    double dt = 0.0;
    double err_lowrank = 0.0;
    double err_dense = 0.0;
    double rel_diff = 0.0; // |err_lowrank - err_dense| / err_dense, 0 when both vanish
};

inline double relative_gap(double a, double b) {
    if (a == b) {
        return 0.0;
    }
    return std::abs(a - b) / std::abs(b);
}

inline std::vector<HeatCompareRow> compare_heat(const ExperimentConfig& c, int threads) {
    if (c.grid_size() > 512) {
        throw ConfigError("n", 0, "compare needs N <= 512");
    }
    const Matrix reference = heat_reference(c);
    return parallel_map<HeatCompareRow>(c.lambda.size(), threads, [&](std::size_t i) {
        HeatCompareRow row;
        const HeatPoint lr = heat_lowrank_point(c, c.lambda[i], reference);
        row.lambda = lr.lambda;
        row.dt = lr.dt;
        row.err_lowrank = lr.error;
        row.err_dense = heat_dense_error(c, c.lambda[i], reference);
        row.rel_diff = relative_gap(row.err_lowrank, row.err_dense);
        return row;
    });
}

// ---------------------------------------------------------------- lbfp

inline std::vector<lbfp::SpeciesParams> species_at(const ExperimentConfig& c, std::size_t n) {
    std::vector<lbfp::SpeciesParams> s = c.species;
    for (auto& p : s) {
        p.nv = n;
    }
    return s;
}

inline lbfp::LbfpStepOptions lbfp_options(const ExperimentConfig& c, int threads) {
    lbfp::LbfpStepOptions o;
    o.table = c.table();
    o.dt = *c.dt;
    o.tol_constants = c.tolerance;
    o.relative_tolerance = c.relative_tolerance;
    o.eps_rel = c.truncation();
    o.threads = threads;
    return o;
}

inline std::size_t step_count(double t_final, double dt) {
    return static_cast<std::size_t>(std::llround(std::max(1.0, std::ceil(t_final / dt - 1e-9))));
}

struct LbfpRelaxResult {
    lbfp::LbfpSystem final_system;
    CsvTable conservation{{"t", "mass_err", "momentum_err", "energy_err"}};
    CsvTable rank_history{{"t", "species", "rank", "krylov_iters"}};
    CsvTable moments{{"t", "species", "n", "gamma1", "gamma2", "energy", "temperature", "rank"}};
    double max_mass_err = 0.0;
    double max_momentum_err = 0.0;
    double max_energy_err = 0.0;
    int max_iterations = 0;
    Eigen::Index max_rank = 0;
};

inline LbfpRelaxResult run_lbfp_relax(const ExperimentConfig& c, int threads) {
    const auto params = species_at(c, c.grid_size());
    lbfp::LbfpSystem sys = lbfp::make_system(params, c.truncation());
    const lbfp::LbfpStepOptions o = lbfp_options(c, threads);
    const std::size_t steps = step_count(c.t_final, o.dt);
    const std::vector<Moments> ref = sys.kinetic_moments();
    LbfpRelaxResult r;
    auto record = [&](double t, const lbfp::LbfpStepReport* rep) {
        const std::vector<Moments> now = sys.kinetic_moments();
        const lbfp::ConservationErrors e = lbfp::conservation_errors(ref, now, params);
        const double mass = *std::max_element(e.mass.begin(), e.mass.end());
        r.conservation.add({t, mass, e.momentum, e.energy});
        r.max_mass_err = std::max(r.max_mass_err, mass);
        r.max_momentum_err = std::max(r.max_momentum_err, e.momentum);
        r.max_energy_err = std::max(r.max_energy_err, e.energy);
        for (std::size_t a = 0; a < sys.species.size(); ++a) {
            const auto& sp = sys.species[a];
            const int iters = rep ? rep->species[a].iterations : 0;
            r.rank_history.add({t, sp.params.name, sp.f.rank(), iters});
            r.moments.add({t, sp.params.name, now[a].n, now[a].gamma1, now[a].gamma2, now[a].energy,
                           lbfp::temperature(now[a], sp.params.mass), sp.f.rank()});
            r.max_iterations = std::max(r.max_iterations, iters);
            r.max_rank = std::max(r.max_rank, sp.f.rank());
        }
    };
    record(0.0, nullptr);
    for (std::size_t n = 0; n < steps; ++n) {
        try {
            const lbfp::LbfpStepReport rep = lbfp::lbfp_step(sys, o);
            record(static_cast<double>(n + 1) * o.dt, &rep);
        } catch (const Error& e) {
            throw RunError("lbfp step " + std::to_string(n + 1) + ": " + e.what());
        }
    }
    r.final_system = std::move(sys);
    return r;
}

/// Full-rank LBFP state: one dense distribution per species plus the
/// macroscopic moments that drive the operators.
struct DenseLbfpState {
    std::vector<lbfp::SpeciesParams> params;
    std::vector<lbfp::VelocityGrid> grids;
    std::vector<Matrix> f;
    std::vector<Moments> exact;
    double t = 0.0;
};

inline DenseLbfpState make_dense_lbfp(const std::vector<lbfp::SpeciesParams>& params) {
    DenseLbfpState s;
    s.params = params;
    for (const auto& p : params) {
        p.validate();
        s.grids.push_back(lbfp::VelocityGrid::for_species(p));
        const LowRankFactors f0 = lbfp::bimaxwellian_initial_condition(p, s.grids.back());
        s.f.push_back(f0.materialize());
        s.exact.push_back(lr_moments(f0, s.grids.back().nodes, s.grids.back().nodes, s.grids.back().dv));
    }
    return s;
}

/// Same moment solve and operators as lbfp_step, dense Bartels-Stewart stages.
inline void dense_lbfp_step(DenseLbfpState& s, const ButcherTable& table, double dt) {
    const lbfp::MomentSolveResult ms = lbfp::moment_dirk_solve(s.exact, s.params, dt, table);
    const lbfp::CollisionCoefficients coeffs = lbfp::collision_coefficients(ms.stages.back(), s.params);
    for (std::size_t a = 0; a < s.f.size(); ++a) {
        auto [d1, d2] = lbfp::build_lbfp_operators(a, coeffs, s.grids[a]);
        const DenseDirkIntegrator integ(std::move(d1), std::move(d2), table, dt);
        s.f[a] = integ.step(s.f[a]);
    }
    s.exact = ms.final_state;
    s.t += dt;
}

struct TimingRow {
    std::size_t n = 0;
    double seconds = 0.0;
};

/// Median wall time over the configured repetitions of a run to t_final.
/// Setup (grids, initial condition) is outside the timed region.
inline TimingRow time_lbfp(const ExperimentConfig& c, std::size_t n) {
    const auto params = species_at(c, n);
    const lbfp::LbfpStepOptions o = lbfp_options(c, 1);
    const std::size_t steps = step_count(c.t_final, o.dt);
    std::vector<double> times;
    for (int rep = 0; rep < c.repetitions; ++rep) {
        double seconds = 0.0;
        try {
            if (c.pipeline == Pipeline::LowRank) {
                lbfp::LbfpSystem sys = lbfp::make_system(params, c.truncation());
                const auto t0 = std::chrono::steady_clock::now();
                for (std::size_t k = 0; k < steps; ++k) {
                    lbfp::lbfp_step(sys, o);
                }
                seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            } else {
                DenseLbfpState s = make_dense_lbfp(params);
                const auto t0 = std::chrono::steady_clock::now();
                for (std::size_t k = 0; k < steps; ++k) {
                    dense_lbfp_step(s, o.table, o.dt);
                }
                seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
            }
        } catch (const Error& e) {
            throw RunError("complexity N=" + std::to_string(n) + ": " + e.what());
        }
        times.push_back(seconds);
    }
    return {n, median(times)};
}

struct ComplexityResult {
    std::vector<TimingRow> rows;
    double slope = 0.0;
    CsvTable timing{{"N", "wall_seconds"}};
};

/// Points run one after another so timings do not compete for cores.
inline ComplexityResult run_complexity_sweep(const ExperimentConfig& c) {
    ComplexityResult r;
    std::vector<double> ns, ts;
    for (std::size_t n : c.n) {
        r.rows.push_back(time_lbfp(c, n));
        r.timing.add({r.rows.back().n, r.rows.back().seconds});
        ns.push_back(static_cast<double>(n));
        ts.push_back(r.rows.back().seconds);
    }
    r.timing.add_meta("pipeline", to_string(c.pipeline));
    if (ns.size() >= 2) {
        r.slope = loglog_slope(ns, ts);
        r.timing.add_meta("fitted_slope", format_number(r.slope));
    }
    return r;
}

struct LbfpCompareRow {
    std::string species;
    double l1_difference = 0.0; // dv^2 sum |F_lowrank - F_dense|
    double relative = 0.0;      // divided by dv^2 sum |F_dense|
};

inline std::vector<LbfpCompareRow> compare_lbfp(const ExperimentConfig& c) {
    if (c.grid_size() > 512) {
        throw ConfigError("n", 0, "compare needs N <= 512");
    }
    const auto params = species_at(c, c.grid_size());
    const lbfp::LbfpStepOptions o = lbfp_options(c, 1);
    const std::size_t steps = step_count(c.t_final, o.dt);
    lbfp::LbfpSystem sys = lbfp::make_system(params, c.truncation());
    DenseLbfpState dense = make_dense_lbfp(params);
    try {
        for (std::size_t k = 0; k < steps; ++k) {
            lbfp::lbfp_step(sys, o);
            dense_lbfp_step(dense, o.table, o.dt);
        }
    } catch (const Error& e) {
        throw RunError(std::string("lbfp compare: ") + e.what());
    }
    std::vector<LbfpCompareRow> rows;
    for (std::size_t a = 0; a < params.size(); ++a) {
        const double dv2 = dense.grids[a].dv * dense.grids[a].dv;
        LbfpCompareRow row;
        row.species = params[a].name;
        row.l1_difference = dv2 * (sys.species[a].f.materialize() - dense.f[a]).cwiseAbs().sum();
        row.relative = row.l1_difference / (dv2 * dense.f[a].cwiseAbs().sum());
        rows.push_back(row);
    }
    return rows;
}

} // namespace ark::cli
