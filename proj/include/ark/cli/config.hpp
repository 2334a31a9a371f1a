#pragma once

#include <cstdint>
#include <fstream>
#include <iterator>
#include <optional>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "ark/core/errors.hpp"
#include "ark/dirk/butcher.hpp"
#include "ark/lbfp/grid.hpp"
#include "ark/lbfp/system.hpp"

namespace ark::cli {

// Bad configuration. line is 1-based, 0 when unknown.
class ConfigError : public Error {
public:
    ConfigError(const std::string& field, int line, const std::string& what)
        : Error(format(field, line, what)), field_(field), line_(line) {}

    const std::string& field() const noexcept { return field_; }
    int line() const noexcept { return line_; }

private:
    static std::string format(const std::string& field, int line, const std::string& what) {
        std::string s = "config";
        if (line > 0) {
            s += ":" + std::to_string(line);
        }
        if (!field.empty()) {
            s += ": " + field;
        }
        return s + ": " + what;
    }

    std::string field_;
    int line_;
};

enum class ExperimentKind { HeatConvergence, LbfpRelax, ComplexitySweep };
enum class Pipeline { LowRank, Dense };

inline std::string to_string(ExperimentKind k) {
    switch (k) {
    case ExperimentKind::HeatConvergence:
        return "heat-convergence";
    case ExperimentKind::LbfpRelax:
        return "lbfp-relax";
    case ExperimentKind::ComplexitySweep:
        return "complexity-sweep";
    }
    return "?";
}

inline std::string to_string(Pipeline p) { return p == Pipeline::Dense ? "dense" : "lowrank"; }

struct ExperimentConfig {
    ExperimentKind kind = ExperimentKind::HeatConvergence;
    std::string integrator = "be";
    std::vector<std::size_t> n{200};
    std::vector<double> lambda;
    std::optional<double> dt;
    double t_final = 0.1;
    std::optional<double> eps_rel; // default depends on the experiment
    std::vector<double> tolerance{1.0};
    bool relative_tolerance = true; // lbfp only
    bool lomac = false;             // heat only; lbfp always projects
    double diffusion1 = 0.5;
    double diffusion2 = 0.5;
    Pipeline pipeline = Pipeline::LowRank;
    int repetitions = 5;
    std::string output = "out";
    std::uint64_t seed = 0;
    std::vector<lbfp::SpeciesParams> species;

    ButcherTable table() const { return table_by_name(integrator); }
    double truncation() const {
        return eps_rel.value_or(kind == ExperimentKind::HeatConvergence ? 1e-10 : 1e-8);
    }
    std::size_t grid_size() const { return n.front(); }
};

namespace detail {

inline int line_of(const YAML::Node& node) { return node.Mark().line >= 0 ? node.Mark().line + 1 : 0; }

template <class T>
T scalar(const YAML::Node& node, const std::string& field) {
    if (!node.IsScalar()) {
        throw ConfigError(field, line_of(node), "expected a scalar");
    }
    try {
        return node.as<T>();
    } catch (const YAML::Exception&) {
        throw ConfigError(field, line_of(node), "cannot read '" + node.Scalar() + "'");
    }
}

template <class T>
std::vector<T> scalar_list(const YAML::Node& node, const std::string& field) {
    std::vector<T> out;
    if (node.IsScalar()) {
        out.push_back(scalar<T>(node, field));
    } else if (node.IsSequence()) {
        for (std::size_t i = 0; i < node.size(); ++i) {
            out.push_back(scalar<T>(node[i], field + "[" + std::to_string(i) + "]"));
        }
    } else {
        throw ConfigError(field, line_of(node), "expected a scalar or a list");
    }
    if (out.empty()) {
        throw ConfigError(field, line_of(node), "list is empty");
    }
    return out;
}

inline void require_positive(double v, const YAML::Node& node, const std::string& field) {
    if (!(v > 0.0)) {
        throw ConfigError(field, line_of(node), "must be positive");
    }
}

inline lbfp::SpeciesParams parse_species(const YAML::Node& node, const std::string& where) {
    if (!node.IsMap()) {
        throw ConfigError(where, line_of(node), "expected a mapping");
    }
    lbfp::SpeciesParams p;
    for (const auto& kv : node) {
        const std::string key = kv.first.as<std::string>();
        const std::string f = where + "." + key;
        const YAML::Node& v = kv.second;
        if (key == "name") {
            p.name = scalar<std::string>(v, f);
        } else if (key == "mass") {
            p.mass = scalar<double>(v, f);
            require_positive(p.mass, v, f);
        } else if (key == "charge") {
            p.charge = scalar<double>(v, f);
        } else if (key == "density") {
            p.n0 = scalar<double>(v, f);
            require_positive(p.n0, v, f);
        } else if (key == "drift") {
            const auto d = scalar_list<double>(v, f);
            if (d.size() != 2) {
                throw ConfigError(f, line_of(v), "expected two components");
            }
            p.u1 = d[0];
            p.u2 = d[1];
        } else if (key == "temperature") {
            p.t0 = scalar<double>(v, f);
            require_positive(p.t0, v, f);
        } else if (key == "extent") {
            p.extent = scalar<double>(v, f);
            require_positive(p.extent, v, f);
        } else {
            throw ConfigError(f, line_of(kv.first), "unknown key");
        }
    }
    return p;
}

} // namespace detail

/// Parses and validates a config document. See README for the grammar.
inline ExperimentConfig parse_config_string(const std::string& text) {
    YAML::Node root;
    try {
        root = YAML::Load(text);
    } catch (const YAML::ParserException& e) {
        throw ConfigError("", e.mark.line + 1, e.msg);
    }
    if (!root.IsMap()) {
        throw ConfigError("", 0, "top level must be a mapping");
    }
    using detail::line_of;
    using detail::require_positive;
    using detail::scalar;
    using detail::scalar_list;

    ExperimentConfig c;
    bool have_kind = false;
    int n_line = 0, lambda_line = 0;
    for (const auto& kv : root) {
        const std::string key = kv.first.as<std::string>();
        const YAML::Node& v = kv.second;
        if (key == "experiment") {
            const auto s = scalar<std::string>(v, key);
            if (s == "heat-convergence") {
                c.kind = ExperimentKind::HeatConvergence;
            } else if (s == "lbfp-relax") {
                c.kind = ExperimentKind::LbfpRelax;
            } else if (s == "complexity-sweep") {
                c.kind = ExperimentKind::ComplexitySweep;
            } else {
                throw ConfigError(key, line_of(v), "unknown experiment '" + s + "'");
            }
            have_kind = true;
        } else if (key == "integrator") {
            c.integrator = scalar<std::string>(v, key);
            if (c.integrator != "be" && c.integrator != "dirk2" && c.integrator != "dirk3") {
                throw ConfigError(key, line_of(v), "expected be, dirk2 or dirk3");
            }
        } else if (key == "n") {
            c.n = scalar_list<std::size_t>(v, key);
            n_line = line_of(v);
            for (std::size_t x : c.n) {
                if (x < 8) {
                    throw ConfigError(key, n_line, "grid sizes must be at least 8");
                }
            }
        } else if (key == "lambda") {
            c.lambda = scalar_list<double>(v, key);
            lambda_line = line_of(v);
            for (double x : c.lambda) {
                require_positive(x, v, key);
            }
        } else if (key == "dt") {
            c.dt = scalar<double>(v, key);
            require_positive(*c.dt, v, key);
        } else if (key == "t_final") {
            c.t_final = scalar<double>(v, key);
            require_positive(c.t_final, v, key);
        } else if (key == "eps_rel") {
            c.eps_rel = scalar<double>(v, key);
            if (!(*c.eps_rel >= 0.0)) {
                throw ConfigError(key, line_of(v), "must be non-negative");
            }
        } else if (key == "tolerance") {
            c.tolerance = scalar_list<double>(v, key);
            for (double x : c.tolerance) {
                require_positive(x, v, key);
            }
        } else if (key == "relative_tolerance") {
            c.relative_tolerance = scalar<bool>(v, key);
        } else if (key == "lomac") {
            c.lomac = scalar<bool>(v, key);
        } else if (key == "diffusion") {
            const auto d = scalar_list<double>(v, key);
            if (d.size() != 2 || d[0] < 0.0 || d[1] < 0.0) {
                throw ConfigError(key, line_of(v), "expected two non-negative coefficients");
            }
            c.diffusion1 = d[0];
            c.diffusion2 = d[1];
        } else if (key == "pipeline") {
            const auto s = scalar<std::string>(v, key);
            if (s == "lowrank") {
                c.pipeline = Pipeline::LowRank;
            } else if (s == "dense") {
                c.pipeline = Pipeline::Dense;
            } else {
                throw ConfigError(key, line_of(v), "expected lowrank or dense");
            }
        } else if (key == "repetitions") {
            c.repetitions = scalar<int>(v, key);
            if (c.repetitions < 1) {
                throw ConfigError(key, line_of(v), "must be at least 1");
            }
        } else if (key == "output") {
            c.output = scalar<std::string>(v, key);
        } else if (key == "seed") {
            c.seed = scalar<std::uint64_t>(v, key);
        } else if (key == "species") {
            if (!v.IsSequence() || v.size() == 0) {
                throw ConfigError(key, line_of(v), "expected a non-empty list");
            }
            for (std::size_t i = 0; i < v.size(); ++i) {
                c.species.push_back(detail::parse_species(v[i], "species[" + std::to_string(i) + "]"));
            }
        } else {
            throw ConfigError(key, line_of(kv.first), "unknown key");
        }
    }
    if (!have_kind) {
        throw ConfigError("experiment", 0, "missing");
    }
    switch (c.kind) {
    case ExperimentKind::HeatConvergence:
        if (c.lambda.empty()) {
            throw ConfigError("lambda", 0, "convergence runs need a nonempty lambda list");
        }
        if (c.n.size() != 1) {
            throw ConfigError("n", n_line, "heat-convergence takes a single grid size");
        }
        break;
    case ExperimentKind::LbfpRelax:
        if (c.n.size() != 1) {
            throw ConfigError("n", n_line, "lbfp-relax takes a single grid size");
        }
        [[fallthrough]];
    case ExperimentKind::ComplexitySweep:
        if (!c.dt) {
            throw ConfigError("dt", 0, "missing");
        }
        if (!c.lambda.empty()) {
            throw ConfigError("lambda", lambda_line, "only used by heat-convergence");
        }
        break;
    }
    const std::size_t stages = c.table().stages();
    if (c.tolerance.size() != 1 && c.tolerance.size() != stages) {
        throw ConfigError("tolerance", 0, "need 1 or " + std::to_string(stages) + " constants");
    }
    if (c.kind != ExperimentKind::HeatConvergence && c.species.empty()) {
        c.species = lbfp::two_species_relaxation(c.grid_size());
    }
    return c;
}

inline ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("", 0, "cannot open " + path);
    }
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    return parse_config_string(text);
}

} // namespace ark::cli
