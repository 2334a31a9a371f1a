// Experiment runner: arkctl run|compare|validate <config> [--out DIR] [--seed S] [--threads T]

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "ark/cli/config.hpp"
#include "ark/cli/csv.hpp"
#include "ark/cli/experiments.hpp"

namespace fs = std::filesystem;
using namespace ark::cli;

namespace {

struct Args {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    int threads = 1;
};

ExperimentConfig load(const Args& a) {
    ExperimentConfig c = parse_config_file(a.config);
    if (const char* env = std::getenv("ARK_OUTPUT_DIR"); env != nullptr && *env != '\0') {
        c.output = env;
    }
    if (!a.out.empty()) {
        c.output = a.out;
    }
    if (a.seed) {
        c.seed = *a.seed;
    }
    return c;
}

void stamp(CsvTable& t, const ExperimentConfig& c) {
    t.add_meta("experiment", to_string(c.kind));
    t.add_meta("integrator", c.integrator);
    t.add_meta("seed", std::to_string(c.seed));
}

std::string write(CsvTable& t, const ExperimentConfig& c, const std::string& name) {
    stamp(t, c);
    fs::create_directories(c.output);
    const std::string path = (fs::path(c.output) / name).string();
    t.write(path);
    return path;
}

int run(const Args& a) {
    const ExperimentConfig c = load(a);
    switch (c.kind) {
    case ExperimentKind::HeatConvergence: {
        HeatConvergenceResult r = run_heat_convergence(c, a.threads);
        std::cout << write(r.convergence, c, "convergence.csv") << '\n';
        std::cout << write(r.rank_history, c, "rank_history.csv") << '\n';
        std::cout << "fitted order " << format_number(r.slope) << '\n';
        break;
    }
    case ExperimentKind::LbfpRelax: {
        LbfpRelaxResult r = run_lbfp_relax(c, a.threads);
        std::cout << write(r.conservation, c, "conservation.csv") << '\n';
        std::cout << write(r.rank_history, c, "rank_history.csv") << '\n';
        std::cout << write(r.moments, c, "moments.csv") << '\n';
        std::cout << "max drift mass " << format_number(r.max_mass_err) << " momentum "
                  << format_number(r.max_momentum_err) << " energy " << format_number(r.max_energy_err)
                  << '\n';
        break;
    }
    case ExperimentKind::ComplexitySweep: {
        ComplexityResult r = run_complexity_sweep(c);
        std::cout << write(r.timing, c, "timing.csv") << '\n';
        std::cout << "fitted slope " << format_number(r.slope) << '\n';
        break;
    }
    }
    return 0;
}

int compare(const Args& a) {
    const ExperimentConfig c = load(a);
    if (c.kind == ExperimentKind::HeatConvergence) {
        CsvTable t({"lambda", "dt", "err_lowrank", "err_dense", "rel_diff"});
        for (const HeatCompareRow& r : compare_heat(c, a.threads)) {
            t.add({r.lambda, r.dt, r.err_lowrank, r.err_dense, r.rel_diff});
        }
        std::cout << write(t, c, "compare.csv") << '\n';
    } else if (c.kind == ExperimentKind::LbfpRelax) {
        CsvTable t({"species", "l1_difference", "relative"});
        for (const LbfpCompareRow& r : compare_lbfp(c)) {
            t.add({r.species, r.l1_difference, r.relative});
        }
        std::cout << write(t, c, "compare.csv") << '\n';
    } else {
        throw ConfigError("experiment", 0, "compare supports heat-convergence and lbfp-relax");
    }
    return 0;
}

int validate(const Args& a) {
    const ExperimentConfig c = load(a);
    std::cout << "ok: " << to_string(c.kind) << ", " << c.integrator << ", output " << c.output << '\n';
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"adaptive-rank DIRK experiments"};
    app.require_subcommand(1);
    Args args;
    auto add = [&](const std::string& name, const std::string& help) {
        CLI::App* sub = app.add_subcommand(name, help);
        sub->add_option("config", args.config, "YAML experiment file")->required()->check(CLI::ExistingFile);
        sub->add_option("--out", args.out, "output directory (overrides config and ARK_OUTPUT_DIR)");
        sub->add_option("--seed", args.seed, "seed recorded in the CSV footer");
        sub->add_option("--threads", args.threads, "worker threads for sweep points")->check(CLI::PositiveNumber);
        return sub;
    };
    CLI::App* run_cmd = add("run", "run the experiment and write CSV files");
    CLI::App* compare_cmd = add("compare", "adaptive-rank vs full-rank on the same steps");
    CLI::App* validate_cmd = add("validate", "parse and check the config only");
    CLI11_PARSE(app, argc, argv);
    try {
        if (run_cmd->parsed()) {
            return run(args);
        }
        if (compare_cmd->parsed()) {
            return compare(args);
        }
        if (validate_cmd->parsed()) {
            return validate(args);
        }
    } catch (const ConfigError& e) {
        std::cerr << e.what() << '\n';
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
