#pragma once

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "ark/core/errors.hpp"

namespace ark::lbfp {

inline constexpr int kVelocityDims = 2;

/// Species parameters in normalized units. Charges enter only squared.
struct SpeciesParams {
    std::string name;
    double mass = 1.0;
    double charge = 1.0;
    double n0 = 1.0;
    double u1 = 0.0; // drift of each of the two Maxwellian components
    double u2 = 0.0;
    double t0 = 1.0; // temperature of each component
    std::size_t nv = 256;
    double extent = 10.0; // half-width in initial thermal speeds

    double thermal_speed0() const { return std::sqrt(t0 / mass); }

    void validate() const {
        if (!(mass > 0.0) || !(t0 > 0.0) || !(n0 > 0.0) || !(extent > 0.0)) {
            throw InvalidArgument("species " + name + ": mass, density, temperature and extent must be positive");
        }
        if (nv < 8) {
            throw InvalidArgument("species " + name + ": need at least 8 velocity nodes");
        }
    }
};

/// Cell-centred uniform velocity grid on [-L, L], identical in both directions.
struct VelocityGrid {
    double half_width = 0.0;
    double dv = 0.0;
    std::vector<double> nodes; // v_i = -L + (i + 1/2) dv
    std::vector<double> faces; // interior faces v_{i+1/2}, i = 0 .. n-2

    std::size_t size() const noexcept { return nodes.size(); }

    static VelocityGrid centered(double half_width, std::size_t n) {
        if (!(half_width > 0.0) || n < 2) {
            throw InvalidArgument("VelocityGrid: need a positive half-width and n >= 2");
        }
        VelocityGrid g;
        g.half_width = half_width;
        g.dv = 2.0 * half_width / static_cast<double>(n);
        g.nodes.resize(n);
        g.faces.resize(n - 1);
        for (std::size_t i = 0; i < n; ++i) {
            g.nodes[i] = -half_width + (static_cast<double>(i) + 0.5) * g.dv;
        }
        for (std::size_t i = 0; i + 1 < n; ++i) {
            g.faces[i] = -half_width + static_cast<double>(i + 1) * g.dv;
        }
        return g;
    }

    static VelocityGrid for_species(const SpeciesParams& p) {
        return centered(p.extent * p.thermal_speed0(), p.nv);
    }
};

} // namespace ark::lbfp
