// Ion-electron relaxation: 50 backward Euler steps of size 0.1 on 256^2
// velocity grids, printing species temperatures and conservation drift.

#include <algorithm>
#include <cstdio>

#include "ark/ark.hpp"

int main() {
    using namespace ark;
    using namespace ark::lbfp;
    const auto params = two_species_relaxation(256);
    LbfpSystem sys = make_system(params);
    const auto m0 = sys.kinetic_moments();
    const Equilibrium eq = equilibrium_state(m0, params);
    std::printf("equilibrium temperature %.6f\n", eq.temperature);

    LbfpStepOptions o;
    o.dt = 0.1;
    for (int n = 1; n <= 50; ++n) {
        const LbfpStepReport rep = lbfp_step(sys, o);
        if (n % 10 == 0) {
            const auto m = sys.kinetic_moments();
            const ConservationErrors e = conservation_errors(m0, m, params);
            std::printf("t=%5.2f  T_i=%.6f  T_e=%.6f  ranks %ld/%ld  iters %d/%d  drift m=%.1e p=%.1e E=%.1e\n",
                        sys.t, temperature(m[0], params[0].mass), temperature(m[1], params[1].mass),
                        static_cast<long>(rep.species[0].rank), static_cast<long>(rep.species[1].rank),
                        rep.species[0].iterations, rep.species[1].iterations,
                        std::max(e.mass[0], e.mass[1]), e.momentum, e.energy);
        }
    }
}
