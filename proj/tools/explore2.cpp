// Scratch: backward/forward distance-to-orbit decay from a channel point.
#include <cstdio>
#include "p3bp/manifolds.hpp"
using namespace p3bp;

int main(int argc, char** argv) {
    const SystemParams par(0.0121505856);
    double h_off = argc > 1 ? std::atof(argv[1]) : 3e-3;
    double thu = argc > 2 ? std::atof(argv[2]) : 1.03448216;
    int ku = argc > 3 ? std::atoi(argv[3]) : 2;

    const auto eq = find_equilibrium(par, LagrangeIndex::L1);
    const double hL = eval_hamiltonian(eq.z, par);
    FamilyOptions fo; fo.count = 32;
    const auto fam = continue_family(par, LagrangeIndex::L1, fo);
    const auto orb = fam.orbit_at_energy(par, hL + h_off);

    Section sec; sec.coord = 3; sec.value = 0.0; sec.direction = -1;
    sec.window_min = -0.60; sec.window_max = -0.05;
    ode::Opts opts;
    RegionBox box;
    const auto ray = fiber_initial_condition(par, orb, thu, +1, 1e-6, false, opts);
    const auto ev = propagate_to_section(par, ray.z0, 0.0, true, sec, ku, 35.0, box, opts);
    if (!ev) { std::puts("no crossing"); return 1; }
    std::printf("z0 at tof=%.6f\n", ev->t);

    auto dist_to_orbit = [&](const Vec4& z) {
        double best = 1e9;
        for (const auto& s : orb.trajectory().states()) best = std::min(best, norm(s - z));
        return best;
    };
    ode::UnperturbedRhs rhs{par};
    for (int n = 0; n <= 7; ++n) {
        Vec4 zb = ev->x, zf = ev->x;
        ode::advance<4>(rhs, zb, 0.0, -n * orb.period, opts);
        ode::advance<4>(rhs, zf, 0.0, +n * orb.period, opts);
        std::printf("n=%d back dist=%.3e fwd dist=%.3e\n", n, dist_to_orbit(zb), dist_to_orbit(zf));
    }
    return 0;
}
