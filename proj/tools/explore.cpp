// Scratch: locate homoclinic channel points for chosen cut index pairs.
#include <cstdio>
#include "p3bp/manifolds.hpp"
using namespace p3bp;

int main(int argc, char** argv) {
    const SystemParams par(0.0121505856);
    double h_off = argc > 1 ? std::atof(argv[1]) : 3e-3;
    int dir = argc > 2 ? std::atoi(argv[2]) : -1;
    int ku = argc > 3 ? std::atoi(argv[3]) : 2;
    int ks = argc > 4 ? std::atoi(argv[4]) : 2;

    const auto eq = find_equilibrium(par, LagrangeIndex::L1);
    const double hL = eval_hamiltonian(eq.z, par);
    FamilyOptions fo; fo.count = 32;
    const auto fam = continue_family(par, LagrangeIndex::L1, fo);
    const auto orb = fam.orbit_at_energy(par, hL + h_off);

    Section sec; sec.coord = 3; sec.value = 0.0; sec.direction = dir;
    sec.window_min = -0.60; sec.window_max = -0.05;
    ManifoldOptions mo; mo.rays = 192; mo.t_limit = 35.0;
    mo.crossing_index = ku;
    const auto cut_u = globalize_manifold(par, orb, false, +1, sec, mo);
    mo.crossing_index = ks;
    const auto cut_s = globalize_manifold(par, orb, true, +1, sec, mo);
    std::printf("cuts: u %zu pts, s %zu pts\n", cut_u.points.size(), cut_s.points.size());
    ChannelOptions co; co.phase_periods = 5;
    try {
        const auto pts = find_channel(par, orb, orb, cut_u, cut_s, co);
        for (const auto& cp : pts)
            std::printf("z0=(%.8f %.8f %.8f %.8f) dh=%.1e ang=%.4f th-=%.6f th+=%.6f D=%+.6f tofu=%.2f tofs=%.2f thdepu=%.4f thdeps=%.4f\n",
                        cp.z0[0], cp.z0[1], cp.z0[2], cp.z0[3], cp.h - orb.h, cp.crossing_angle,
                        cp.theta_minus, cp.theta_plus, cp.delta_shift(), cp.tof_u, cp.tof_s,
                        cp.theta_dep_u, cp.theta_dep_s);
    } catch (const NoIntersection& e) {
        std::printf("no intersection, min gap %.3e\n", e.min_gap);
    }
    return 0;
}
