#include "doctest.h"

#include "p3bp/family.hpp"

using namespace p3bp;

namespace {
constexpr double kEarthMoonMu = 0.0121505856;

const SystemParams& em() {
    static SystemParams par(kEarthMoonMu);
    return par;
}

const LyapunovOrbit& small_l1_orbit() {
    static LyapunovOrbit orb = [] {
        const auto eq = find_equilibrium(em(), LagrangeIndex::L1);
        return correct_orbit_fixed_amplitude(em(), seed_orbit_from_linearization(eq, em(), 1e-3));
    }();
    return orb;
}

const OrbitFamily& l1_family() {
    static OrbitFamily fam = [] {
        FamilyOptions fo;
        fo.count = 32;
        return continue_family(em(), LagrangeIndex::L1, fo);
    }();
    return fam;
}
}  // namespace

TEST_CASE("seed shrinks to the equilibrium and sits on the section") {
    const auto eq = find_equilibrium(em(), LagrangeIndex::L1);
    const auto data = classify_equilibrium(eq.z, em());
    const auto tiny = seed_orbit_from_linearization(eq, em(), 1e-9);
    CHECK(norm(tiny.z - eq.z) < 1e-7);
    CHECK(tiny.period_guess == doctest::Approx(kTwoPi / data.omega).epsilon(1e-12));
    const auto seed = seed_orbit_from_linearization(eq, em(), 1e-3);
    CHECK(seed.z[3] == 0.0);  // q2 = 0
    CHECK(seed.z[0] == 0.0);  // xdot = p1 = 0 on the section
}

TEST_CASE("corrector closes the small L1 orbit") {
    const auto& orb = small_l1_orbit();
    CHECK(orb.newton_iters <= 5);

    ode::Opts opts;
    ode::UnperturbedRhs rhs{em()};
    Vec4 z = orb.z_pc;
    ode::advance<4>(rhs, z, 0.0, orb.period, opts);
    CHECK(norm(z - orb.z_pc) < 1e-10);

    // energy constancy along the orbit
    double worst = 0.0;
    for (std::size_t i = 0; i < orb.trajectory().size(); ++i)
        worst = std::max(worst, std::abs(eval_hamiltonian(orb.trajectory().states()[i], em()) - orb.h));
    CHECK(worst < 1e-11);

    // re-running the corrector on a converged orbit is a fixed point
    OrbitSeed again{orb.z_pc, orb.period};
    const auto orb2 = correct_orbit_fixed_amplitude(em(), again);
    CHECK(norm(orb2.z_pc - orb.z_pc) < 1e-12);
}

TEST_CASE("monodromy structure of a Lyapunov orbit") {
    const auto& orb = small_l1_orbit();
    CHECK(orb.rho_u > 1.0);
    CHECK(orb.rho_s < 1.0);
    CHECK(orb.rho_u * orb.rho_s == doctest::Approx(1.0).epsilon(1e-8));
    CHECK(ode::mat_det(orb.monodromy) == doctest::Approx(1.0).epsilon(1e-8));

    // X0 is a unit-multiplier eigenvector
    const Vec4 f = vector_field(orb.z_pc, em());
    const Vec4 Mf = ode::mat_vec(orb.monodromy, f);
    CHECK(norm(Mf - f) / norm(f) < 1e-7);

    // Floquet residuals
    const Vec4 Mu = ode::mat_vec(orb.monodromy, orb.v_u);
    CHECK(norm(Mu - orb.rho_u * orb.v_u) / norm(orb.v_u) < 1e-8 * orb.rho_u);
    const Vec4 Ms = ode::mat_vec(orb.monodromy, orb.v_s);
    CHECK(norm(Ms - orb.rho_s * orb.v_s) < 1e-8);
}

TEST_CASE("fixed-energy corrector hits the requested energy") {
    const auto& orb = small_l1_orbit();
    const double h_target = orb.h + 2e-4;
    OrbitSeed seed{orb.z_pc, orb.period};
    const auto orb2 = correct_orbit_fixed_energy(em(), seed, h_target);
    CHECK(orb2.h == doctest::Approx(h_target).epsilon(1e-10));
}

TEST_CASE("orbit action: shift invariance and zero limit") {
    const auto& orb = small_l1_orbit();
    CHECK(orb.action > 0.0);

    // action from a shifted starting point along the same loop
    ode::Opts opts;
    ode::UnperturbedRhs rhs{em()};
    Vec4 z = orb.z_pc;
    ode::advance<4>(rhs, z, 0.0, 0.37 * orb.period, opts);
    const double I_shift = orbit_action(em(), z, orb.period);
    CHECK(I_shift == doctest::Approx(orb.action).epsilon(1e-10));

    // degenerate loop: tiny amplitude gives a tiny action
    const auto eq = find_equilibrium(em(), LagrangeIndex::L1);
    const auto tiny = correct_orbit_fixed_amplitude(em(), seed_orbit_from_linearization(eq, em(), 1e-5));
    CHECK(std::abs(tiny.action) < 1e-3 * orb.action);
}

TEST_CASE("phase of a point on the orbit") {
    const auto& orb = small_l1_orbit();
    CHECK(phase_of_point_on_orbit(em(), orb, orb.z_pc) == doctest::Approx(0.0).epsilon(1e-12));

    ode::Opts opts;
    ode::UnperturbedRhs rhs{em()};
    Vec4 zh = orb.z_pc;
    ode::advance<4>(rhs, zh, 0.0, orb.period / 2.0, opts);
    CHECK(phase_of_point_on_orbit(em(), orb, zh) == doctest::Approx(kPi).epsilon(1e-10));

    // additivity: phase(Phi^s z) - phase(z) = 2 pi s / T
    Vec4 za = zh;
    const double s = 0.21 * orb.period;
    ode::advance<4>(rhs, za, 0.0, s, opts);
    const double dphase = phase_of_point_on_orbit(em(), orb, za) - kPi;
    CHECK(dphase == doctest::Approx(kTwoPi * s / orb.period).epsilon(1e-9));
}

TEST_CASE("family continuation over the default energy range") {
    const auto& fam = l1_family();
    REQUIRE(fam.members().size() >= 30);

    const auto eq = find_equilibrium(em(), LagrangeIndex::L1);
    const double hL = eval_hamiltonian(eq.z, em());

    // every member satisfies the orbit invariants
    for (const auto& m : fam.members()) {
        CHECK(m.rho_u > 1.0);
        CHECK(m.rho_u * m.rho_s == doctest::Approx(1.0).epsilon(1e-8));
        CHECK(m.h > hL);
    }

    // action monotone in energy
    for (std::size_t i = 1; i < fam.members().size(); ++i)
        CHECK(fam.members()[i].action > fam.members()[i - 1].action);

    // action-frequency consistency on interior members
    for (double r : fam.frequency_consistency_residuals()) CHECK(r < 1e-4);

    // dI/dh = 1/omega cross-check through the interpolants
    const double h_mid = 0.5 * (fam.h_min() + fam.h_max());
    const double I_mid = fam.action_of_energy(h_mid);
    CHECK(fam.omega_of_action(I_mid) == doctest::Approx(kTwoPi / fam.period_at(h_mid)).epsilon(1e-10));

    // family limit: extrapolating h(amplitude->0) returns H(L) within 1e-6
    // (the two smallest members extrapolate linearly in action)
    const auto& m0 = fam.members()[0];
    const auto& m1 = fam.members()[1];
    const double h_intercept = m0.h - m0.action * (m1.h - m0.h) / (m1.action - m0.action);
    CHECK(h_intercept == doctest::Approx(hL).epsilon(1e-6));
}

TEST_CASE("family interpolants reproduce members and d2h0/dI2 is finite") {
    const auto& fam = l1_family();
    const auto& mid = fam.members()[fam.members().size() / 2];
    CHECK(fam.period_at(mid.h) == doctest::Approx(mid.period).epsilon(1e-10));
    CHECK(fam.action_of_energy(mid.h) == doctest::Approx(mid.action).epsilon(1e-10));
    CHECK(fam.energy_of_action(mid.action) == doctest::Approx(mid.h).epsilon(1e-10));
    CHECK(std::isfinite(fam.d2h0_dI2(mid.action)));

    // orbit_at_energy lands on the family
    const double h = 0.5 * (fam.h_min() + fam.h_max());
    const auto orb = fam.orbit_at_energy(SystemParams(fam.mu()), h);
    CHECK(orb.h == doctest::Approx(h).epsilon(1e-10));
    CHECK(norm(orb.z_pc - fam.z_pc_at(h)) < 1e-5);
}
