#ifndef P3BP_LYAPUNOV_HPP
#define P3BP_LYAPUNOV_HPP

#include "p3bp/equilibria.hpp"
#include "p3bp/ode.hpp"

namespace p3bp {

// One member of the Lyapunov family around a collinear point. Phase convention:
// theta = 0 at the perpendicular crossing z_pc (q2 = 0, xdot = 0, q1 on the
// side of the equilibrium away from the nearer primary).
struct LyapunovOrbit {
    double h = 0.0;      // energy H0
    double period = 0.0;
    double action = 0.0;  // loop action I = (1/2pi) closed-int p dq
    Vec4 z_pc{};
    Mat4 monodromy{};
    double rho_u = 0.0, rho_s = 0.0;  // Floquet multipliers, rho_s < 1 < rho_u
    Vec4 v_u{}, v_s{};                // unit Floquet eigenvectors at z_pc
    int newton_iters = 0;             // corrector iterations spent

    double omega() const { return kTwoPi / period; }
    Vec4 point_at_phase(double theta) const;             // theta in radians
    Vec4 point_at_time(double t) const;                  // t modulo period
    const ode::Trajectory& trajectory() const { return traj_; }

    ode::Trajectory traj_;  // one closed revolution from z_pc
};

struct OrbitSeed {
    Vec4 z;
    double period_guess;
};

// Initial condition on the linear center plane at the perpendicular-crossing
// phase; amplitude is the q1-displacement from the equilibrium, signed away
// from the nearer primary.
OrbitSeed seed_orbit_from_linearization(const Equilibrium& eq, const SystemParams& par, double amplitude);

struct CorrectionFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Newton differential correction on the section q2 = 0 (perpendicular
// crossings, half-period symmetry). Either the q1 of the guess is held fixed
// (fixed-amplitude) or the energy is driven to h_target.
LyapunovOrbit correct_orbit_fixed_amplitude(const SystemParams& par, const OrbitSeed& guess,
                                            const ode::Opts& opts = {});
LyapunovOrbit correct_orbit_fixed_energy(const SystemParams& par, const OrbitSeed& guess, double h_target,
                                         const ode::Opts& opts = {});

// Loop action by quadrature along one period.
double orbit_action(const SystemParams& par, const Vec4& z_pc, double period, const ode::Opts& opts = {});

// theta in [0, 2pi) with z within dist_tol of the orbit; Newton-refined
// time-of-flight from z_pc.
double phase_of_point_on_orbit(const SystemParams& par, const LyapunovOrbit& orbit, const Vec4& z,
                               double dist_tol = 1e-6, const ode::Opts& opts = {});

}  // namespace p3bp

#endif
