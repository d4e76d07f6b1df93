#include "p3bp/lyapunov.hpp"

#include <limits>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace p3bp {

namespace {

constexpr double kHalfPeriodResidualTol = 3e-13;
constexpr int kMaxNewton = 25;

double section_q2(const Vec4& z, double) { return z[3]; }

struct HalfShot {
    double t_half;
    Vec4 z_end;
    Vec4 f_end;
    Mat4 stm;
};

// Integrate from the perpendicular-crossing guess to the next q2 = 0 crossing
// and return the state, vector field and STM there.
HalfShot shoot_to_half(const SystemParams& par, const Vec4& z0, double t_limit, const ode::Opts& opts) {
    ode::UnperturbedRhs rhs{par};
    auto ev = ode::find_crossing(rhs, z0, 0.0, t_limit, section_q2, 0, 1, opts);
    if (!ev) throw CorrectionFailure("no return to the section q2 = 0 within the time limit");
    HalfShot hs;
    hs.t_half = ev->t;
    Vec4 z = z0;
    hs.stm = ode::state_transition(par, z, 0.0, ev->t, opts);
    hs.z_end = z;
    hs.f_end = vector_field(z, par);
    return hs;
}

// d p1(t_half) / d z0_j at fixed section q2 = 0.
double section_derivative(const HalfShot& hs, int j) {
    return hs.stm[0][j] - (hs.f_end[0] / hs.f_end[3]) * hs.stm[3][j];
}

LyapunovOrbit finalize_orbit(const SystemParams& par, const Vec4& z_pc, double period, const ode::Opts& opts) {
    LyapunovOrbit orb;
    orb.z_pc = z_pc;
    orb.period = period;
    orb.h = eval_hamiltonian(z_pc, par);
    Vec4 z = z_pc;
    orb.monodromy = ode::state_transition(par, z, 0.0, period, opts);
    if (norm(z - z_pc) > 1e-9)
        throw CorrectionFailure("orbit failed to close after one period");
    orb.action = orbit_action(par, z_pc, period, opts);

    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = orb.monodromy[i][j];
    Eigen::EigenSolver<Eigen::Matrix4d> es(M);
    int iu = -1, is = -1;
    double best_u = 1.0, best_s = 1.0;
    for (int i = 0; i < 4; ++i) {
        const std::complex<double> v = es.eigenvalues()(i);
        if (std::abs(v.imag()) > 1e-6 * std::max(1.0, std::abs(v.real()))) continue;
        if (v.real() > best_u) {
            best_u = v.real();
            iu = i;
        }
        if (std::abs(v.real()) < best_s && v.real() != 0.0) {
            best_s = std::abs(v.real());
            is = i;
        }
    }
    if (iu < 0 || is < 0 || best_u < 1.0 + 1e-6)
        throw CorrectionFailure("monodromy is not hyperbolic within the energy surface");
    orb.rho_u = es.eigenvalues()(iu).real();
    orb.rho_s = es.eigenvalues()(is).real();
    auto unit_real = [&](int i) {
        Vec4 v;
        for (int k = 0; k < 4; ++k) v[k] = es.eigenvectors()(k, i).real();
        const double n = norm(v);
        for (auto& c : v) c /= n;
        return v;
    };
    orb.v_u = unit_real(iu);
    orb.v_s = unit_real(is);

    ode::UnperturbedRhs rhs{par};
    orb.traj_ = ode::Trajectory::record(rhs, z_pc, 0.0, period, opts);
    return orb;
}

}  // namespace

Vec4 LyapunovOrbit::point_at_phase(double theta) const {
    double t = theta / kTwoPi * period;
    t -= std::floor(t / period) * period;
    return traj_.at(t);
}

Vec4 LyapunovOrbit::point_at_time(double t) const {
    t -= std::floor(t / period) * period;
    return traj_.at(t);
}

OrbitSeed seed_orbit_from_linearization(const Equilibrium& eq, const SystemParams& par, double amplitude) {
    const auto data = classify_equilibrium(eq.z, par);
    // Real solutions on the center plane: Re[(vr + i vi) e^{i phi}]. Pick the
    // phase with zero q2-component; the linear orbit crosses q2 = 0
    // perpendicularly there by the reversibility symmetry.
    const std::complex<double> vq2(data.ev_center_re[3], data.ev_center_im[3]);
    const double phi = -std::arg(vq2) + kPi / 2.0;
    Vec4 dir;
    for (int k = 0; k < 4; ++k) {
        const std::complex<double> vk(data.ev_center_re[k], data.ev_center_im[k]);
        dir[k] = std::real(vk * std::exp(std::complex<double>(0.0, phi)));
    }
    // scale so that the q1-offset equals the requested amplitude, oriented away
    // from the nearer primary
    const double d_heavy = std::abs(eq.z[2] - par.mu);
    const double d_light = std::abs(eq.z[2] + 1.0 - par.mu);
    const double away = (d_heavy < d_light) ? (eq.z[2] - par.mu) : (eq.z[2] + 1.0 - par.mu);
    const double want_sign = away > 0 ? 1.0 : -1.0;
    if (std::abs(dir[2]) < 1e-12) throw std::runtime_error("degenerate center eigenvector");
    OrbitSeed seed;
    seed.z = eq.z + (want_sign * std::abs(amplitude) / dir[2]) * dir;
    // exact section membership
    seed.z[3] = 0.0;
    seed.z[0] = 0.0;
    seed.period_guess = kTwoPi / data.omega;
    return seed;
}

LyapunovOrbit correct_orbit_fixed_amplitude(const SystemParams& par, const OrbitSeed& guess,
                                            const ode::Opts& opts) {
    Vec4 z0 = guess.z;
    z0[0] = 0.0;
    z0[3] = 0.0;
    const double t_limit = 3.0 * guess.period_guess;
    double t_half = 0.0;
    for (int it = 0; it < kMaxNewton; ++it) {
        const HalfShot hs = shoot_to_half(par, z0, t_limit, opts);
        t_half = hs.t_half;
        const double g = hs.z_end[0];
        if (std::abs(g) < kHalfPeriodResidualTol) {
            LyapunovOrbit orb = finalize_orbit(par, z0, 2.0 * t_half, opts);
            orb.newton_iters = it;
            return orb;
        }
        const double dg = section_derivative(hs, 1);  // d/dp2
        if (dg == 0.0) throw CorrectionFailure("singular correction derivative");
        z0[1] -= g / dg;
    }
    throw CorrectionFailure("differential correction did not converge (fixed amplitude)");
}

LyapunovOrbit correct_orbit_fixed_energy(const SystemParams& par, const OrbitSeed& guess, double h_target,
                                         const ode::Opts& opts) {
    Vec4 z0 = guess.z;
    z0[0] = 0.0;
    z0[3] = 0.0;
    const double t_limit = 3.0 * guess.period_guess;
    double t_half = 0.0;
    for (int it = 0; it < kMaxNewton; ++it) {
        const HalfShot hs = shoot_to_half(par, z0, t_limit, opts);
        t_half = hs.t_half;
        const double g1 = hs.z_end[0];
        const double g2 = eval_hamiltonian(z0, par) - h_target;
        if (std::abs(g1) < kHalfPeriodResidualTol && std::abs(g2) < 1e-13) {
            LyapunovOrbit orb = finalize_orbit(par, z0, 2.0 * t_half, opts);
            orb.newton_iters = it;
            return orb;
        }
        const Vec4 gradH = grad_hamiltonian(z0, par);
        // unknowns (p2, q1)
        const double a = section_derivative(hs, 1), b = section_derivative(hs, 2);
        const double c = gradH[1], d = gradH[2];
        const double det = a * d - b * c;
        if (det == 0.0) throw CorrectionFailure("singular correction matrix");
        z0[1] -= (d * g1 - b * g2) / det;
        z0[2] -= (-c * g1 + a * g2) / det;
    }
    throw CorrectionFailure("differential correction did not converge (fixed energy)");
}

double orbit_action(const SystemParams& par, const Vec4& z_pc, double period, const ode::Opts& opts) {
    auto rhs = [par](const ode::VecN<5>& x, ode::VecN<5>& dx, double) {
        const Vec4 z{x[0], x[1], x[2], x[3]};
        const Vec4 f = vector_field(z, par);
        for (int i = 0; i < 4; ++i) dx[i] = f[i];
        dx[4] = z[0] * f[2] + z[1] * f[3];  // p1 q1dot + p2 q2dot
    };
    ode::VecN<5> x{z_pc[0], z_pc[1], z_pc[2], z_pc[3], 0.0};
    ode::advance<5>(rhs, x, 0.0, period, opts);
    return x[4] / kTwoPi;
}

double phase_of_point_on_orbit(const SystemParams& par, const LyapunovOrbit& orbit, const Vec4& z,
                               double dist_tol, const ode::Opts& opts) {
    const auto& tr = orbit.trajectory();
    double best_t = 0.0, best_d = std::numeric_limits<double>::max();
    for (std::size_t i = 0; i < tr.size(); ++i) {
        const double d = norm(tr.states()[i] - z);
        if (d < best_d) {
            best_d = d;
            best_t = tr.times()[i];
        }
    }
    // Newton on g(t) = (Phi^t(z_pc) - z) . X0(Phi^t(z_pc))
    double t = best_t;
    for (int it = 0; it < 40; ++it) {
        const Vec4 p = orbit.point_at_time(t);
        const Vec4 f = vector_field(p, par);
        const Vec4 diff = p - z;
        const double g = dot(diff, f);
        const Mat4 A = vector_field_jacobian(p, par);
        const double dg = dot(f, f) + dot(diff, ode::mat_vec(A, f));
        if (dg == 0.0) break;
        const double step = g / dg;
        t -= step;
        t -= std::floor(t / orbit.period) * orbit.period;
        if (std::abs(step) < 1e-14 * orbit.period) break;
    }
    const Vec4 p = orbit.point_at_time(t);
    if (norm(p - z) > dist_tol) throw std::runtime_error("point is not on the orbit to tolerance");
    double theta = kTwoPi * t / orbit.period;
    theta -= std::floor(theta / kTwoPi) * kTwoPi;
    return theta;
}

}  // namespace p3bp
