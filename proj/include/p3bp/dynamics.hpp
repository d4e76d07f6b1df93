#ifndef P3BP_DYNAMICS_HPP
#define P3BP_DYNAMICS_HPP

#include <array>
#include <cmath>
#include <functional>
#include <stdexcept>
#include <string>

namespace p3bp {

inline constexpr double kPi = 3.14159265358979323846264338327950288;
inline constexpr double kTwoPi = 2.0 * kPi;

// Phase-space point in the rotating frame, canonical order (p1, p2, q1, q2).
using Vec4 = std::array<double, 4>;
using Mat4 = std::array<std::array<double, 4>, 4>;

inline Vec4 operator+(const Vec4& a, const Vec4& b) {
    return {a[0] + b[0], a[1] + b[1], a[2] + b[2], a[3] + b[3]};
}
inline Vec4 operator-(const Vec4& a, const Vec4& b) {
    return {a[0] - b[0], a[1] - b[1], a[2] - b[2], a[3] - b[3]};
}
inline Vec4 operator*(double s, const Vec4& a) {
    return {s * a[0], s * a[1], s * a[2], s * a[3]};
}
inline double dot(const Vec4& a, const Vec4& b) {
    return a[0] * b[0] + a[1] * b[1] + a[2] * b[2] + a[3] * b[3];
}
inline double norm(const Vec4& a) { return std::sqrt(dot(a, a)); }

// Symplectic pairing with dp^dq and state order (p1,p2,q1,q2):
// omega(u,v) = u_p . v_q - u_q . v_p.
inline double symplectic_form(const Vec4& u, const Vec4& v) {
    return u[0] * v[2] + u[1] * v[3] - u[2] * v[0] - u[3] * v[1];
}
// J*g for g = (g_p1, g_p2, g_q1, g_q2); the Hamiltonian field is J*grad(H).
inline Vec4 J_times(const Vec4& g) { return {-g[2], -g[3], g[0], g[1]}; }
// Row covector omega(v, .) as a plain Vec4 of components.
inline Vec4 omega_row(const Vec4& v) { return {-v[2], -v[3], v[0], v[1]}; }

struct SystemParams {
    double mu;  // mass ratio in (0, 1/2]; heavier primary at (mu,0), lighter at (-1+mu,0)
    explicit SystemParams(double mu_) : mu(mu_) {
        if (!(mu > 0.0 && mu <= 0.5)) throw std::invalid_argument("mu outside (0, 1/2]");
    }
};

struct CollisionError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr double kCollisionRadius = 1e-3;

inline double dist_heavy(const Vec4& z, const SystemParams& par) {
    const double dx = z[2] - par.mu;
    return std::sqrt(dx * dx + z[3] * z[3]);
}
inline double dist_light(const Vec4& z, const SystemParams& par) {
    const double dx = z[2] + 1.0 - par.mu;
    return std::sqrt(dx * dx + z[3] * z[3]);
}

void check_away_from_primaries(const Vec4& z, const SystemParams& par);

// Rotating-frame velocities: xdot = p1 + q2, ydot = p2 - q1.
inline double vel_x(const Vec4& z) { return z[0] + z[3]; }
inline double vel_y(const Vec4& z) { return z[1] - z[2]; }

double eval_hamiltonian(const Vec4& z, const SystemParams& par);
double effective_potential(double q1, double q2, const SystemParams& par);

// grad H0 in the order (dH/dp1, dH/dp2, dH/dq1, dH/dq2).
Vec4 grad_hamiltonian(const Vec4& z, const SystemParams& par);

// X0 = J grad H0.
Vec4 vector_field(const Vec4& z, const SystemParams& par);

// Jacobian A = D(J grad H0), A[i][j] = d X0_i / d z_j.
Mat4 vector_field_jacobian(const Vec4& z, const SystemParams& par);

// ---------------------------------------------------------------------------
// Perturbation X1(z, t); stored WITHOUT the epsilon factor.

enum class PerturbationKind { Zero, ThrustWindowed, VelocityDissipation, HamiltonianGradient, Callback };

// C-infinity ramp: 0 for x<=0, 1 for x>=1.
double smooth_step(double x);

struct PerturbationSpec {
    PerturbationKind kind = PerturbationKind::Zero;
    double epsilon = 0.0;

    // thrust-windowed
    double dir1 = 1.0, dir2 = 0.0;  // unit direction acting on (p1, p2)
    double magnitude = 0.0;
    double t_a = 0.0, t_b = 0.0;
    double ramp = 0.05;
    bool spatial_window = false;  // optional C-infinity ball window in (q1,q2)
    double center_q1 = 0.0, center_q2 = 0.0;
    double radius = 0.0;
    double space_ramp = 0.05;

    // velocity-dissipation
    double kappa = 0.0;

    // hamiltonian-gradient: H1 and its gradient in (p1,p2,q1,q2) order
    std::function<double(const Vec4&, double)> H1;
    std::function<Vec4(const Vec4&, double)> gradH1;

    // user-callback
    std::function<Vec4(const Vec4&, double)> field;

    static PerturbationSpec zero();
    static PerturbationSpec thrust(double dir1, double dir2, double magnitude, double t_a, double t_b,
                                   double ramp = 0.05);
    static PerturbationSpec dissipation(double kappa);
    static PerturbationSpec hamiltonian(std::function<double(const Vec4&, double)> H1,
                                        std::function<Vec4(const Vec4&, double)> gradH1);

    double time_window(double t) const;
    double space_window(const Vec4& z) const;

    // An upper bound for |X1| over the working region (Gronwall C1).
    double sup_norm_bound() const;
};

// X1(z,t), without epsilon.
Vec4 eval_perturbation(const Vec4& z, double t, const PerturbationSpec& spec);

// Directional derivative X1 H0 = grad(H0) . X1.
double perturbation_energy_rate(const Vec4& z, double t, const PerturbationSpec& spec, const SystemParams& par);

}  // namespace p3bp

#endif
