#include "p3bp/dynamics.hpp"

namespace p3bp {

void check_away_from_primaries(const Vec4& z, const SystemParams& par) {
    for (double c : z)
        if (!std::isfinite(c)) throw std::domain_error("non-finite state component");
    if (dist_heavy(z, par) < kCollisionRadius || dist_light(z, par) < kCollisionRadius)
        throw CollisionError("state within collision radius of a primary");
}

double effective_potential(double q1, double q2, const SystemParams& par) {
    const double mu = par.mu;
    const double r1 = std::sqrt((q1 - mu) * (q1 - mu) + q2 * q2);
    const double r2 = std::sqrt((q1 + 1.0 - mu) * (q1 + 1.0 - mu) + q2 * q2);
    if (r1 < kCollisionRadius || r2 < kCollisionRadius)
        throw CollisionError("potential evaluated at a primary");
    return 0.5 * (q1 * q1 + q2 * q2) + (1.0 - mu) / r1 + mu / r2;
}

double eval_hamiltonian(const Vec4& z, const SystemParams& par) {
    check_away_from_primaries(z, par);
    const double vx = vel_x(z), vy = vel_y(z);
    return 0.5 * (vx * vx + vy * vy) - effective_potential(z[2], z[3], par);
}

namespace {

struct PotentialDerivs {
    double Vq1, Vq2;        // first derivatives
    double V11, V12, V22;   // second derivatives
};

PotentialDerivs potential_derivs(double q1, double q2, const SystemParams& par) {
    const double mu = par.mu;
    const double u1 = q1 - mu;
    const double u2 = q1 + 1.0 - mu;
    const double r1sq = u1 * u1 + q2 * q2;
    const double r2sq = u2 * u2 + q2 * q2;
    const double r1 = std::sqrt(r1sq), r2 = std::sqrt(r2sq);
    if (r1 < kCollisionRadius || r2 < kCollisionRadius)
        throw CollisionError("potential derivative at a primary");
    const double ir13 = 1.0 / (r1sq * r1), ir23 = 1.0 / (r2sq * r2);
    const double ir15 = ir13 / r1sq, ir25 = ir23 / r2sq;
    PotentialDerivs d;
    d.Vq1 = q1 - (1.0 - mu) * u1 * ir13 - mu * u2 * ir23;
    d.Vq2 = q2 - (1.0 - mu) * q2 * ir13 - mu * q2 * ir23;
    d.V11 = 1.0 + (1.0 - mu) * (3.0 * u1 * u1 * ir15 - ir13) + mu * (3.0 * u2 * u2 * ir25 - ir23);
    d.V12 = (1.0 - mu) * 3.0 * u1 * q2 * ir15 + mu * 3.0 * u2 * q2 * ir25;
    d.V22 = 1.0 + (1.0 - mu) * (3.0 * q2 * q2 * ir15 - ir13) + mu * (3.0 * q2 * q2 * ir25 - ir23);
    return d;
}

}  // namespace

Vec4 grad_hamiltonian(const Vec4& z, const SystemParams& par) {
    const auto d = potential_derivs(z[2], z[3], par);
    const double vx = vel_x(z), vy = vel_y(z);
    return {vx, vy, -vy - d.Vq1, vx - d.Vq2};
}

Vec4 vector_field(const Vec4& z, const SystemParams& par) {
    const auto d = potential_derivs(z[2], z[3], par);
    const double vx = vel_x(z), vy = vel_y(z);
    // J grad H0 with J(gp1,gp2,gq1,gq2) = (-gq1, -gq2, gp1, gp2)
    return {vy + d.Vq1, -vx + d.Vq2, vx, vy};
}

Mat4 vector_field_jacobian(const Vec4& z, const SystemParams& par) {
    const auto d = potential_derivs(z[2], z[3], par);
    Mat4 A{};
    // p1dot = vy + Vq1,  vy = p2 - q1
    A[0] = {0.0, 1.0, -1.0 + d.V11, d.V12};
    // p2dot = -vx + Vq2, vx = p1 + q2
    A[1] = {-1.0, 0.0, d.V12, -1.0 + d.V22};
    // q1dot = vx
    A[2] = {1.0, 0.0, 0.0, 1.0};
    // q2dot = vy
    A[3] = {0.0, 1.0, -1.0, 0.0};
    return A;
}

// ---------------------------------------------------------------------------

double smooth_step(double x) {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    const double a = std::exp(-1.0 / x);
    const double b = std::exp(-1.0 / (1.0 - x));
    return a / (a + b);
}

PerturbationSpec PerturbationSpec::zero() { return PerturbationSpec{}; }

PerturbationSpec PerturbationSpec::thrust(double d1, double d2, double magnitude, double t_a, double t_b,
                                          double ramp) {
    PerturbationSpec s;
    s.kind = PerturbationKind::ThrustWindowed;
    const double n = std::sqrt(d1 * d1 + d2 * d2);
    if (n == 0.0) throw std::invalid_argument("thrust direction is zero");
    if (!(t_b >= t_a)) throw std::invalid_argument("thrust window has t_b < t_a");
    if (!(ramp > 0.0)) throw std::invalid_argument("thrust window needs a positive ramp width");
    s.dir1 = d1 / n;
    s.dir2 = d2 / n;
    s.magnitude = magnitude;
    s.t_a = t_a;
    s.t_b = t_b;
    s.ramp = ramp;
    return s;
}

PerturbationSpec PerturbationSpec::dissipation(double kappa) {
    PerturbationSpec s;
    s.kind = PerturbationKind::VelocityDissipation;
    s.kappa = kappa;
    return s;
}

PerturbationSpec PerturbationSpec::hamiltonian(std::function<double(const Vec4&, double)> H1,
                                               std::function<Vec4(const Vec4&, double)> gradH1) {
    PerturbationSpec s;
    s.kind = PerturbationKind::HamiltonianGradient;
    s.H1 = std::move(H1);
    s.gradH1 = std::move(gradH1);
    return s;
}

double PerturbationSpec::time_window(double t) const {
    if (kind != PerturbationKind::ThrustWindowed) return 1.0;
    return smooth_step((t - (t_a - ramp)) / ramp) * smooth_step(((t_b + ramp) - t) / ramp);
}

double PerturbationSpec::space_window(const Vec4& z) const {
    if (!spatial_window) return 1.0;
    const double dx = z[2] - center_q1, dy = z[3] - center_q2;
    const double d = std::sqrt(dx * dx + dy * dy);
    return smooth_step(((radius + space_ramp) - d) / space_ramp);
}

double PerturbationSpec::sup_norm_bound() const {
    switch (kind) {
        case PerturbationKind::Zero: return 0.0;
        case PerturbationKind::ThrustWindowed: return std::abs(magnitude);
        case PerturbationKind::VelocityDissipation: return std::abs(kappa) * 10.0;  // |v| <= ~10 on K
        default: return 1.0;
    }
}

Vec4 eval_perturbation(const Vec4& z, double t, const PerturbationSpec& spec) {
    switch (spec.kind) {
        case PerturbationKind::Zero:
            return {0.0, 0.0, 0.0, 0.0};
        case PerturbationKind::ThrustWindowed: {
            const double w = spec.time_window(t) * spec.space_window(z);
            if (w == 0.0) return {0.0, 0.0, 0.0, 0.0};
            const double a = spec.magnitude * w;
            return {a * spec.dir1, a * spec.dir2, 0.0, 0.0};
        }
        case PerturbationKind::VelocityDissipation:
            return {-spec.kappa * vel_x(z), -spec.kappa * vel_y(z), 0.0, 0.0};
        case PerturbationKind::HamiltonianGradient:
            return J_times(spec.gradH1(z, t));
        case PerturbationKind::Callback:
            return spec.field(z, t);
    }
    return {0.0, 0.0, 0.0, 0.0};
}

double perturbation_energy_rate(const Vec4& z, double t, const PerturbationSpec& spec, const SystemParams& par) {
    return dot(grad_hamiltonian(z, par), eval_perturbation(z, t, spec));
}

}  // namespace p3bp
