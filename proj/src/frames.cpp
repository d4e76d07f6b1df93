#include "p3bp/frames.hpp"

#include <Eigen/Dense>

namespace p3bp {

OrbitFrameTable::OrbitFrameTable(const SystemParams& par, const LyapunovOrbit& orbit, int nodes_per_period,
                                 const ode::Opts& opts)
    : orbit_(&orbit), par_(par), opts_(opts), n_(nodes_per_period) {
    const double T = orbit.period;
    t_.resize(n_ + 1);
    pt_.resize(n_ + 1);
    stm_.resize(n_);
    pt_[0] = orbit.z_pc;
    for (int i = 0; i <= n_; ++i) t_[i] = T * double(i) / n_;
    for (int i = 0; i < n_; ++i) {
        Vec4 z = pt_[i];
        stm_[i] = ode::state_transition(par_, z, t_[i], t_[i + 1], opts_);
        pt_[i + 1] = z;
    }
    ws_.resize(n_ + 1);
    wu_.resize(n_ + 1);
    ws_[0] = orbit.v_s;
    wu_[0] = orbit.v_u;
    for (int i = 0; i < n_; ++i) {
        ws_[i + 1] = ode::mat_vec(stm_[i], ws_[i]);
        wu_[i + 1] = ode::mat_vec(stm_[i], wu_[i]);
    }
}

void OrbitFrameTable::attach_family(const OrbitFamily& family) {
    family_ = &family;
    const double h = orbit_->h;
    eI0_ = family.family_direction_pc(h);
    dT_dI_ = family.dT_dI(h);
}

void OrbitFrameTable::eval_raw(double t, Vec4* point, Vec4* ws, Vec4* wu, Mat4* seg) const {
    const double T = orbit_->period;
    t -= std::floor(t / T) * T;
    int i = static_cast<int>(std::floor(t / T * n_));
    if (i >= n_) i = n_ - 1;
    Vec4 z = pt_[i];
    Mat4 S = ode::mat_identity();
    if (t > t_[i]) S = ode::state_transition(par_, z, t_[i], t, opts_);
    if (point) *point = z;
    if (ws) *ws = ode::mat_vec(S, ws_[i]);
    if (wu) *wu = ode::mat_vec(S, wu_[i]);
    if (seg) *seg = S;
}

OrbitFrameTable::Frame OrbitFrameTable::at_phase(double psi) const {
    const double T = orbit_->period;
    psi -= std::floor(psi / kTwoPi) * kTwoPi;
    const double t = psi / kTwoPi * T;
    Frame f;
    eval_raw(t, &f.point, &f.w_s, &f.w_u, nullptr);
    f.flow = vector_field(f.point, par_);
    if (family_) {
        // dP/dI at fixed theta: DPhi^t e_I(0) + (theta/2pi) dT/dI X0(P)
        Vec4 z = pt_[0];
        const Mat4 S = ode::state_transition(par_, z, 0.0, t, opts_);
        f.e_I = ode::mat_vec(S, eI0_) + (psi / kTwoPi * dT_dI_) * f.flow;
        f.has_family = true;
    }
    return f;
}

Vec4 OrbitFrameTable::transported(double psi0, double t, bool stable) const {
    const double T = orbit_->period;
    psi0 -= std::floor(psi0 / kTwoPi) * kTwoPi;
    const double t0 = psi0 / kTwoPi * T;
    Vec4 w0;
    eval_raw(t0, nullptr, stable ? &w0 : nullptr, stable ? nullptr : &w0, nullptr);
    const double nrm = norm(w0);
    // split the total transport into whole periods plus remainder
    const double tt = t0 + t;
    const double m = std::floor(tt / T);
    const double rem = tt - m * T;
    Vec4 wr;
    eval_raw(rem, nullptr, stable ? &wr : nullptr, stable ? nullptr : &wr, nullptr);
    const double mult = std::pow(stable ? orbit_->rho_s : orbit_->rho_u, m);
    return (mult / nrm) * wr;
}

OrbitFrameTable::DualFrame OrbitFrameTable::dual_at_phase(double psi) const {
    if (!family_) throw std::logic_error("dual frame requires attached family data");
    const Frame f = at_phase(psi);
    Eigen::Matrix4d B;
    const Vec4 vs = (1.0 / norm(f.w_s)) * f.w_s;
    const Vec4 vu = (1.0 / norm(f.w_u)) * f.w_u;
    for (int i = 0; i < 4; ++i) {
        B(i, 0) = f.flow[i];
        B(i, 1) = f.e_I[i];
        B(i, 2) = vs[i];
        B(i, 3) = vu[i];
    }
    const Eigen::PartialPivLU<Eigen::Matrix4d> lu(B.transpose());
    DualFrame d;
    Eigen::Vector4d rhs;
    rhs << omega(), 0.0, 0.0, 0.0;
    Eigen::Vector4d x = lu.solve(rhs);
    for (int i = 0; i < 4; ++i) d.p_theta[i] = x(i);
    rhs << 0.0, 1.0, 0.0, 0.0;
    x = lu.solve(rhs);
    for (int i = 0; i < 4; ++i) d.p_I[i] = x(i);
    return d;
}

// ---------------------------------------------------------------------------

namespace {

double wrap_2pi(double a) {
    a -= std::floor(a / kTwoPi) * kTwoPi;
    return a;
}

}  // namespace

PhaseFit fit_asymptotic_phase(const SystemParams& par, const OrbitFrameTable& table, const Vec4& z,
                              bool forward, const ode::Opts& opts) {
    const auto& orbit = table.orbit();
    const double T = orbit.period;
    const double w = orbit.omega();
    const double sgn = forward ? 1.0 : -1.0;

    // crude distance to the orbit, for window gating only
    auto approx_dist = [&](const Vec4& x) {
        double best = 1e30;
        for (const auto& s : orbit.trajectory().states()) best = std::min(best, norm(s - x));
        return best;
    };

    // samples at T/3 spacing while the trajectory shadows the orbit
    ode::UnperturbedRhs rhs{par};
    const double dt = sgn * T / 3.0;
    const int max_steps = 18;
    std::vector<double> ts;
    std::vector<Vec4> zs;
    Vec4 cur = z;
    double t = 0.0;
    for (int j = 0; j <= max_steps; ++j) {
        if (j > 0) {
            ode::advance<4>(rhs, cur, t, t + dt, opts);
            t += dt;
        }
        if (approx_dist(cur) < 0.05) {
            ts.push_back(t);
            zs.push_back(cur);
        } else if (!ts.empty()) {
            break;  // left the shadowing window again
        }
    }
    if (ts.size() < 4) throw std::runtime_error("trajectory does not shadow the orbit long enough");

    // initial phase from the perpendicular foot of the mid sample
    const std::size_t jm = ts.size() / 2;
    double phi0 = phase_of_point_on_orbit(par, orbit, zs[jm], 0.06, opts) - w * ts[jm];
    phi0 = wrap_2pi(phi0);

    struct Model {
        double rss;
        double A, B;  // A: stable coefficient, B: unstable coefficient
    };
    auto solve_AB = [&](double phi) -> Model {
        const std::size_t J = ts.size();
        Eigen::MatrixXd M(4 * J, 2);
        Eigen::VectorXd r(4 * J);
        for (std::size_t j = 0; j < J; ++j) {
            const Vec4 P = orbit.point_at_phase(wrap_2pi(phi + w * ts[j]));
            const Vec4 gs = table.transported(phi, ts[j], true);
            const Vec4 gu = table.transported(phi, ts[j], false);
            for (int i = 0; i < 4; ++i) {
                M(4 * j + i, 0) = gs[i];
                M(4 * j + i, 1) = gu[i];
                r(4 * j + i) = zs[j][i] - P[i];
            }
        }
        const Eigen::Vector2d ab = M.colPivHouseholderQr().solve(r);
        return Model{(r - M * ab).squaredNorm(), ab(0), ab(1)};
    };

    // drop tail samples where the growing term leaves the linear regime
    for (int round = 0; round < 4 && ts.size() > 4; ++round) {
        const Model m = solve_AB(phi0);
        const double grow = forward ? m.B : m.A;
        const double tail =
            std::abs(grow) * std::pow(forward ? orbit.rho_u : orbit.rho_s, sgn * ts.back() / T);
        if (tail > 2e-3) {
            ts.pop_back();
            zs.pop_back();
        } else {
            break;
        }
    }

    // profiled 1-d Newton on the phase
    double phi = phi0;
    const double hd = 1e-7;
    for (int it = 0; it < 40; ++it) {
        const double f0 = solve_AB(phi).rss;
        const double fp = solve_AB(phi + hd).rss;
        const double fm = solve_AB(phi - hd).rss;
        const double g = (fp - fm) / (2.0 * hd);
        const double H = (fp - 2.0 * f0 + fm) / (hd * hd);
        if (!(H > 0.0)) break;
        const double step = std::clamp(g / H, -0.05, 0.05);
        phi -= step;
        if (std::abs(step) < 1e-13) break;
    }

    const Model m = solve_AB(phi);
    PhaseFit out;
    out.theta = wrap_2pi(phi);
    out.coef_conv = forward ? m.A : m.B;
    out.coef_grow = forward ? m.B : m.A;
    out.rms = std::sqrt(m.rss / (4.0 * ts.size()));
    out.samples = static_cast<int>(ts.size());
    out.window_start = ts.front();
    return out;
}

}  // namespace p3bp
