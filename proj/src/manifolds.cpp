#include "p3bp/manifolds.hpp"

#include "p3bp/frames.hpp"
#include <cstdlib>
#include <cstdio>

#include <algorithm>
#include <cmath>

namespace p3bp {

namespace {

double wrap_2pi(double a) {
    a -= std::floor(a / kTwoPi) * kTwoPi;
    return a;
}

double wrap_pi(double a) {
    a = wrap_2pi(a);
    if (a > kPi) a -= kTwoPi;
    return a;
}

struct BoxGuardRhs {
    SystemParams par;
    RegionBox box;
    double margin = 0.3;
    void operator()(const Vec4& z, Vec4& dz, double) const {
        if (z[2] < box.q1_min - margin || z[2] > box.q1_max + margin || z[3] < box.q2_min - margin ||
            z[3] > box.q2_max + margin)
            throw EscapeError("trajectory left the working region");
        dz = vector_field(z, par);
    }
};

}  // namespace

double ChannelPoint::delta_shift() const { return wrap_pi(theta_plus - theta_minus); }

FiberRay fiber_initial_condition(const SystemParams& par, const LyapunovOrbit& orbit, double theta,
                                 int branch, double delta, bool stable, const ode::Opts& opts) {
    FiberRay ray;
    ray.theta = wrap_2pi(theta);
    ray.branch = branch >= 0 ? +1 : -1;
    ray.delta = delta;
    ray.stable = stable;
    const double t = ray.theta / kTwoPi * orbit.period;
    Vec4 z = orbit.z_pc;
    const Mat4 stm = ode::state_transition(par, z, 0.0, t, opts);
    ray.footpoint = z;
    Vec4 v = ode::mat_vec(stm, stable ? orbit.v_s : orbit.v_u);
    const double n = norm(v);
    for (auto& c : v) c /= n;
    ray.z0 = ray.footpoint + (ray.branch * delta) * v;
    return ray;
}

std::optional<ode::EventRecord> propagate_to_section(const SystemParams& par, const Vec4& z0, double t0,
                                                     bool forward, const Section& section, int k,
                                                     double t_limit, const RegionBox& box,
                                                     const ode::Opts& opts) {
    BoxGuardRhs rhs{par, box};
    auto g = [&section](const Vec4& z, double) { return section.offset(z); };
    // velocity component of the section coordinate: q1dot = vx, q2dot = vy
    const int needed_dir = section.direction;
    Vec4 x = z0;
    double t = t0;
    const double t_end = forward ? t0 + t_limit : t0 - t_limit;
    int found = 0;
    for (int guard = 0; guard < 64; ++guard) {
        std::optional<ode::EventRecord> ev;
        try {
            ev = ode::find_crossing(rhs, x, t, t_end, g, 0, 1, opts);
        } catch (const EscapeError&) {
            return std::nullopt;
        } catch (const CollisionError&) {
            return std::nullopt;
        }
        if (!ev) return std::nullopt;
        // state-based crossing direction (sign of the section coordinate's
        // velocity at the crossing), independent of the integration direction
        const double cdot = (section.coord == 2) ? vel_x(ev->x) : vel_y(ev->x);
        const bool dir_ok = needed_dir == 0 || needed_dir * cdot > 0;
        if (dir_ok && section.in_window(ev->x)) {
            if (++found == k) return ev;
        }
        // resume strictly past the crossing so it cannot be detected twice
        x = ev->x;
        t = ev->t;
        const double dt_skip = forward ? 1e-7 : -1e-7;
        try {
            ode::advance<4>(rhs, x, t, t + dt_skip, opts);
        } catch (const EscapeError&) {
            return std::nullopt;
        } catch (const CollisionError&) {
            return std::nullopt;
        }
        t += dt_skip;
    }
    return std::nullopt;
}

SectionCut globalize_manifold(const SystemParams& par, const LyapunovOrbit& orbit, bool stable, int branch,
                              const Section& section, const ManifoldOptions& mo, const ode::Opts& opts) {
    SectionCut cut;
    cut.section = section;
    cut.h = orbit.h;
    cut.stable = stable;
    cut.branch = branch;
    cut.crossing_index = mo.crossing_index;
    cut.delta = mo.delta;

    const bool forward = !stable;  // unstable manifolds are grown forward in time

    auto shoot = [&](double theta) -> std::optional<CutPoint> {
        const FiberRay ray = fiber_initial_condition(par, orbit, theta, branch, mo.delta, stable, opts);
        const auto ev = propagate_to_section(par, ray.z0, 0.0, forward, section, mo.crossing_index,
                                             mo.t_limit, mo.box, opts);
        if (!ev) return std::nullopt;
        return CutPoint{ev->x, wrap_2pi(theta), ev->t};
    };

    struct Entry {
        double theta;
        std::optional<CutPoint> pt;
    };
    std::vector<Entry> entries;
    entries.reserve(mo.rays + 1);
    for (int i = 0; i <= mo.rays; ++i) {
        const double theta = kTwoPi * double(i) / double(mo.rays);
        entries.push_back({theta, shoot(theta)});
    }
    for (int round = 0; round < mo.max_refine_rounds; ++round) {
        std::vector<Entry> added;
        for (std::size_t i = 0; i + 1 < entries.size(); ++i) {
            const auto& a = entries[i].pt;
            const auto& b = entries[i + 1].pt;
            if (!a || !b) continue;
            if (norm(a->z - b->z) > mo.refine_dist && entries[i + 1].theta - entries[i].theta > 1e-6) {
                const double tm = 0.5 * (entries[i].theta + entries[i + 1].theta);
                added.push_back({tm, shoot(tm)});
            }
        }
        if (added.empty()) break;
        for (auto& e : added) entries.push_back(std::move(e));
        std::sort(entries.begin(), entries.end(),
                  [](const Entry& x, const Entry& y) { return x.theta < y.theta; });
    }
    for (const auto& e : entries)
        if (e.pt) cut.points.push_back(*e.pt);
    return cut;
}

double asymptotic_phase(const SystemParams& par, const LyapunovOrbit& orbit, const Vec4& z, bool forward,
                        int periods, const ode::Opts& opts, double* out_dist) {
    (void)periods;  // the fit chooses its own shadowing window
    const OrbitFrameTable table(par, orbit, 128, opts);
    const PhaseFit fit = fit_asymptotic_phase(par, table, z, forward, opts);
    if (out_dist) *out_dist = std::abs(fit.coef_conv);
    return fit.theta;
}

namespace {

struct PlaneEval {
    std::array<double, 2> xy;
    Vec4 z;
    double tof;
};

// Section point of the ray at departure phase theta; nullopt when the ray
// misses the section.
std::optional<PlaneEval> eval_curve(const SystemParams& par, const LyapunovOrbit& orbit,
                                    const SectionCut& cut, double theta, const ChannelOptions& co,
                                    const ode::Opts& opts) {
    const FiberRay ray = fiber_initial_condition(par, orbit, theta, cut.branch, cut.delta, cut.stable, opts);
    const auto ev = propagate_to_section(par, ray.z0, 0.0, !cut.stable, cut.section, cut.crossing_index,
                                         co.t_limit, co.box, opts);
    if (!ev) return std::nullopt;
    return PlaneEval{cut.section.plane(ev->x), ev->x, ev->t};
}

bool segments_intersect(const std::array<double, 2>& a, const std::array<double, 2>& b,
                        const std::array<double, 2>& c, const std::array<double, 2>& d, double& s,
                        double& t) {
    const double rx = b[0] - a[0], ry = b[1] - a[1];
    const double qx = d[0] - c[0], qy = d[1] - c[1];
    const double den = rx * qy - ry * qx;
    if (den == 0.0) return false;
    const double cx = c[0] - a[0], cy = c[1] - a[1];
    s = (cx * qy - cy * qx) / den;
    t = (cx * ry - cy * rx) / den;
    return s >= -1e-9 && s <= 1.0 + 1e-9 && t >= -1e-9 && t <= 1.0 + 1e-9;
}

}  // namespace

std::vector<ChannelPoint> find_channel(const SystemParams& par, const LyapunovOrbit& orbit_u,
                                       const LyapunovOrbit& orbit_s, const SectionCut& cut_u,
                                       const SectionCut& cut_s, const ChannelOptions& co,
                                       const ode::Opts& opts) {
    if (cut_u.section.coord != cut_s.section.coord || cut_u.section.value != cut_s.section.value)
        throw std::invalid_argument("cuts are not on the same section");
    if (std::abs(cut_u.h - cut_s.h) > 1e-9)
        throw std::invalid_argument("cuts are not at the same energy");

    std::vector<ChannelPoint> out;
    double min_gap = 1e30;
    const auto& pu = cut_u.points;
    const auto& ps = cut_s.points;
    for (std::size_t i = 0; i + 1 < pu.size(); ++i) {
        const auto a = cut_u.section.plane(pu[i].z), b = cut_u.section.plane(pu[i + 1].z);
        if (std::hypot(b[0] - a[0], b[1] - a[1]) > co.seg_max) continue;
        for (std::size_t j = 0; j + 1 < ps.size(); ++j) {
            const auto c = cut_s.section.plane(ps[j].z), d = cut_s.section.plane(ps[j + 1].z);
            if (std::hypot(d[0] - c[0], d[1] - c[1]) > co.seg_max) continue;
            for (int corner = 0; corner < 2; ++corner) {
                const auto& p = corner ? b : a;
                const auto& q = corner ? d : c;
                const double gap = std::hypot(p[0] - q[0], p[1] - q[1]);
                min_gap = std::min(min_gap, gap);
            }
            double s, t;
            if (!segments_intersect(a, b, c, d, s, t)) continue;
            const bool chdbg = std::getenv("P3BP_CHANNEL_DEBUG") != nullptr;
            if (chdbg)
                std::fprintf(stderr, "bracket: u[%zu] th=%.6f  s[%zu] th=%.6f  s=%.3f t=%.3f\n", i,
                             pu[i].theta, j, ps[j].theta, s, t);

            // refine on the two curve parameters by a damped Newton with
            // finite-difference Jacobian
            double thu = pu[i].theta + s * (pu[i + 1].theta - pu[i].theta);
            double ths = ps[j].theta + t * (ps[j + 1].theta - ps[j].theta);
            const double hu = std::max(1e-7, 1e-4 * std::abs(pu[i + 1].theta - pu[i].theta));
            const double hs = std::max(1e-7, 1e-4 * std::abs(ps[j + 1].theta - ps[j].theta));
            std::optional<PlaneEval> eu, es;
            bool converged = false;
            for (int it = 0; it < 30; ++it) {
                eu = eval_curve(par, orbit_u, cut_u, thu, co, opts);
                es = eval_curve(par, orbit_s, cut_s, ths, co, opts);
                if (!eu || !es) break;
                const double fx = eu->xy[0] - es->xy[0], fy = eu->xy[1] - es->xy[1];
                if (chdbg)
                    std::fprintf(stderr, "  it %d: thu=%.8f ths=%.8f f=(%.3e, %.3e)\n", it, thu, ths, fx,
                                 fy);
                if (std::hypot(fx, fy) < co.match_tol) {
                    converged = true;
                    break;
                }
                const auto eup = eval_curve(par, orbit_u, cut_u, thu + hu, co, opts);
                const auto esp = eval_curve(par, orbit_s, cut_s, ths + hs, co, opts);
                if (!eup || !esp) break;
                const double j00 = (eup->xy[0] - eu->xy[0]) / hu, j10 = (eup->xy[1] - eu->xy[1]) / hu;
                const double j01 = -(esp->xy[0] - es->xy[0]) / hs, j11 = -(esp->xy[1] - es->xy[1]) / hs;
                const double den = j00 * j11 - j01 * j10;
                if (den == 0.0) break;
                double du = (fx * j11 - fy * j01) / den;
                double ds = (fy * j00 - fx * j10) / den;
                const double cap = 0.5 * std::abs(pu[i + 1].theta - pu[i].theta) + 1e-3;
                du = std::clamp(du, -cap, cap);
                ds = std::clamp(ds, -cap, cap);
                thu -= du;
                ths -= ds;
            }
            if (chdbg && !converged)
                std::fprintf(stderr, "  -> newton failed (eu=%d es=%d)\n", eu.has_value(), es.has_value());
            if (!converged || !eu || !es) continue;

            // crossing angle between the two cut curves on the section plane
            const auto eup = eval_curve(par, orbit_u, cut_u, thu + hu, co, opts);
            const auto esp = eval_curve(par, orbit_s, cut_s, ths + hs, co, opts);
            if (!eup || !esp) continue;
            const double tux = eup->xy[0] - eu->xy[0], tuy = eup->xy[1] - eu->xy[1];
            const double tsx = esp->xy[0] - es->xy[0], tsy = esp->xy[1] - es->xy[1];
            const double cross = tux * tsy - tuy * tsx;
            const double nu = std::hypot(tux, tuy), ns = std::hypot(tsx, tsy);
            double angle = std::asin(std::clamp(std::abs(cross) / (nu * ns), 0.0, 1.0));
            if (angle < co.angle_min) continue;  // tangency rejected

            ChannelPoint cp;
            cp.z0 = eu->z;
            cp.h = eval_hamiltonian(cp.z0, par);
            cp.crossing_angle = angle;
            cp.theta_dep_u = wrap_2pi(thu);
            cp.theta_dep_s = wrap_2pi(ths);
            cp.tof_u = eu->tof;
            cp.tof_s = es->tof;
            // footpoint phases from the generating rays: the footpoint of the
            // ray seed evolves with the orbit frequency along the flight
            cp.theta_minus = wrap_2pi(thu + orbit_u.omega() * eu->tof);
            cp.theta_plus = wrap_2pi(ths + orbit_s.omega() * es->tof);
            cp.z_minus = orbit_u.point_at_phase(cp.theta_minus);
            cp.z_plus = orbit_s.point_at_phase(cp.theta_plus);
            out.push_back(cp);
        }
    }
    if (out.empty()) {
        NoIntersection err("no transverse intersection between the cuts");
        err.min_gap = min_gap;
        throw err;
    }
    // de-duplicate points found from adjacent segment pairs
    std::vector<ChannelPoint> unique;
    for (const auto& cp : out) {
        bool dup = false;
        for (const auto& u : unique)
            if (norm(cp.z0 - u.z0) < 1e-6) dup = true;
        if (!dup) unique.push_back(cp);
    }
    return unique;
}

double Channel::delta_at(double I) const {
    if (!delta_of_I.empty()) return delta_of_I(I);
    return points.front().delta_shift();
}

double Channel::ddelta_dI(double I) const {
    if (!delta_of_I.empty()) return delta_of_I.derivative(I);
    return 0.0;
}

Channel unperturbed_scattering_map(std::vector<ChannelPoint> points, const OrbitFamily& family) {
    Channel ch;
    std::sort(points.begin(), points.end(),
              [](const ChannelPoint& a, const ChannelPoint& b) { return a.h < b.h; });
    ch.points = std::move(points);
    std::vector<double> I, d;
    double prev = 0.0;
    for (std::size_t i = 0; i < ch.points.size(); ++i) {
        const double Ii = family.action_of_energy(ch.points[i].h);
        double di = ch.points[i].delta_shift();
        if (i > 0) di = prev + wrap_pi(di - prev);  // keep the branch continuous in h
        I.push_back(Ii);
        d.push_back(di);
        prev = di;
    }
    ch.actions = I;
    if (I.size() >= 3) ch.delta_of_I = CubicSpline(I, d);
    return ch;
}

double delta_constancy_stddev(const SystemParams& par, const LyapunovOrbit& orbit_u,
                              const LyapunovOrbit& orbit_s, const ChannelPoint& cp, int n_shifts,
                              const ChannelOptions& co, const ode::Opts& opts) {
    (void)co;
    ode::UnperturbedRhs rhs{par};
    const OrbitFrameTable table_u(par, orbit_u, 128, opts);
    const bool same = &orbit_u == &orbit_s;
    const OrbitFrameTable table_s_own = same ? OrbitFrameTable() : OrbitFrameTable(par, orbit_s, 128, opts);
    const OrbitFrameTable& table_s = same ? table_u : table_s_own;
    std::vector<double> vals;
    const double T = orbit_u.period;
    for (int k = 0; k < n_shifts; ++k) {
        const double t = T * double(k) / double(n_shifts);
        Vec4 z = cp.z0;
        ode::advance<4>(rhs, z, 0.0, t, opts);
        const double thm = fit_asymptotic_phase(par, table_u, z, false, opts).theta;
        const double thp = fit_asymptotic_phase(par, table_s, z, true, opts).theta;
        double d = thp - thm;
        if (!vals.empty()) d = vals.front() + std::remainder(d - vals.front(), kTwoPi);
        vals.push_back(d);
    }
    double mean = 0.0;
    for (double v : vals) mean += v;
    mean /= vals.size();
    double var = 0.0;
    for (double v : vals) var += (v - mean) * (v - mean);
    return std::sqrt(var / vals.size());
}

}  // namespace p3bp
