#ifndef P3BP_MANIFOLDS_HPP
#define P3BP_MANIFOLDS_HPP

#include <optional>

#include "p3bp/family.hpp"

namespace p3bp {

// Poincare section {z[coord] = value} with a crossing direction and an
// acceptance window on a second coordinate. coord: 2 = q1, 3 = q2.
struct Section {
    int coord = 3;
    double value = 0.0;
    int direction = 0;  // sign of d(z[coord])/dt at accepted crossings; 0 = either
    int window_coord = 2;
    double window_min = -1e30;
    double window_max = 1e30;

    double offset(const Vec4& z) const { return z[coord] - value; }
    bool in_window(const Vec4& z) const {
        return z[window_coord] >= window_min && z[window_coord] <= window_max;
    }
    // 2D coordinates on the section: the free position and its momentum.
    std::array<double, 2> plane(const Vec4& z) const {
        const int pos = (coord == 3) ? 2 : 3;
        const int mom = (pos == 2) ? 0 : 1;
        return {z[pos], z[mom]};
    }
};

struct RegionBox {
    double q1_min = -2.5, q1_max = 1.8, q2_min = -2.2, q2_max = 2.2;
    bool contains(const Vec4& z) const {
        return z[2] >= q1_min && z[2] <= q1_max && z[3] >= q2_min && z[3] <= q2_max;
    }
};

struct EscapeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FiberRay {
    double theta = 0.0;   // departure phase on the orbit
    int branch = +1;      // sign of the displacement along the eigenvector
    double delta = 0.0;
    bool stable = false;  // stable (W^s) or unstable (W^u) fiber
    Vec4 footpoint{};     // orbit point at the departure phase
    Vec4 z0{};            // footpoint + branch*delta*v(theta)
};

// Initial condition on the local (un)stable manifold: the Floquet eigenvector
// transported to phase theta, displaced by branch*delta.
FiberRay fiber_initial_condition(const SystemParams& par, const LyapunovOrbit& orbit, double theta,
                                 int branch, double delta, bool stable, const ode::Opts& opts = {});

struct CutPoint {
    Vec4 z{};
    double theta = 0.0;  // departure phase of the generating ray
    double tof = 0.0;    // time of flight to the section (signed)
};

struct SectionCut {
    Section section;
    double h = 0.0;
    bool stable = false;
    int branch = +1;
    int crossing_index = 1;
    double delta = 1e-6;
    std::vector<CutPoint> points;  // ordered by theta
};

struct ManifoldOptions {
    int rays = 256;
    double delta = 1e-6;
    int crossing_index = 1;
    double t_limit = 40.0;
    double refine_dist = 0.02;  // refine theta grid where neighbors separate more than this
    int max_refine_rounds = 5;
    RegionBox box;
};

// Propagate a state to the k-th accepted crossing of the section (forward or
// backward in time), guarding against collisions and region escape.
std::optional<ode::EventRecord> propagate_to_section(const SystemParams& par, const Vec4& z0, double t0,
                                                     bool forward, const Section& section, int k,
                                                     double t_limit, const RegionBox& box,
                                                     const ode::Opts& opts);

// Fan of fiber rays over theta in [0, 2pi), each integrated to the section.
SectionCut globalize_manifold(const SystemParams& par, const LyapunovOrbit& orbit, bool stable, int branch,
                              const Section& section, const ManifoldOptions& mo, const ode::Opts& opts = {});

// Asymptotic phase: forward (stable side) or backward (unstable side), with
// one Richardson step over (periods, periods+1). If out_dist is given it
// receives the distance to the orbit at the last extraction time.
double asymptotic_phase(const SystemParams& par, const LyapunovOrbit& orbit, const Vec4& z, bool forward,
                        int periods = 6, const ode::Opts& opts = {}, double* out_dist = nullptr);

struct ChannelPoint {
    Vec4 z0{};
    double t0 = 0.0;  // extended-time coordinate of the homoclinic point
    double h = 0.0;
    double theta_minus = 0.0;  // asymptotic phase of the backward footpoint
    double theta_plus = 0.0;   // asymptotic phase of the forward footpoint
    Vec4 z_minus{}, z_plus{};
    double crossing_angle = 0.0;
    double theta_dep_u = 0.0, theta_dep_s = 0.0;  // generating ray phases
    double tof_u = 0.0, tof_s = 0.0;              // ray times of flight
    double delta_shift() const;                    // theta_plus - theta_minus, wrapped to (-pi, pi]
};

struct ChannelOptions {
    double angle_min = 1e-3;
    double match_tol = 1e-9;
    int phase_periods = 6;
    double t_limit = 60.0;
    double seg_max = 0.05;  // skip θ-adjacent cut points farther apart than this
    RegionBox box;
};

struct TangencyError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct NoIntersection : std::runtime_error {
    using std::runtime_error::runtime_error;
    double min_gap = 0.0;
};

// Transverse intersections of an unstable and a stable cut at the same energy
// on the same section. orbit_u/orbit_s may be the same orbit (homoclinic) or
// belong to different families (heteroclinic).
std::vector<ChannelPoint> find_channel(const SystemParams& par, const LyapunovOrbit& orbit_u,
                                       const LyapunovOrbit& orbit_s, const SectionCut& cut_u,
                                       const SectionCut& cut_s, const ChannelOptions& co,
                                       const ode::Opts& opts = {});

struct Channel {
    std::vector<ChannelPoint> points;  // ascending h
    std::vector<double> actions;
    CubicSpline delta_of_I;            // built when points.size() >= 3

    double delta_at(double I) const;
    double ddelta_dI(double I) const;
};

// Scattering-map shift: wraps the per-point theta_plus - theta_minus into a
// smooth interpolant over I (branch chosen continuous across points).
Channel unperturbed_scattering_map(std::vector<ChannelPoint> points, const OrbitFamily& family);

// Spread of theta_plus - theta_minus over time-shifted representatives of the
// same homoclinic orbit (Delta-constancy diagnostic).
double delta_constancy_stddev(const SystemParams& par, const LyapunovOrbit& orbit_u,
                              const LyapunovOrbit& orbit_s, const ChannelPoint& cp, int n_shifts,
                              const ChannelOptions& co, const ode::Opts& opts = {});

}  // namespace p3bp

#endif
