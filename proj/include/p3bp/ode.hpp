#ifndef P3BP_ODE_HPP
#define P3BP_ODE_HPP

#include <algorithm>
#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

#include <boost/numeric/odeint/stepper/runge_kutta_fehlberg78.hpp>
#include <boost/numeric/odeint/stepper/controlled_runge_kutta.hpp>
#include <boost/numeric/odeint/stepper/generation.hpp>

#include "p3bp/dynamics.hpp"

namespace p3bp::ode {

struct Opts {
    double abs_tol = 1e-12;
    double rel_tol = 1e-12;
    double init_dt = 1e-3;
    double max_dt = 0.25;  // bounds step size so section crossings cannot be skipped
    std::size_t max_steps = 4000000;
};

struct StepUnderflow : std::runtime_error {
    using std::runtime_error::runtime_error;
};

template <std::size_t N>
using VecN = std::array<double, N>;

namespace detail {
template <std::size_t N>
using stepper_t = boost::numeric::odeint::runge_kutta_fehlberg78<VecN<N>>;
}

// Integrate sys from t0 to t1 (either direction); obs(t, x) is called at t0 and
// after every accepted step. x is advanced in place.
template <std::size_t N, class Sys, class Obs>
void advance_observed(Sys&& sys, VecN<N>& x, double t0, double t1, const Opts& o, Obs&& obs) {
    namespace od = boost::numeric::odeint;
    if (t1 == t0) {
        obs(t0, x);
        return;
    }
    const double dir = (t1 > t0) ? 1.0 : -1.0;
    auto ctrl = od::make_controlled(o.abs_tol, o.rel_tol, detail::stepper_t<N>());
    double t = t0;
    double dt = dir * std::min({o.init_dt, o.max_dt, std::abs(t1 - t0)});
    obs(t, x);
    std::size_t steps = 0;
    while (dir * (t1 - t) > 0.0) {
        if (std::abs(dt) > o.max_dt) dt = dir * o.max_dt;
        if (dir * (t + dt - t1) > 0.0) dt = t1 - t;
        const auto res = ctrl.try_step(sys, x, t, dt);
        if (res == od::success) {
            obs(t, x);
        } else if (std::abs(dt) < 1e-15 * std::max(1.0, std::abs(t))) {
            throw StepUnderflow("step size underflow during integration");
        }
        if (++steps > o.max_steps) throw std::runtime_error("integration exceeded max step count");
    }
}

template <std::size_t N, class Sys>
void advance(Sys&& sys, VecN<N>& x, double t0, double t1, const Opts& o) {
    advance_observed<N>(sys, x, t0, t1, o, [](double, const VecN<N>&) {});
}

// ---------------------------------------------------------------------------
// Right-hand sides

struct UnperturbedRhs {
    SystemParams par;
    void operator()(const Vec4& z, Vec4& dz, double) const { dz = vector_field(z, par); }
};

struct PerturbedRhs {
    SystemParams par;
    const PerturbationSpec* spec;  // not owned
    void operator()(const Vec4& z, Vec4& dz, double t) const {
        dz = vector_field(z, par);
        if (spec && spec->kind != PerturbationKind::Zero && spec->epsilon != 0.0) {
            const Vec4 w = eval_perturbation(z, t, *spec);
            for (int i = 0; i < 4; ++i) dz[i] += spec->epsilon * w[i];
        }
    }
};

// Unperturbed flow plus the state-transition matrix (row-major in x[4..19]).
struct VariationalRhs {
    SystemParams par;
    void operator()(const VecN<20>& x, VecN<20>& dx, double) const {
        const Vec4 z{x[0], x[1], x[2], x[3]};
        const Vec4 f = vector_field(z, par);
        const Mat4 A = vector_field_jacobian(z, par);
        for (int i = 0; i < 4; ++i) dx[i] = f[i];
        for (int i = 0; i < 4; ++i)
            for (int j = 0; j < 4; ++j) {
                double s = 0.0;
                for (int k = 0; k < 4; ++k) s += A[i][k] * x[4 + 4 * k + j];
                dx[4 + 4 * i + j] = s;
            }
    }
};

// ---------------------------------------------------------------------------
// Dense trajectory: stores accepted-step nodes; interior values are recovered
// by re-integrating from the bracketing node in the recording direction.

class Trajectory {
public:
    Trajectory() = default;

    template <class Sys>
    static Trajectory record(Sys sys, const Vec4& x0, double t0, double t1, const Opts& o) {
        Trajectory tr;
        tr.opts_ = o;
        tr.forward_ = t1 >= t0;
        tr.rhs_ = [sys](const Vec4& z, Vec4& dz, double t) mutable { sys(z, dz, t); };
        Vec4 x = x0;
        advance_observed<4>(tr.rhs_, x, t0, t1, o, [&tr](double t, const Vec4& s) {
            tr.t_.push_back(t);
            tr.x_.push_back(s);
        });
        if (!tr.forward_) {
            std::reverse(tr.t_.begin(), tr.t_.end());
            std::reverse(tr.x_.begin(), tr.x_.end());
        }
        return tr;
    }

    double t_min() const { return t_.front(); }
    double t_max() const { return t_.back(); }
    std::size_t size() const { return t_.size(); }
    const std::vector<double>& times() const { return t_; }
    const std::vector<Vec4>& states() const { return x_; }

    Vec4 at(double t) const;

private:
    std::function<void(const Vec4&, Vec4&, double)> rhs_;
    Opts opts_;
    std::vector<double> t_;
    std::vector<Vec4> x_;
    bool forward_ = true;
};

// ---------------------------------------------------------------------------
// Event detection

struct EventRecord {
    double t;
    Vec4 x;
    int sign;  // sign of g after the crossing
};

namespace detail {
struct EventFound {};  // control-flow sentinel used by find_crossing
}

// Locate the k-th (1-based) crossing of g(x,t) along the flow of sys starting at
// (x0, t0), integrating toward t_limit. direction: +1 counts - to +, -1 counts
// + to -, 0 counts both. Crossing time localized to t_tol. Returns nullopt if
// fewer than k crossings occur before t_limit.
template <class Sys, class G>
std::optional<EventRecord> find_crossing(Sys&& sys, const Vec4& x0, double t0, double t_limit, G&& g,
                                         int direction, int k, const Opts& o, double t_tol = 1e-13) {
    struct Node {
        double t;
        Vec4 x;
    };
    std::optional<EventRecord> hit;
    Node prev_signed{t0, x0};
    double prev_g = g(x0, t0);
    bool have_sign = std::abs(prev_g) > 0.0;
    int count = 0;

    Vec4 x = x0;
    try {
        advance_observed<4>(sys, x, t0, t_limit, o, [&](double t, const Vec4& s) {
            if (t == t0) return;
            const double gv = g(s, t);
            if (gv != 0.0) {
                if (have_sign && ((prev_g < 0 && gv > 0) || (prev_g > 0 && gv < 0))) {
                    const int dir_here = gv > 0 ? 1 : -1;
                    if (direction == 0 || direction == dir_here) {
                        if (++count == k) {
                            // localize inside [prev_signed.t, t] by bisection on
                            // the re-integrated flow from the step start
                            double ta = prev_signed.t, tb = t;
                            double ga = prev_g;
                            Vec4 base = prev_signed.x;
                            const double tbase = prev_signed.t;
                            auto eval = [&](double tm) {
                                Vec4 y = base;
                                advance<4>(sys, y, tbase, tm, o);
                                return std::make_pair(g(y, tm), y);
                            };
                            Vec4 xm{};
                            while (std::abs(tb - ta) > t_tol) {
                                const double tm = 0.5 * (ta + tb);
                                auto [gm, ym] = eval(tm);
                                xm = ym;
                                if (gm == 0.0) {
                                    ta = tb = tm;
                                    break;
                                }
                                if ((gm < 0) == (ga < 0)) {
                                    ta = tm;
                                    ga = gm;
                                } else {
                                    tb = tm;
                                }
                            }
                            const double tm = 0.5 * (ta + tb);
                            auto [gm, ym] = eval(tm);
                            (void)gm;
                            hit = EventRecord{tm, ym, dir_here};
                            throw detail::EventFound{};
                        }
                    }
                }
                prev_signed = Node{t, s};
                prev_g = gv;
                have_sign = true;
            }
        });
    } catch (const detail::EventFound&) {
        // found; hit is set
    }
    return hit;
}

// Segment-wise state-transition data along an unperturbed trajectory.
struct SegmentTable {
    std::vector<double> t;       // node times, ascending, size n+1
    std::vector<Vec4> z;         // node states
    std::vector<Mat4> stm;       // stm[i] maps tangent vectors from t[i] to t[i+1]
};

// Integrate the variational flow from z0 over [t0, t1] with nodes every ~dt_node.
SegmentTable record_segments(const SystemParams& par, const Vec4& z0, double t0, double t1, double dt_node,
                             const Opts& o);

// STM over [t0, t1] from z0 (z0 advanced in place to the endpoint).
Mat4 state_transition(const SystemParams& par, Vec4& z0, double t0, double t1, const Opts& o);

Mat4 mat_mul(const Mat4& a, const Mat4& b);
Vec4 mat_vec(const Mat4& a, const Vec4& v);
Vec4 vec_mat(const Vec4& w, const Mat4& a);  // row-covector times matrix
Mat4 mat_identity();
double mat_det(const Mat4& a);

}  // namespace p3bp::ode

#endif
