#ifndef P3BP_FRAMES_HPP
#define P3BP_FRAMES_HPP

#include "p3bp/family.hpp"

namespace p3bp {

// Phase-indexed Floquet data along one Lyapunov orbit: the orbit point, the
// flow direction, and the transported (unnormalized) stable/unstable
// eigenvectors, evaluated exactly via stored nodes plus short variational
// completions. With family data attached it also provides the family
// direction dP/dI and the dual covectors of the frame {X0, e_I, v_s, v_u}.
class OrbitFrameTable {
public:
    OrbitFrameTable() = default;
    OrbitFrameTable(const SystemParams& par, const LyapunovOrbit& orbit, int nodes_per_period = 128,
                    const ode::Opts& opts = {});

    void attach_family(const OrbitFamily& family);

    const LyapunovOrbit& orbit() const { return *orbit_; }
    double period() const { return orbit_->period; }
    double omega() const { return orbit_->omega(); }

    struct Frame {
        Vec4 point;
        Vec4 flow;       // X0 at the point
        Vec4 w_s, w_u;   // transported eigenvectors, w(psi) = DPhi^{t(psi)} v(0)
        Vec4 e_I;        // family direction (only when family attached)
        bool has_family = false;
    };
    Frame at_phase(double psi) const;

    // Transported eigenvector over total time t from phase psi0, including the
    // per-period multiplier accumulated across wraps:
    // DPhi^t(P(psi0)) v_hat_{s,u}(psi0).
    Vec4 transported(double psi0, double t, bool stable) const;

    // Dual covectors of the frame at a phase: p_theta pairs (omega, 0, 0, 0)
    // with {X0, e_I, v_hat_s, v_hat_u}; p_I pairs (0, 1, 0, 0). Requires family.
    struct DualFrame {
        Vec4 p_theta;
        Vec4 p_I;
    };
    DualFrame dual_at_phase(double psi) const;

private:
    const LyapunovOrbit* orbit_ = nullptr;
    SystemParams par_{0.5};
    ode::Opts opts_;
    int n_ = 0;
    std::vector<double> t_;       // node times, t_i = i T / n
    std::vector<Vec4> pt_;        // node states
    std::vector<Mat4> stm_;       // node-to-node transition matrices
    std::vector<Vec4> ws_, wu_;   // transported eigenvectors at nodes
    const OrbitFamily* family_ = nullptr;
    Vec4 eI0_{};
    double dT_dI_ = 0.0;

    // state and transported vectors at time t in [0, T)
    void eval_raw(double t, Vec4* point, Vec4* ws, Vec4* wu, Mat4* seg) const;
};

// Least-squares asymptotic phase: fits samples of the forward (stable side)
// or backward (unstable side) trajectory of z to
//   Phi^t(P(phi) + A v_hat(phi) + B v_hat_other(phi)),
// estimating the contamination coefficient B instead of letting it corrupt
// the extraction.
struct PhaseFit {
    double theta = 0.0;    // asymptotic phase at the reference time of z
    double coef_conv = 0.0;   // coefficient along the converging direction
    double coef_grow = 0.0;   // contamination along the opposite direction
    double rms = 0.0;      // fit residual
    int samples = 0;
    double window_start = 0.0;  // first sample time used (signed)
};

PhaseFit fit_asymptotic_phase(const SystemParams& par, const OrbitFrameTable& table, const Vec4& z,
                              bool forward, const ode::Opts& opts = {});

}  // namespace p3bp

#endif
