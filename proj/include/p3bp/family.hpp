#ifndef P3BP_FAMILY_HPP
#define P3BP_FAMILY_HPP

#include "p3bp/lyapunov.hpp"
#include "p3bp/spline.hpp"

namespace p3bp {

// The Lyapunov family over an energy interval, with the action-angle data
// h0(I), omega(I) and d2h0/dI2 realized on the family grid.
class OrbitFamily {
public:
    OrbitFamily() = default;
    OrbitFamily(LagrangeIndex which, double mu, std::vector<LyapunovOrbit> members);

    LagrangeIndex which() const { return which_; }
    double mu() const { return mu_; }
    const std::vector<LyapunovOrbit>& members() const { return members_; }
    double h_min() const { return members_.front().h; }
    double h_max() const { return members_.back().h; }

    double period_at(double h) const { return T_of_h_(h); }
    double action_of_energy(double h) const { return I_of_h_(h); }
    double energy_of_action(double I) const { return h_of_I_(I); }
    double omega_of_action(double I) const { return kTwoPi / T_of_h_(h_of_I_(I)); }
    // dh0/dI = omega; d2h0/dI2 from centered differences of omega on the grid.
    double d2h0_dI2(double I) const { return domega_dI_(I); }

    // Perpendicular-crossing point interpolated in h (seed for correctors).
    Vec4 z_pc_at(double h) const;
    // Family direction dz_pc/dI at the theta = 0 point.
    Vec4 family_direction_pc(double h) const;
    double dT_dI(double h) const;

    // Corrected orbit at an arbitrary interior energy.
    LyapunovOrbit orbit_at_energy(const SystemParams& par, double h, const ode::Opts& opts = {}) const;

    // Action-frequency consistency |2pi/T - dh/dI|/omega on interior grid
    // points, via centered finite differences of the (I, h) samples.
    std::vector<double> frequency_consistency_residuals() const;

private:
    LagrangeIndex which_{};
    double mu_ = 0.0;
    std::vector<LyapunovOrbit> members_;
    CubicSpline T_of_h_, I_of_h_, h_of_I_, domega_dI_;
    std::array<CubicSpline, 4> zpc_of_h_;
};

struct ContinuationFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct FamilyOptions {
    double h_lo_offset = 1e-4;  // relative to H0(L)
    double h_hi_offset = 5e-3;
    int count = 36;             // >= 30
    double bootstrap_amplitude = 1e-3;
    double max_energy_step = 1e-3;
};

// Continue the Lyapunov family around the given collinear point over
// [H0(L)+h_lo_offset, H0(L)+h_hi_offset] on an endpoint-refined grid.
OrbitFamily continue_family(const SystemParams& par, LagrangeIndex which, const FamilyOptions& fo = {},
                            const ode::Opts& opts = {});

}  // namespace p3bp

#endif
