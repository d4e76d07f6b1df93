#ifndef P3BP_EQUILIBRIA_HPP
#define P3BP_EQUILIBRIA_HPP

#include <complex>
#include <vector>

#include "p3bp/dynamics.hpp"

namespace p3bp {

enum class LagrangeIndex { L1, L2, L3 };

struct Equilibrium {
    LagrangeIndex which;
    Vec4 z;  // at rest in the rotating frame: p1 = -q2, p2 = q1
};

// Collinear points on the q1-axis: L1 between the primaries, L2 beyond the
// lighter one, L3 beyond the heavier one.
std::vector<Equilibrium> find_collinear_equilibria(const SystemParams& par);
Equilibrium find_equilibrium(const SystemParams& par, LagrangeIndex which);

struct SaddleCenterData {
    double lambda;  // real hyperbolic rate, > 0
    double omega;   // center frequency, > 0
    Vec4 ev_unstable;     // eigenvector for +lambda
    Vec4 ev_stable;       // eigenvector for -lambda
    Vec4 ev_center_re;    // real part of the +i*omega eigenvector
    Vec4 ev_center_im;    // imaginary part
};

struct NotSaddleCenter : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Eigen-decomposition of the linearization at an equilibrium; throws
// NotSaddleCenter unless the spectrum is {+-lambda, +-i omega}.
SaddleCenterData classify_equilibrium(const Vec4& z_eq, const SystemParams& par);

// The triangular point L4 (center-center for small mu); used in tests.
Vec4 triangular_point_L4(const SystemParams& par);

}  // namespace p3bp

#endif
