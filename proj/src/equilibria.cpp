#include "p3bp/equilibria.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

namespace p3bp {

namespace {

// dV/dq1 on the axis q2 = 0.
double axis_gradient(double q1, const SystemParams& par) {
    const double mu = par.mu;
    const double u1 = q1 - mu;
    const double u2 = q1 + 1.0 - mu;
    return q1 - (1.0 - mu) * u1 / std::pow(std::abs(u1), 3) - mu * u2 / std::pow(std::abs(u2), 3);
}

double bisect_axis(double a, double b, const SystemParams& par) {
    double fa = axis_gradient(a, par);
    double fb = axis_gradient(b, par);
    if (fa == 0.0) return a;
    if (fb == 0.0) return b;
    if ((fa < 0) == (fb < 0)) throw std::runtime_error("equilibrium bracket does not straddle a root");
    for (int it = 0; it < 200 && b - a > 1e-16 * std::max(1.0, std::abs(a) + std::abs(b)); ++it) {
        const double m = 0.5 * (a + b);
        const double fm = axis_gradient(m, par);
        if (fm == 0.0) return m;
        if ((fm < 0) == (fa < 0)) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    return 0.5 * (a + b);
}

Vec4 rest_state(double q1) { return {0.0, q1, q1, 0.0}; }

}  // namespace

std::vector<Equilibrium> find_collinear_equilibria(const SystemParams& par) {
    const double mu = par.mu;
    const double heavy = mu, light = -1.0 + mu;
    const double gap = 1e-6;
    std::vector<Equilibrium> out;
    out.push_back({LagrangeIndex::L1, rest_state(bisect_axis(light + gap, heavy - gap, par))});
    out.push_back({LagrangeIndex::L2, rest_state(bisect_axis(light - 2.0, light - gap, par))});
    out.push_back({LagrangeIndex::L3, rest_state(bisect_axis(heavy + gap, heavy + 2.0, par))});
    return out;
}

Equilibrium find_equilibrium(const SystemParams& par, LagrangeIndex which) {
    for (const auto& e : find_collinear_equilibria(par))
        if (e.which == which) return e;
    throw std::logic_error("unreachable");
}

SaddleCenterData classify_equilibrium(const Vec4& z_eq, const SystemParams& par) {
    const Vec4 f = vector_field(z_eq, par);
    if (norm(f) > 1e-10) throw std::invalid_argument("classify_equilibrium: point is not an equilibrium");
    const Mat4 A = vector_field_jacobian(z_eq, par);
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = A[i][j];
    Eigen::EigenSolver<Eigen::Matrix4d> es(M);
    const auto vals = es.eigenvalues();
    const auto vecs = es.eigenvectors();

    int i_unst = -1, i_st = -1, i_ctr = -1;
    for (int i = 0; i < 4; ++i) {
        const std::complex<double> v = vals(i);
        if (std::abs(v.imag()) < 1e-9 * std::max(1.0, std::abs(v.real()))) {
            if (v.real() > 1e-9) i_unst = i;
            if (v.real() < -1e-9) i_st = i;
        } else if (std::abs(v.real()) < 1e-9 * std::abs(v.imag()) && v.imag() > 0.0) {
            i_ctr = i;
        }
    }
    if (i_unst < 0 || i_st < 0 || i_ctr < 0)
        throw NotSaddleCenter("spectrum is not of saddle-center type +-lambda, +-i omega");

    SaddleCenterData d;
    d.lambda = vals(i_unst).real();
    d.omega = vals(i_ctr).imag();
    auto real_vec = [&](int i) {
        Vec4 v;
        for (int k = 0; k < 4; ++k) v[k] = vecs(k, i).real();
        const double n = norm(v);
        for (auto& c : v) c /= n;
        return v;
    };
    d.ev_unstable = real_vec(i_unst);
    d.ev_stable = real_vec(i_st);
    Vec4 re, im;
    for (int k = 0; k < 4; ++k) {
        re[k] = vecs(k, i_ctr).real();
        im[k] = vecs(k, i_ctr).imag();
    }
    const double n = std::sqrt(dot(re, re) + dot(im, im));
    for (int k = 0; k < 4; ++k) {
        re[k] /= n;
        im[k] /= n;
    }
    d.ev_center_re = re;
    d.ev_center_im = im;
    return d;
}

Vec4 triangular_point_L4(const SystemParams& par) {
    const double q1 = par.mu - 0.5;
    const double q2 = std::sqrt(3.0) / 2.0;
    return {-q2, q1, q1, q2};
}

}  // namespace p3bp
