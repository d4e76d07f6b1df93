#include "doctest.h"

#include <random>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "p3bp/dynamics.hpp"
#include "p3bp/equilibria.hpp"
#include "p3bp/ode.hpp"

using namespace p3bp;

namespace {
constexpr double kEarthMoonMu = 0.0121505856;

Vec4 random_state(std::mt19937& rng) {
    std::uniform_real_distribution<double> u(-0.6, 0.6);
    // keep clear of both primaries
    for (;;) {
        Vec4 z{u(rng), u(rng), u(rng), u(rng)};
        z[3] += 0.8;
        const SystemParams par(kEarthMoonMu);
        if (dist_heavy(z, par) > 0.2 && dist_light(z, par) > 0.2) return z;
    }
}
}  // namespace

TEST_CASE("hamiltonian at the origin, any mu") {
    const double mu = 0.25;
    const SystemParams par(mu);
    const double H = eval_hamiltonian({0, 0, 0, 0}, par);
    CHECK(H == doctest::Approx(-(1.0 - mu) / mu - mu / (1.0 - mu)).epsilon(1e-14));
}

TEST_CASE("hamiltonian for equal masses at (0,0,0,1)") {
    const SystemParams par(0.5);
    const double H = eval_hamiltonian({0, 0, 0, 1}, par);
    const double expect = 0.5 - 0.5 - 2.0 * (0.5 / std::sqrt(1.25));
    CHECK(H == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("hamiltonian rejects a primary") {
    const SystemParams par(kEarthMoonMu);
    CHECK_THROWS_AS(eval_hamiltonian({0, 0, par.mu, 1e-5}, par), CollisionError);
}

TEST_CASE("gradient is orthogonal to the field (antisymmetry of J)") {
    const SystemParams par(kEarthMoonMu);
    std::mt19937 rng(12345);
    for (int i = 0; i < 1000; ++i) {
        const Vec4 z = random_state(rng);
        const Vec4 g = grad_hamiltonian(z, par);
        const Vec4 f = vector_field(z, par);
        CHECK(std::abs(dot(g, f)) < 1e-12 * std::max(1.0, dot(g, g)));
    }
}

TEST_CASE("vector field matches a finite difference of the flow") {
    const SystemParams par(kEarthMoonMu);
    std::mt19937 rng(777);
    ode::Opts opts;
    for (int i = 0; i < 5; ++i) {
        const Vec4 z = random_state(rng);
        const double h = 1e-6;
        Vec4 zp = z, zm = z;
        ode::UnperturbedRhs rhs{par};
        ode::advance<4>(rhs, zp, 0.0, h, opts);
        ode::advance<4>(rhs, zm, 0.0, -h, opts);
        const Vec4 fd = (1.0 / (2.0 * h)) * (zp - zm);
        const Vec4 f = vector_field(z, par);
        CHECK(norm(fd - f) < 1e-8 * std::max(1.0, norm(f)));
    }
}

TEST_CASE("field jacobian matches finite differences of the field") {
    const SystemParams par(kEarthMoonMu);
    std::mt19937 rng(4242);
    const Vec4 z = random_state(rng);
    const Mat4 A = vector_field_jacobian(z, par);
    const double h = 1e-7;
    for (int j = 0; j < 4; ++j) {
        Vec4 zp = z, zm = z;
        zp[j] += h;
        zm[j] -= h;
        const Vec4 col = (1.0 / (2.0 * h)) * (vector_field(zp, par) - vector_field(zm, par));
        for (int i = 0; i < 4; ++i) CHECK(A[i][j] == doctest::Approx(col[i]).epsilon(5e-7));
    }
}

TEST_CASE("collinear equilibria: locations and gradient norm") {
    const SystemParams par(kEarthMoonMu);
    const auto eqs = find_collinear_equilibria(par);
    REQUIRE(eqs.size() == 3);
    for (const auto& e : eqs) {
        CHECK(norm(vector_field(e.z, par)) < 1e-12);
        CHECK(norm(grad_hamiltonian(e.z, par)) < 1e-12);
    }

    // independent oracle: bisection on the closed-form axis derivative
    auto dV = [&](double q1) {
        const double mu = par.mu;
        const double u1 = q1 - mu, u2 = q1 + 1.0 - mu;
        return q1 - (1.0 - mu) * ((u1 > 0) - (u1 < 0)) / (u1 * u1) - mu * ((u2 > 0) - (u2 < 0)) / (u2 * u2);
    };
    auto bisect = [&](double a, double b) {
        double fa = dV(a);
        for (int k = 0; k < 120; ++k) {
            const double m = 0.5 * (a + b), fm = dV(m);
            if ((fm < 0) == (fa < 0)) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        return 0.5 * (a + b);
    };
    const double L1 = bisect(-1.0 + par.mu + 1e-6, par.mu - 1e-6);
    const double L2 = bisect(-2.0, -1.0 + par.mu - 1e-6);
    CHECK(eqs[0].z[2] == doctest::Approx(L1).epsilon(1e-12));
    CHECK(eqs[1].z[2] == doctest::Approx(L2).epsilon(1e-12));
    CHECK(L1 == doctest::Approx(-0.8369).epsilon(2e-4));
    CHECK(L2 == doctest::Approx(-1.1557).epsilon(2e-4));

    const double H_L1 = eval_hamiltonian(eqs[0].z, par);
    CHECK(H_L1 == doctest::Approx(-1.5940).epsilon(2e-4));
}

TEST_CASE("equal masses put L1 at the barycenter axis midpoint") {
    const SystemParams par(0.5);
    const auto e = find_equilibrium(par, LagrangeIndex::L1);
    CHECK(std::abs(e.z[2] - 0.0) < 1e-12);
}

TEST_CASE("saddle-center classification at L1 with char-poly oracle") {
    const SystemParams par(kEarthMoonMu);
    const auto e = find_equilibrium(par, LagrangeIndex::L1);
    const auto d = classify_equilibrium(e.z, par);
    CHECK(d.lambda > 0.0);
    CHECK(d.omega > 0.0);
    CHECK(d.lambda == doctest::Approx(2.932).epsilon(1e-3));
    CHECK(d.omega == doctest::Approx(2.334).epsilon(1e-3));

    // characteristic polynomial of A: s^4 + b s^2 + c with
    // b = -tr(A^2)/2, c = det(A) (trace of A vanishes)
    const Mat4 A = vector_field_jacobian(e.z, par);
    const Mat4 A2 = ode::mat_mul(A, A);
    const double b = -(A2[0][0] + A2[1][1] + A2[2][2] + A2[3][3]) / 2.0;
    const double c = ode::mat_det(A);
    const double disc = std::sqrt(b * b - 4.0 * c);
    const double s2_pos = (-b + disc) / 2.0;   // lambda^2
    const double s2_neg = (-b - disc) / 2.0;   // -omega^2
    CHECK(d.lambda == doctest::Approx(std::sqrt(s2_pos)).epsilon(1e-10));
    CHECK(d.omega == doctest::Approx(std::sqrt(-s2_neg)).epsilon(1e-10));

    // symplectic spectrum symmetry: eigenvalues in +- pairs
    Eigen::Matrix4d M;
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) M(i, j) = A[i][j];
    const auto vals = Eigen::EigenSolver<Eigen::Matrix4d>(M).eigenvalues();
    double sum = 0.0;
    for (int i = 0; i < 4; ++i) sum += std::abs(vals(i).real() + vals(i).imag());
    // sum of all eigenvalues is zero for a Hamiltonian matrix
    std::complex<double> tot = vals(0) + vals(1) + vals(2) + vals(3);
    CHECK(std::abs(tot) < 1e-10);
    (void)sum;
}

TEST_CASE("L4 is not saddle-center") {
    const SystemParams par(kEarthMoonMu);
    const Vec4 L4 = triangular_point_L4(par);
    CHECK(norm(vector_field(L4, par)) < 1e-12);
    CHECK_THROWS_AS(classify_equilibrium(L4, par), NotSaddleCenter);
}

TEST_CASE("energy conservation and reversibility of the integrator") {
    const SystemParams par(kEarthMoonMu);
    ode::Opts opts;
    // bounded motion near L4
    Vec4 z = triangular_point_L4(par);
    z[2] += 0.01;
    const double H0 = eval_hamiltonian(z, par);
    ode::UnperturbedRhs rhs{par};

    Vec4 zt = z;
    const double span = 10.0 * 2.7;  // ten Lyapunov-period-scale units
    double worst = 0.0;
    ode::advance_observed<4>(rhs, zt, 0.0, span, opts, [&](double, const Vec4& s) {
        worst = std::max(worst, std::abs(eval_hamiltonian(s, par) - H0));
    });
    CHECK(worst < 1e-11);

    Vec4 zb = zt;
    ode::advance<4>(rhs, zb, span, 0.0, opts);
    CHECK(norm(zb - z) < 1e-9);
}

TEST_CASE("dense trajectory queries match direct integration") {
    const SystemParams par(kEarthMoonMu);
    ode::Opts opts;
    Vec4 z = triangular_point_L4(par);
    z[2] += 0.02;
    ode::UnperturbedRhs rhs{par};
    const auto tr = ode::Trajectory::record(rhs, z, 0.0, 5.0, opts);
    for (double t : {0.31, 1.7, 3.14159, 4.999}) {
        Vec4 direct = z;
        ode::advance<4>(rhs, direct, 0.0, t, opts);
        CHECK(norm(tr.at(t) - direct) < 1e-10);
    }
}

TEST_CASE("event detection localizes q2 crossings") {
    const SystemParams par(kEarthMoonMu);
    ode::Opts opts;
    // descending start above the q1 axis
    const double q1 = -0.5, q2 = 0.3, vx = 0.0, vy = -0.3;
    const Vec4 z{vx - q2, vy + q1, q1, q2};
    ode::UnperturbedRhs rhs{par};
    auto ev = ode::find_crossing(rhs, z, 0.0, 5.0, [](const Vec4& s, double) { return s[3]; }, 0, 1, opts);
    REQUIRE(ev.has_value());
    CHECK(std::abs(ev->x[3]) < 1e-12);
}

TEST_CASE("variational flow: identity, volume, directional derivative") {
    const SystemParams par(kEarthMoonMu);
    ode::Opts opts;
    Vec4 z = triangular_point_L4(par);
    z[2] += 0.015;

    Vec4 ztmp = z;
    const Mat4 phi0 = ode::state_transition(par, ztmp, 0.0, 0.0, opts);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) CHECK(phi0[i][j] == doctest::Approx(i == j ? 1.0 : 0.0).epsilon(1e-15));

    ztmp = z;
    const double span = 2.7;
    const Mat4 phi = ode::state_transition(par, ztmp, 0.0, span, opts);
    CHECK(ode::mat_det(phi) == doctest::Approx(1.0).epsilon(1e-8));

    // column check against finite differences of the flow
    ode::UnperturbedRhs rhs{par};
    const double d = 1e-7;
    for (int j = 0; j < 4; ++j) {
        Vec4 zp = z, zm = z;
        zp[j] += d;
        zm[j] -= d;
        ode::advance<4>(rhs, zp, 0.0, span, opts);
        ode::advance<4>(rhs, zm, 0.0, span, opts);
        const Vec4 col = (1.0 / (2.0 * d)) * (zp - zm);
        for (int i = 0; i < 4; ++i) CHECK(phi[i][j] == doctest::Approx(col[i]).epsilon(1e-5));
    }
}

TEST_CASE("perturbation kinds") {
    const SystemParams par(kEarthMoonMu);
    std::mt19937 rng(99);
    const Vec4 z = random_state(rng);

    SUBCASE("zero") {
        const auto s = PerturbationSpec::zero();
        CHECK(norm(eval_perturbation(z, 0.3, s)) == 0.0);
    }
    SUBCASE("velocity dissipation") {
        const double kappa = 0.7;
        const auto s = PerturbationSpec::dissipation(kappa);
        const Vec4 w = eval_perturbation(z, 0.0, s);
        CHECK(w[0] == doctest::Approx(-kappa * vel_x(z)).epsilon(1e-15));
        CHECK(w[1] == doctest::Approx(-kappa * vel_y(z)).epsilon(1e-15));
        CHECK(w[2] == 0.0);
        CHECK(w[3] == 0.0);
    }
    SUBCASE("thrust window has compact support with smooth ramps") {
        auto s = PerturbationSpec::thrust(1.0, 0.0, 2.0, 1.0, 2.0, 0.05);
        CHECK(norm(eval_perturbation(z, 1.0 - 0.05, s)) == 0.0);
        CHECK(norm(eval_perturbation(z, 2.0 + 0.05, s)) == 0.0);
        CHECK(eval_perturbation(z, 1.5, s)[0] == doctest::Approx(2.0).epsilon(1e-14));
        // C1 at the support edge: values near the edge are tiny
        CHECK(norm(eval_perturbation(z, 1.0 - 0.05 + 1e-4, s)) < 1e-8);
    }
    SUBCASE("hamiltonian gradient H1 = q1: X1 H0 = {H0, q1} = -(p1+q2)") {
        auto s = PerturbationSpec::hamiltonian([](const Vec4&, double) { return 0.0; },
                                               [](const Vec4&, double) { return Vec4{0, 0, 1, 0}; });
        const Vec4 w = eval_perturbation(z, 0.0, s);
        CHECK(w[0] == doctest::Approx(-1.0).epsilon(1e-15));
        CHECK(w[1] == 0.0);
        CHECK(w[2] == 0.0);
        CHECK(w[3] == 0.0);
        const double bracket = -(z[0] + z[3]);  // hand expansion of {H0, q1}
        CHECK(perturbation_energy_rate(z, 0.0, s, par) == doctest::Approx(bracket).epsilon(1e-10));
    }
}

TEST_CASE("perturbed energy rate identity dH0/dt = eps X1 H0") {
    const SystemParams par(kEarthMoonMu);
    ode::Opts opts;
    Vec4 z0 = triangular_point_L4(par);
    z0[2] += 0.01;
    PerturbationSpec spec = PerturbationSpec::thrust(0.6, 0.8, 1.0, 0.5, 2.5, 0.05);
    spec.epsilon = 1e-3;

    // co-integrate the state with the quadrature of eps * X1 H0
    auto rhs = [&](const ode::VecN<5>& x, ode::VecN<5>& dx, double t) {
        const Vec4 z{x[0], x[1], x[2], x[3]};
        Vec4 dz = vector_field(z, par);
        const Vec4 w = eval_perturbation(z, t, spec);
        for (int i = 0; i < 4; ++i) dz[i] += spec.epsilon * w[i];
        for (int i = 0; i < 4; ++i) dx[i] = dz[i];
        dx[4] = spec.epsilon * perturbation_energy_rate(z, t, spec, par);
    };
    ode::VecN<5> x{z0[0], z0[1], z0[2], z0[3], 0.0};
    const double H_start = eval_hamiltonian(z0, par);
    ode::advance<5>(rhs, x, 0.0, 4.0, opts);
    const double H_end = eval_hamiltonian({x[0], x[1], x[2], x[3]}, par);
    CHECK(H_end - H_start == doctest::Approx(x[4]).epsilon(1e-10));
    CHECK(std::abs(H_end - H_start) > 1e-6);  // the burst actually did something
}
