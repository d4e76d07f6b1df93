#include "p3bp/family.hpp"

#include <algorithm>

namespace p3bp {

OrbitFamily::OrbitFamily(LagrangeIndex which, double mu, std::vector<LyapunovOrbit> members)
    : which_(which), mu_(mu), members_(std::move(members)) {
    if (members_.size() < 3) throw ContinuationFailure("family needs at least 3 members");
    std::sort(members_.begin(), members_.end(),
              [](const LyapunovOrbit& a, const LyapunovOrbit& b) { return a.h < b.h; });
    const std::size_t n = members_.size();
    std::vector<double> h(n), T(n), I(n);
    std::array<std::vector<double>, 4> zc;
    for (auto& v : zc) v.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        h[i] = members_[i].h;
        T[i] = members_[i].period;
        I[i] = members_[i].action;
        for (int k = 0; k < 4; ++k) zc[k][i] = members_[i].z_pc[k];
    }
    for (std::size_t i = 1; i < n; ++i)
        if (!(I[i] > I[i - 1]))
            throw ContinuationFailure("fold detected: action is not monotone in energy across the family");
    T_of_h_ = CubicSpline(h, T);
    I_of_h_ = CubicSpline(h, I);
    h_of_I_ = CubicSpline(I, h);
    for (int k = 0; k < 4; ++k) zpc_of_h_[k] = CubicSpline(h, zc[k]);
    // centered differences of omega over the family grid
    std::vector<double> Ii, wp;
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double w_prev = kTwoPi / T[i - 1], w_next = kTwoPi / T[i + 1];
        Ii.push_back(I[i]);
        wp.push_back((w_next - w_prev) / (I[i + 1] - I[i - 1]));
    }
    domega_dI_ = CubicSpline(Ii, wp);
}

Vec4 OrbitFamily::z_pc_at(double h) const {
    return {zpc_of_h_[0](h), zpc_of_h_[1](h), zpc_of_h_[2](h), zpc_of_h_[3](h)};
}

Vec4 OrbitFamily::family_direction_pc(double h) const {
    const double w = kTwoPi / T_of_h_(h);
    return {w * zpc_of_h_[0].derivative(h), w * zpc_of_h_[1].derivative(h), w * zpc_of_h_[2].derivative(h),
            w * zpc_of_h_[3].derivative(h)};
}

double OrbitFamily::dT_dI(double h) const { return T_of_h_.derivative(h) * (kTwoPi / T_of_h_(h)); }

LyapunovOrbit OrbitFamily::orbit_at_energy(const SystemParams& par, double h, const ode::Opts& opts) const {
    OrbitSeed seed;
    seed.z = z_pc_at(h);
    seed.period_guess = T_of_h_(h);
    return correct_orbit_fixed_energy(par, seed, h, opts);
}

std::vector<double> OrbitFamily::frequency_consistency_residuals() const {
    std::vector<double> res;
    for (std::size_t i = 1; i + 1 < members_.size(); ++i) {
        const double w = members_[i].omega();
        const double dh_dI = (members_[i + 1].h - members_[i - 1].h) / (members_[i + 1].action - members_[i - 1].action);
        res.push_back(std::abs(w - dh_dI) / w);
    }
    return res;
}

OrbitFamily continue_family(const SystemParams& par, LagrangeIndex which, const FamilyOptions& fo,
                            const ode::Opts& opts) {
    if (fo.count < 3) throw ContinuationFailure("family count too small");
    const Equilibrium eq = find_equilibrium(par, which);
    const double hL = eval_hamiltonian(eq.z, par);
    const double h_lo = hL + fo.h_lo_offset, h_hi = hL + fo.h_hi_offset;
    if (!(h_hi > h_lo)) throw ContinuationFailure("empty energy range");

    // endpoint-refined grid (cosine clustering)
    std::vector<double> grid(fo.count);
    for (int j = 0; j < fo.count; ++j) {
        const double s = 0.5 - 0.5 * std::cos(kPi * double(j) / double(fo.count - 1));
        grid[j] = h_lo + (h_hi - h_lo) * s;
    }

    LyapunovOrbit current = correct_orbit_fixed_amplitude(par, seed_orbit_from_linearization(eq, par, fo.bootstrap_amplitude), opts);

    auto walk_to = [&](double h_target) {
        while (std::abs(current.h - h_target) > 1e-14) {
            double step = h_target - current.h;
            if (std::abs(step) > fo.max_energy_step) step = std::copysign(fo.max_energy_step, step);
            const double h_next = current.h + step;
            OrbitSeed seed;
            seed.z = current.z_pc;
            seed.period_guess = current.period;
            bool ok = false;
            double frac = 1.0;
            while (!ok) {
                try {
                    current = correct_orbit_fixed_energy(par, seed, current.h + frac * step, opts);
                    ok = true;
                } catch (const CorrectionFailure&) {
                    frac *= 0.5;
                    if (frac < 1.0 / 64.0) throw;
                }
            }
            (void)h_next;
        }
        return current;
    };

    std::vector<LyapunovOrbit> members;
    members.reserve(grid.size());
    for (double h : grid) members.push_back(walk_to(h));
    return OrbitFamily(which, par.mu, std::move(members));
}

}  // namespace p3bp
