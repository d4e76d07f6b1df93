#include "p3bp/ode.hpp"

namespace p3bp::ode {

Vec4 Trajectory::at(double t) const {
    if (t_.empty()) throw std::logic_error("empty trajectory");
    if (t < t_.front() - 1e-12 || t > t_.back() + 1e-12)
        throw std::out_of_range("dense query outside trajectory span");
    t = std::clamp(t, t_.front(), t_.back());
    const auto it = std::upper_bound(t_.begin(), t_.end(), t);
    std::size_t i = (it == t_.begin()) ? 0 : static_cast<std::size_t>(it - t_.begin()) - 1;
    if (i + 1 >= t_.size()) i = t_.size() - 2;
    // re-integrate in the recording direction so accuracy matches the original run
    if (forward_) {
        Vec4 x = x_[i];
        if (t == t_[i]) return x;
        advance<4>(rhs_, x, t_[i], t, opts_);
        return x;
    }
    Vec4 x = x_[i + 1];
    if (t == t_[i + 1]) return x;
    advance<4>(rhs_, x, t_[i + 1], t, opts_);
    return x;
}

SegmentTable record_segments(const SystemParams& par, const Vec4& z0, double t0, double t1, double dt_node,
                             const Opts& o) {
    if (!(t1 > t0)) throw std::invalid_argument("record_segments expects t1 > t0");
    const int n = std::max(1, static_cast<int>(std::ceil((t1 - t0) / dt_node)));
    SegmentTable tab;
    tab.t.resize(n + 1);
    for (int i = 0; i <= n; ++i) tab.t[i] = t0 + (t1 - t0) * double(i) / n;
    tab.z.resize(n + 1);
    tab.stm.resize(n);
    tab.z[0] = z0;
    VariationalRhs rhs{par};
    for (int i = 0; i < n; ++i) {
        VecN<20> x{};
        for (int k = 0; k < 4; ++k) x[k] = tab.z[i][k];
        for (int k = 0; k < 4; ++k) x[4 + 5 * k] = 1.0;
        advance<20>(rhs, x, tab.t[i], tab.t[i + 1], o);
        tab.z[i + 1] = {x[0], x[1], x[2], x[3]};
        for (int r = 0; r < 4; ++r)
            for (int c = 0; c < 4; ++c) tab.stm[i][r][c] = x[4 + 4 * r + c];
    }
    return tab;
}

Mat4 state_transition(const SystemParams& par, Vec4& z0, double t0, double t1, const Opts& o) {
    VariationalRhs rhs{par};
    VecN<20> x{};
    for (int k = 0; k < 4; ++k) x[k] = z0[k];
    for (int k = 0; k < 4; ++k) x[4 + 5 * k] = 1.0;
    advance<20>(rhs, x, t0, t1, o);
    z0 = {x[0], x[1], x[2], x[3]};
    Mat4 m;
    for (int r = 0; r < 4; ++r)
        for (int c = 0; c < 4; ++c) m[r][c] = x[4 + 4 * r + c];
    return m;
}

Mat4 mat_mul(const Mat4& a, const Mat4& b) {
    Mat4 c{};
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 4; ++j) {
            double s = 0.0;
            for (int k = 0; k < 4; ++k) s += a[i][k] * b[k][j];
            c[i][j] = s;
        }
    return c;
}

Vec4 mat_vec(const Mat4& a, const Vec4& v) {
    Vec4 r{};
    for (int i = 0; i < 4; ++i) r[i] = a[i][0] * v[0] + a[i][1] * v[1] + a[i][2] * v[2] + a[i][3] * v[3];
    return r;
}

Vec4 vec_mat(const Vec4& w, const Mat4& a) {
    Vec4 r{};
    for (int j = 0; j < 4; ++j) r[j] = w[0] * a[0][j] + w[1] * a[1][j] + w[2] * a[2][j] + w[3] * a[3][j];
    return r;
}

Mat4 mat_identity() {
    Mat4 m{};
    for (int i = 0; i < 4; ++i) m[i][i] = 1.0;
    return m;
}

double mat_det(const Mat4& m) {
    // expansion by 2x2 complements
    const double s0 = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    const double s1 = m[0][0] * m[1][2] - m[0][2] * m[1][0];
    const double s2 = m[0][0] * m[1][3] - m[0][3] * m[1][0];
    const double s3 = m[0][1] * m[1][2] - m[0][2] * m[1][1];
    const double s4 = m[0][1] * m[1][3] - m[0][3] * m[1][1];
    const double s5 = m[0][2] * m[1][3] - m[0][3] * m[1][2];
    const double c5 = m[2][2] * m[3][3] - m[2][3] * m[3][2];
    const double c4 = m[2][1] * m[3][3] - m[2][3] * m[3][1];
    const double c3 = m[2][1] * m[3][2] - m[2][2] * m[3][1];
    const double c2 = m[2][0] * m[3][3] - m[2][3] * m[3][0];
    const double c1 = m[2][0] * m[3][2] - m[2][2] * m[3][0];
    const double c0 = m[2][0] * m[3][1] - m[2][1] * m[3][0];
    return s0 * c5 - s1 * c4 + s2 * c3 + s3 * c2 - s4 * c1 + s5 * c0;
}

}  // namespace p3bp::ode
