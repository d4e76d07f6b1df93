#ifndef P3BP_SPLINE_HPP
#define P3BP_SPLINE_HPP

#include <vector>

namespace p3bp {

// Natural cubic spline through (x_i, y_i), x strictly increasing.
class CubicSpline {
public:
    CubicSpline() = default;
    CubicSpline(std::vector<double> x, std::vector<double> y);

    double operator()(double x) const;
    double derivative(double x) const;
    double second_derivative(double x) const;

    double x_min() const { return x_.front(); }
    double x_max() const { return x_.back(); }
    bool empty() const { return x_.empty(); }

private:
    std::size_t locate(double x) const;
    std::vector<double> x_, y_, m_;  // m_ = second derivatives at nodes
};

}  // namespace p3bp

#endif
