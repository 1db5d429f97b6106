#pragma once

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace whls {

// Thrown when inputs violate a documented precondition.
class invalid_input : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

// Thrown when a requested quantity has no admissible solution.
class no_solution : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// Surface area of the unit sphere S^{dim-1} in R^dim.
inline double unit_sphere_area(int dim) {
    if (dim < 1) throw invalid_input("unit_sphere_area: dim must be >= 1");
    // |S^{d-1}| = 2 pi^{d/2} / Gamma(d/2)
    return 2.0 * std::pow(std::numbers::pi, 0.5 * dim) / std::tgamma(0.5 * dim);
}

// Volume of the unit ball in R^dim.
inline double unit_ball_volume(int dim) {
    return unit_sphere_area(dim) / dim;
}

inline bool approx_rel(double a, double b, double tol) {
    return std::abs(a - b) <= tol * std::max({1.0, std::abs(a), std::abs(b)});
}

} // namespace whls
