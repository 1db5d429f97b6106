#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <vector>

#include "whls/common.hpp"

namespace whls {

/// Log-spaced discretization of the radius in R^dim.  Cell i covers
/// (edges[i], edges[i+1]); measure[i] is the Lebesgue measure of the
/// corresponding spherical shell.
struct RadialGrid {
    int dim = 1;
    std::vector<double> edges;   // size cells()+1, edges[0] may be 0
    std::vector<double> radii;   // cell centers
    std::vector<double> measure; // shell measures

    int cells() const { return int(radii.size()); }
    bool empty() const { return radii.empty(); }
    double rMax() const { return edges.back(); }
};

inline double shell_measure(int dim, double lo, double hi) {
    return unit_sphere_area(dim) / dim * (std::pow(hi, dim) - std::pow(lo, dim));
}

inline RadialGrid grid_from_edges(int dim, std::vector<double> edges) {
    RadialGrid g;
    g.dim = dim;
    g.edges = std::move(edges);
    const int M = int(g.edges.size()) - 1;
    g.radii.resize(M);
    g.measure.resize(M);
    for (int i = 0; i < M; ++i) {
        const double lo = g.edges[i], hi = g.edges[i + 1];
        if (!(hi > lo) || lo < 0.0)
            throw invalid_input("grid_from_edges: edges must be increasing and >= 0");
        // geometric mean keeps centers well placed on log cells; the zero cell
        // falls back to the midpoint
        g.radii[i] = (lo > 0.0) ? std::sqrt(lo * hi) : 0.5 * hi;
        g.measure[i] = shell_measure(dim, lo, hi);
    }
    return g;
}

inline RadialGrid make_log_grid(int dim, double rMin, double rMax, int M,
                                bool includeZeroCell) {
    if (dim < 1 || dim > 2) throw invalid_input("make_log_grid: dim must be 1 or 2");
    if (M < 8) throw invalid_input("make_log_grid: M must be >= 8");
    if (!(rMin > 0.0) || !(rMax > rMin))
        throw invalid_input("make_log_grid: need 0 < rMin < rMax");
    std::vector<double> edges;
    edges.reserve(M + 2);
    if (includeZeroCell) edges.push_back(0.0);
    const double step = std::log(rMax / rMin) / M;
    for (int i = 0; i <= M; ++i) edges.push_back(rMin * std::exp(step * i));
    edges.back() = rMax;
    return grid_from_edges(dim, std::move(edges));
}

// All cells carry the same measure; rearrangement on such a grid is a sort.
inline RadialGrid make_equal_measure_grid(int dim, double rMax, int M) {
    if (M < 1) throw invalid_input("make_equal_measure_grid: M must be >= 1");
    std::vector<double> edges(M + 1);
    for (int i = 0; i <= M; ++i)
        edges[i] = rMax * std::pow(double(i) / M, 1.0 / dim);
    edges[0] = 0.0;
    edges[M] = rMax;
    return grid_from_edges(dim, std::move(edges));
}

inline RadialGrid scale_grid(const RadialGrid& g, double s) {
    if (!(s > 0.0)) throw invalid_input("scale_grid: s must be > 0");
    std::vector<double> edges(g.edges);
    for (double& e : edges) e *= s;
    return grid_from_edges(g.dim, std::move(edges));
}

inline bool same_grid(const RadialGrid& a, const RadialGrid& b, double tol = 1e-12) {
    if (a.dim != b.dim || a.cells() != b.cells()) return false;
    for (size_t i = 0; i < a.edges.size(); ++i)
        if (!approx_rel(a.edges[i], b.edges[i], tol)) return false;
    return true;
}

/// Radially symmetric function on R^dim, piecewise constant on shells,
/// zero beyond rMax.
struct RadialFunction {
    RadialGrid grid;
    std::vector<double> values;

    RadialFunction() = default;
    RadialFunction(RadialGrid g, std::vector<double> v)
        : grid(std::move(g)), values(std::move(v)) {
        if (int(values.size()) != grid.cells())
            throw invalid_input("RadialFunction: value/cell count mismatch");
    }
};

/// g(y) = G(|y'|, |y''|) on a product of radial grids.  For k = 0 the perp
/// grid is empty and the function degenerates to a radial one on R^{n}.
struct BiRadialFunction {
    RadialGrid prime;
    RadialGrid perp;              // may be empty (k = 0)
    std::vector<double> values;   // row-major, [i * cols() + j]

    int cols() const { return perp.empty() ? 1 : perp.cells(); }
    int rows() const { return prime.cells(); }
    double& at(int i, int j) { return values[size_t(i) * cols() + j]; }
    double at(int i, int j) const { return values[size_t(i) * cols() + j]; }
    double cellMeasure(int i, int j) const {
        return prime.measure[i] * (perp.empty() ? 1.0 : perp.measure[j]);
    }
};

inline BiRadialFunction make_biradial(RadialGrid prime, RadialGrid perp) {
    BiRadialFunction g;
    g.prime = std::move(prime);
    g.perp = std::move(perp);
    g.values.assign(size_t(g.rows()) * g.cols(), 0.0);
    return g;
}

/// Uniform 1-d grid on [lo, hi]; general, not radially symmetric.
struct LineFunction {
    double lo = 0.0, hi = 1.0;
    std::vector<double> values;

    double cellWidth() const { return (hi - lo) / double(values.size()); }
};

template <class F>
inline void check_nonneg(const F& f, const char* who) {
    for (double v : f.values)
        if (v < 0.0) throw invalid_input(std::string(who) + ": negative input");
}

inline double lp_norm(const RadialFunction& f, double p) {
    if (!(p >= 1.0)) throw invalid_input("lp_norm: p must be >= 1");
    double s = 0.0;
    for (int i = 0; i < f.grid.cells(); ++i)
        s += std::pow(std::abs(f.values[i]), p) * f.grid.measure[i];
    return std::pow(s, 1.0 / p);
}

inline double lp_norm(const BiRadialFunction& g, double p) {
    if (!(p >= 1.0)) throw invalid_input("lp_norm: p must be >= 1");
    double s = 0.0;
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j)
            s += std::pow(std::abs(g.at(i, j)), p) * g.cellMeasure(i, j);
    return std::pow(s, 1.0 / p);
}

inline double lp_norm(const LineFunction& f, double p) {
    if (!(p >= 1.0)) throw invalid_input("lp_norm: p must be >= 1");
    double s = 0.0;
    for (double v : f.values) s += std::pow(std::abs(v), p);
    return std::pow(s * f.cellWidth(), 1.0 / p);
}

/// Value of the piecewise-constant radial function at radius rho (0 outside
/// the grid's support).
inline double value_at(const RadialFunction& f, double rho) {
    const auto& e = f.grid.edges;
    if (rho < e.front() || rho >= e.back()) return 0.0;
    const auto it = std::upper_bound(e.begin(), e.end(), rho);
    const int i = int(it - e.begin()) - 1;
    return f.values[std::min(i, f.grid.cells() - 1)];
}

inline RadialFunction resample(const RadialFunction& f, const RadialGrid& g) {
    RadialFunction out{g, std::vector<double>(g.cells(), 0.0)};
    for (int i = 0; i < g.cells(); ++i) out.values[i] = value_at(f, g.radii[i]);
    return out;
}

namespace detail {
inline void power_values(std::vector<double>& v, double e) {
    if (!(e > 0.0)) throw invalid_input("pointwise_power: exponent must be > 0");
    const bool fractional = (e != std::floor(e));
    for (double& x : v) {
        if (fractional && x < 0.0)
            throw invalid_input("pointwise_power: negative value with fractional exponent");
        x = (e == 1.0) ? x : std::pow(x, e);
    }
}
} // namespace detail

template <class F>
inline F pointwise_power(F f, double exponent) {
    detail::power_values(f.values, exponent);
    return f;
}

} // namespace whls
