#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "whls/grid.hpp"
#include "whls/params.hpp"

namespace whls {

namespace detail {

// Builds the radial grid whose shells carry exactly the given measures, in
// order; the result is equimeasurable with the input at cell granularity.
inline RadialGrid grid_from_measures(int dim, const std::vector<double>& measures) {
    std::vector<double> edges(measures.size() + 1);
    edges[0] = 0.0;
    const double c = dim / unit_sphere_area(dim);
    double cum = 0.0;
    for (size_t i = 0; i < measures.size(); ++i) {
        cum += measures[i];
        edges[i + 1] = std::pow(cum * c, 1.0 / dim);
    }
    return grid_from_edges(dim, std::move(edges));
}

struct Chunk {
    double value, measure;
    int origIndex;
};

inline RadialFunction rearranged_from_chunks(int dim, std::vector<Chunk> chunks) {
    std::stable_sort(chunks.begin(), chunks.end(), [](const Chunk& a, const Chunk& b) {
        if (a.value != b.value) return a.value > b.value;
        return a.origIndex < b.origIndex; // deterministic tie-break
    });
    std::vector<double> measures(chunks.size()), values(chunks.size());
    for (size_t i = 0; i < chunks.size(); ++i) {
        measures[i] = chunks[i].measure;
        values[i] = chunks[i].value;
    }
    return RadialFunction{grid_from_measures(dim, measures), std::move(values)};
}

} // namespace detail

/// Symmetric decreasing rearrangement.  The output lives on the radial grid
/// whose shell boundaries sit at the cumulative measures of the sorted cells,
/// so every Lp norm is preserved exactly at cell granularity.
inline RadialFunction symm_decr_rearrange(const RadialFunction& f) {
    check_nonneg(f, "symm_decr_rearrange");
    std::vector<detail::Chunk> chunks(f.grid.cells());
    for (int i = 0; i < f.grid.cells(); ++i)
        chunks[i] = {f.values[i], f.grid.measure[i], i};
    return detail::rearranged_from_chunks(f.grid.dim, std::move(chunks));
}

inline RadialFunction symm_decr_rearrange(const LineFunction& f) {
    check_nonneg(f, "symm_decr_rearrange");
    const double w = f.cellWidth();
    std::vector<detail::Chunk> chunks(f.values.size());
    for (size_t i = 0; i < f.values.size(); ++i)
        chunks[i] = {f.values[i], w, int(i)};
    return detail::rearranged_from_chunks(1, std::move(chunks));
}

/// Per-slice rearrangement in y' at each fixed |y''|.  Requires an
/// equal-measure prime grid so each slice's rearrangement is a permutation
/// of its cells (hence exactly norm-preserving on the same grid).
inline BiRadialFunction slice_rearrange(const BiRadialFunction& g) {
    check_nonneg(g, "slice_rearrange");
    const auto& m = g.prime.measure;
    for (size_t i = 1; i < m.size(); ++i)
        if (!approx_rel(m[i], m[0], 1e-12))
            throw invalid_input("slice_rearrange: prime grid must be equal-measure");
    BiRadialFunction out = g;
    std::vector<double> col(g.rows());
    for (int j = 0; j < g.cols(); ++j) {
        for (int i = 0; i < g.rows(); ++i) col[i] = g.at(i, j);
        std::stable_sort(col.begin(), col.end(), std::greater<double>());
        for (int i = 0; i < g.rows(); ++i) out.at(i, j) = col[i];
    }
    return out;
}

/// Slice-wise rearrangement of a family of line functions on a common
/// symmetric interval: each slice becomes symmetric-decreasing about 0 by a
/// permutation of its cells (largest values at the center, outward).
inline std::vector<LineFunction> slice_rearrange(std::vector<LineFunction> slices) {
    for (auto& f : slices) {
        check_nonneg(f, "slice_rearrange");
        if (!approx_rel(-f.lo, f.hi, 1e-12))
            throw invalid_input("slice_rearrange: interval must be symmetric about 0");
        std::vector<double> sorted = f.values;
        std::stable_sort(sorted.begin(), sorted.end(), std::greater<double>());
        const int M = int(sorted.size());
        // fill from the central cell(s) outward, alternating sides
        std::vector<double> out(M);
        int left = (M - 1) / 2, right = M / 2;
        out[left] = sorted[0];
        if (right != left) out[right] = sorted[1];
        int idx = (right != left) ? 2 : 1;
        while (left > 0) {
            out[--left] = sorted[idx++];
            if (right < M - 1) out[++right] = sorted[idx++];
        }
        f.values = std::move(out);
    }
    return slices;
}

namespace detail {

inline double interval_overlap(double lo, double hi, double a, double b) {
    return std::max(0.0, std::min(hi, b) - std::max(lo, a));
}

// integral of a radial dim-1 function over [a, b] on the line
inline double line_ball_integral(const RadialFunction& f, double a, double b) {
    double acc = 0.0;
    for (int i = 0; i < f.grid.cells(); ++i) {
        const double lo = f.grid.edges[i], hi = f.grid.edges[i + 1];
        acc += f.values[i] * (interval_overlap(lo, hi, a, b) +
                              interval_overlap(-hi, -lo, a, b));
    }
    return acc;
}

// area of the intersection of two disks with radii r1, r2 at center
// distance c
inline double disk_intersection_area(double r1, double r2, double c) {
    const double pi = std::numbers::pi;
    if (c >= r1 + r2) return 0.0;
    const double rm = std::min(r1, r2);
    if (c <= std::abs(r1 - r2)) return pi * rm * rm;
    const double c2 = c * c, a2 = r1 * r1, b2 = r2 * r2;
    const double t1 = std::acos(std::clamp((c2 + a2 - b2) / (2.0 * c * r1), -1.0, 1.0));
    const double t2 = std::acos(std::clamp((c2 + b2 - a2) / (2.0 * c * r2), -1.0, 1.0));
    const double s = (-c + r1 + r2) * (c + r1 - r2) * (c - r1 + r2) * (c + r1 + r2);
    return a2 * t1 + b2 * t2 - 0.5 * std::sqrt(std::max(0.0, s));
}

// integral of a radial function over the ball B_rho(x), |x| = c
inline double ball_integral(const RadialFunction& f, double c, double rho) {
    if (f.grid.dim == 1) return line_ball_integral(f, c - rho, c + rho);
    double acc = 0.0;
    for (int i = 0; i < f.grid.cells(); ++i) {
        const double lo = f.grid.edges[i], hi = f.grid.edges[i + 1];
        acc += f.values[i] * (disk_intersection_area(rho, hi, c) -
                              disk_intersection_area(rho, lo, c));
    }
    return acc;
}

} // namespace detail

struct StarNormResult {
    double value = 0.0;
    double argCenter = 0.0;
    double argRadius = 0.0;
};

/// Morrey-type quantity sup over balls of rho^{-(n-k)/p'} * integral of f
/// over B_rho(x).  The supremum is searched on the lattice of grid-derived
/// centers and radii; this under-estimates the continuum supremum by the
/// modulus of the piecewise-constant representation.
inline StarNormResult star_norm(const RadialFunction& f, const HlsParams& params) {
    check_nonneg(f, "star_norm");
    const double pPrime = params.p / (params.p - 1.0);
    const double expo = -double(params.d()) / pPrime;
    std::vector<double> centers{0.0};
    centers.insert(centers.end(), f.grid.radii.begin(), f.grid.radii.end());
    StarNormResult best;
    for (double c : centers)
        for (double rho : f.grid.edges) {
            if (!(rho > 0.0)) continue;
            const double v = std::pow(rho, expo) * detail::ball_integral(f, c, rho);
            if (v > best.value) best = {v, c, rho};
        }
    return best;
}

/// Hardy--Littlewood maximal function at cell centers, dim 1 only; the sup
/// over radii is searched at the grid-edge offsets plus the cell value
/// itself (the r -> 0 limit at a Lebesgue point).
inline RadialFunction maximal_function(const RadialFunction& f) {
    check_nonneg(f, "maximal_function");
    if (f.grid.dim != 1)
        throw invalid_input("maximal_function: only dim 1 supported");
    RadialFunction out = f;
    for (int i = 0; i < f.grid.cells(); ++i) {
        const double z = f.grid.radii[i];
        double best = f.values[i];
        for (double e : f.grid.edges)
            for (double r : {std::abs(z - e), z + e}) {
                if (!(r > 0.0)) continue;
                best = std::max(best,
                                detail::line_ball_integral(f, z - r, z + r) / (2.0 * r));
            }
        out.values[i] = best;
    }
    return out;
}

inline LineFunction maximal_function(const LineFunction& f) {
    check_nonneg(f, "maximal_function");
    LineFunction out = f;
    const double w = f.cellWidth();
    const int M = int(f.values.size());
    auto integral = [&](double a, double b) {
        double acc = 0.0;
        for (int i = 0; i < M; ++i)
            acc += f.values[i] * detail::interval_overlap(f.lo + i * w,
                                                          f.lo + (i + 1) * w, a, b);
        return acc;
    };
    for (int i = 0; i < M; ++i) {
        const double z = f.lo + (i + 0.5) * w;
        double best = f.values[i];
        for (int e = 0; e <= M; ++e) {
            const double edge = f.lo + e * w;
            const double r = std::abs(z - edge);
            if (!(r > 0.0)) continue;
            best = std::max(best, integral(z - r, z + r) / (2.0 * r));
        }
        out.values[i] = best;
    }
    return out;
}

} // namespace whls
