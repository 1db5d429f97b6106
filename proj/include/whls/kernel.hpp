#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "whls/grid.hpp"
#include "whls/params.hpp"

namespace whls {

struct KernelSpec {
    HlsParams params;
    DerivedExponents derived;
};

inline KernelSpec make_kernel_spec(const HlsParams& P) {
    const ValidityReport v = validate(P);
    if (!v.valid) {
        std::string msg = "make_kernel_spec: invalid parameters:";
        for (const auto& s : v.violations) msg += " [" + s + "]";
        throw invalid_input(msg);
    }
    return KernelSpec{P, derive_exponents(P)};
}

namespace quad {

struct GaussRule {
    const double* x; // nodes on [-1, 1]
    const double* w;
    int n;
};

inline GaussRule gauss4() {
    static const double x[4] = {-0.8611363115940526, -0.3399810435848563,
                                0.3399810435848563, 0.8611363115940526};
    static const double w[4] = {0.3478548451374538, 0.6521451548625461,
                                0.6521451548625461, 0.3478548451374538};
    return {x, w, 4};
}

inline GaussRule gauss5() {
    static const double x[5] = {-0.9061798459386640, -0.5384693101056831, 0.0,
                                0.5384693101056831, 0.9061798459386640};
    static const double w[5] = {0.2369268850561891, 0.4786286704993665,
                                0.5688888888888889, 0.4786286704993665,
                                0.2369268850561891};
    return {x, w, 5};
}

inline GaussRule gauss8() {
    static const double x[8] = {-0.9602898564975363, -0.7966664774136267,
                                -0.5255324099163290, -0.1834346424956498,
                                0.1834346424956498,  0.5255324099163290,
                                0.7966664774136267,  0.9602898564975363};
    static const double w[8] = {0.1012285362903763, 0.2223810344533745,
                                0.3137066458778873, 0.3626837833783620,
                                0.3626837833783620, 0.3137066458778873,
                                0.2223810344533745, 0.1012285362903763};
    return {x, w, 8};
}

// integral of x^c over [lo, hi]; lo may be 0 when c > -1
inline double power_integral(double lo, double hi, double c) {
    if (lo == 0.0 && !(c > -1.0))
        throw invalid_input("power_integral: divergent at 0");
    if (c == -1.0) return std::log(hi / lo);
    return (std::pow(hi, c + 1.0) - std::pow(lo, c + 1.0)) / (c + 1.0);
}

// centroid of [lo, hi] under the weight x^c
inline double power_centroid(double lo, double hi, double c) {
    return power_integral(lo, hi, c + 1.0) / power_integral(lo, hi, c);
}

struct Nodes {
    std::array<double, 16> x{};
    std::array<double, 16> w{};
    int n = 0;
};

// nodes/weights so that  sum w_i f(x_i)  ~  integral of x^c f(x) over [lo, hi].
// For lo = 0 with fractional c the power factor is absorbed exactly by the
// substitution u = x^{c+1}.
inline Nodes power_weighted_nodes(double lo, double hi, double c,
                                  const GaussRule& g) {
    Nodes out;
    out.n = g.n;
    if (lo > 0.0 || c == 0.0) {
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int i = 0; i < g.n; ++i) {
            const double x = mid + half * g.x[i];
            out.x[i] = x;
            out.w[i] = g.w[i] * half * (c == 0.0 ? 1.0 : std::pow(x, c));
        }
    } else {
        if (!(c > -1.0)) throw invalid_input("power_weighted_nodes: divergent at 0");
        const double e = c + 1.0;
        const double uHi = std::pow(hi, e);
        const double half = 0.5 * uHi;
        for (int i = 0; i < g.n; ++i) {
            const double u = half * (1.0 + g.x[i]);
            out.x[i] = std::pow(u, 1.0 / e);
            out.w[i] = g.w[i] * half / e;
        }
    }
    return out;
}

} // namespace quad

// Angular average of |x-y|^{-lambda} over the sphere of radius a in R^dim
// against the point at prime-distance s, perp-distance t:
//   A(a,s,t) = integral over S^{dim-1} of (a^2 - 2 a s cos(th) + s^2 + t^2)^{-lambda/2}
inline double angular_kernel(double a, double s, double t, int dim, double lambda) {
    if (!(lambda > 0.0)) throw invalid_input("angular_kernel: lambda must be > 0");
    if (a == s && t == 0.0)
        throw invalid_input("angular_kernel: singular input (a = s, t = 0)");
    const double e = -0.5 * lambda;
    if (dim == 1)
        return std::pow((a - s) * (a - s) + t * t, e) +
               std::pow((a + s) * (a + s) + t * t, e);
    if (dim != 2) throw invalid_input("angular_kernel: dim must be 1 or 2");
    const double c0 = a * a + s * s + t * t;
    const double b = 2.0 * a * s;
    if (b == 0.0) return 2.0 * std::numbers::pi * std::pow(c0, e);
    // dyadic panels toward th = 0, graded by how close the kernel gets to
    // its minimum distance
    const double ratio = (c0 - b) / (c0 + b);
    int panels = 4;
    if (ratio < 1e-1) panels = 8;
    if (ratio < 1e-3) panels = 14;
    if (ratio < 1e-6) panels = 20;
    const auto g = quad::gauss8();
    double total = 0.0;
    double hi = std::numbers::pi;
    for (int pnl = 0; pnl < panels; ++pnl) {
        const double lo = (pnl == panels - 1) ? 0.0 : hi * 0.5;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        double acc = 0.0;
        for (int i = 0; i < g.n; ++i) {
            const double th = mid + half * g.x[i];
            acc += g.w[i] * std::pow(c0 - b * std::cos(th), e);
        }
        total += acc * half;
        hi = lo;
    }
    return 2.0 * total;
}

struct AssemblyDiagnostics {
    std::int64_t totalEntries = 0;
    std::int64_t refinedEntries = 0;
    std::int64_t closedFormEntries = 0;
    double minCellDistance = 0.0;
};

/// Dense matrix realization of the extension operator E.  Row (i,j) of the
/// output bi-radial grid, column m of the input radial grid; the input-cell
/// integral (including the |x|^{-alpha} weight) and the perp weight
/// |y''|^{-beta} are folded into the entries, so apply_extension is a plain
/// matrix-vector product.
struct DiscreteOperator {
    KernelSpec spec;
    RadialGrid inGrid;
    RadialGrid outPrime;
    RadialGrid outPerp; // empty when k = 0
    std::vector<double> matrix; // [(i * cols + j) * inCells + m]
    AssemblyDiagnostics diag;

    int outCols() const { return outPerp.empty() ? 1 : outPerp.cells(); }
    int outRows() const { return outPrime.cells(); }
    int inCells() const { return inGrid.cells(); }
};

namespace detail {

// integral over the input cell of s^{d-1-alpha} A(a,s,t) ds, for a fixed a, t.
// Requires t > 0 or no overlap between a and the cell.
inline double input_cell_integral(double a, double t, double sLo, double sHi,
                                  int d, double lambda, double alpha) {
    const auto nodes = quad::power_weighted_nodes(sLo, sHi, double(d - 1) - alpha,
                                                  quad::gauss4());
    double acc = 0.0;
    for (int i = 0; i < nodes.n; ++i)
        acc += nodes.w[i] * angular_kernel(a, nodes.x[i], t, d, lambda);
    return acc;
}

// Same but for d = 1, t = 0 and a inside [sLo, sHi]: the |a-s|^{-lambda}
// branch is integrated through the substitution u = |a-s| so no node ever
// hits the singularity.
inline double input_cell_integral_diag1(double a, double sLo, double sHi,
                                        double lambda, double alpha) {
    double acc = 0.0;
    const auto g = quad::gauss4();
    auto sideIntegral = [&](double w, bool rightSide) {
        // integral over u in (0, w) of u^{-lambda} * phi(a +/- u)
        if (w <= 0.0) return 0.0;
        if (!(lambda < 1.0))
            throw invalid_input("build_extension: lambda >= dim on a singular cell");
        const auto nodes = quad::power_weighted_nodes(0.0, w, -lambda, g);
        double s2 = 0.0;
        for (int i = 0; i < nodes.n; ++i) {
            const double s = rightSide ? a + nodes.x[i] : a - nodes.x[i];
            s2 += nodes.w[i] * (alpha == 0.0 ? 1.0 : std::pow(s, -alpha));
        }
        return s2;
    };
    acc += sideIntegral(a - sLo, false);
    acc += sideIntegral(sHi - a, true);
    // the smooth (a+s)^{-lambda} branch
    const auto nodes = quad::power_weighted_nodes(sLo, sHi, -alpha, g);
    for (int i = 0; i < nodes.n; ++i)
        acc += nodes.w[i] * std::pow(a + nodes.x[i], -lambda);
    return acc;
}

// d = 1 with t > 0 and the cell close to a: the (a-s)^2 + t^2 branch has a
// peak of width t that fixed-node rules cannot resolve, so it is integrated
// through u = t sinh(v), which flattens the peak exactly.  The (a+s) branch
// is smooth.
inline double input_cell_integral_d1_t(double a, double t, double sLo,
                                       double sHi, double lambda, double alpha) {
    const auto g = quad::gauss8();
    const double e = -0.5 * lambda;
    double acc = 0.0;
    auto sideIntegral = [&](double u0, double u1, bool rightSide) {
        // integral over u in (u0, u1) of (u^2 + t^2)^{-lambda/2} phi(a -/+ u)
        if (!(u1 > u0)) return;
        const double v0 = std::asinh(u0 / t), v1 = std::asinh(u1 / t);
        // integrand grows like cosh(v)^{1-lambda}; short panels keep it tame
        const int panels = 1 + int((v1 - v0) / 4.0);
        for (int pnl = 0; pnl < panels; ++pnl) {
            const double pl = v0 + (v1 - v0) * pnl / panels;
            const double ph = v0 + (v1 - v0) * (pnl + 1) / panels;
            const double mid = 0.5 * (pl + ph), half = 0.5 * (ph - pl);
            for (int i = 0; i < g.n; ++i) {
                const double v = mid + half * g.x[i];
                const double u = t * std::sinh(v);
                const double s = rightSide ? a + u : a - u;
                const double phi = alpha == 0.0 ? 1.0 : std::pow(s, -alpha);
                acc += g.w[i] * half * t * std::cosh(v) *
                       std::pow(u * u + t * t, e) * phi;
            }
        }
    };
    if (a > sLo) sideIntegral(std::max(0.0, a - sHi), a - sLo, false);
    if (sHi > a) sideIntegral(std::max(0.0, sLo - a), sHi - a, true);
    const auto nodes =
        quad::power_weighted_nodes(sLo, sHi, -alpha, quad::gauss4());
    for (int i = 0; i < nodes.n; ++i) {
        const double ap = a + nodes.x[i];
        acc += nodes.w[i] * std::pow(ap * ap + t * t, e);
    }
    return acc;
}

// Output-cell average (Lebesgue, over the prime shell) of the input-cell
// integral at fixed perp distance t.
inline double prime_avg(double aLo, double aHi, double t, double sLo, double sHi,
                        int d, double lambda, double alpha, bool refine,
                        AssemblyDiagnostics* diag) {
    auto panel = [&](double al, double ah, double sl, double sh) {
        const bool overlap = (ah > sl) && (sh > al);
        const auto an = quad::power_weighted_nodes(al, ah, double(d - 1),
                                                   quad::gauss4());
        double acc = 0.0;
        for (int i = 0; i < an.n; ++i) {
            const double a = an.x[i];
            double v;
            if (d == 1 && t > 0.0 && refine) {
                v = input_cell_integral_d1_t(a, t, sl, sh, lambda, alpha);
                if (diag) ++diag->closedFormEntries;
            } else if (overlap && a > sl && a < sh) {
                if (d == 1 && t == 0.0) {
                    v = input_cell_integral_diag1(a, sl, sh, lambda, alpha);
                    if (diag) ++diag->closedFormEntries;
                } else if (d == 1) {
                    v = input_cell_integral_d1_t(a, t, sl, sh, lambda, alpha);
                } else {
                    // staggered nodes keep s away from a; the log-type
                    // singularity of A_2 is integrable in s
                    const auto sn = quad::power_weighted_nodes(
                        sl, sh, double(d - 1) - alpha, quad::gauss5());
                    v = 0.0;
                    for (int j = 0; j < sn.n; ++j)
                        v += sn.w[j] * angular_kernel(a, sn.x[j], t, d, lambda);
                }
            } else {
                v = input_cell_integral(a, t, sl, sh, d, lambda, alpha);
            }
            acc += an.w[i] * v;
        }
        return acc;
    };
    double total;
    if (refine) {
        const double aMid = 0.5 * (aLo + aHi), sMid = 0.5 * (sLo + sHi);
        total = panel(aLo, aMid, sLo, sMid) + panel(aLo, aMid, sMid, sHi) +
                panel(aMid, aHi, sLo, sMid) + panel(aMid, aHi, sMid, sHi);
    } else {
        total = panel(aLo, aHi, sLo, sHi);
    }
    return total / quad::power_integral(aLo, aHi, double(d - 1));
}

} // namespace detail

inline DiscreteOperator build_extension(const KernelSpec& spec,
                                        const RadialGrid& inGrid,
                                        const RadialGrid& outPrime,
                                        const RadialGrid& outPerp) {
    const HlsParams& P = spec.params;
    const int d = P.d();
    if (inGrid.dim != d || outPrime.dim != d)
        throw invalid_input("build_extension: prime grids must have dim n-k");
    if (P.k == 0) {
        if (!outPerp.empty())
            throw invalid_input("build_extension: k = 0 takes an empty perp grid");
    } else if (outPerp.empty() || outPerp.dim != P.k) {
        throw invalid_input("build_extension: perp grid must have dim k");
    }
    if (P.alpha > 0.0 && inGrid.edges.front() == 0.0 &&
        !(double(d) - P.alpha > 0.0))
        throw invalid_input("build_extension: alpha >= n-k with a zero-reaching cell");
    if (!outPerp.empty() && outPerp.edges.front() == 0.0 &&
        !(double(P.k) - P.beta > 0.0))
        throw invalid_input("build_extension: beta >= k with a zero-reaching perp cell");

    DiscreteOperator op;
    op.spec = spec;
    op.inGrid = inGrid;
    op.outPrime = outPrime;
    op.outPerp = outPerp;
    const int rows = op.outRows(), cols = op.outCols(), nIn = op.inCells();
    op.matrix.assign(size_t(rows) * cols * nIn, 0.0);
    op.diag.totalEntries = std::int64_t(rows) * cols * nIn;
    op.diag.minCellDistance = std::numeric_limits<double>::infinity();

    const double cPerp = outPerp.empty() ? 0.0 : double(P.k - 1) - P.beta;
    const double sk = outPerp.empty() ? 1.0 : unit_sphere_area(P.k);

    // per perp cell: exact t^{k-1-beta} mass, its centroid, and Gauss nodes
    // for the near-singular path
    struct PerpData {
        double mass, centroid;
        std::vector<double> x, w; // nodes of the t^{k-1-beta}-weighted rule
        double lo, width;
    };
    std::vector<PerpData> perp(cols);
    if (!outPerp.empty()) {
        for (int j = 0; j < cols; ++j) {
            const double lo = outPerp.edges[j], hi = outPerp.edges[j + 1];
            perp[j].mass = quad::power_integral(lo, hi, cPerp);
            perp[j].centroid = quad::power_centroid(lo, hi, cPerp);
            perp[j].lo = lo;
            perp[j].width = hi - lo;
            // the integrand picks up a fractional power cusp as t -> 0, so a
            // zero-reaching cell gets panels graded toward its left edge
            std::vector<double> brk{lo};
            if (lo == 0.0)
                brk.insert(brk.end(), {hi / 256, hi / 64, hi / 16, hi / 4});
            brk.push_back(hi);
            for (size_t pnl = 0; pnl + 1 < brk.size(); ++pnl) {
                const auto nodes = quad::power_weighted_nodes(
                    brk[pnl], brk[pnl + 1], cPerp, quad::gauss4());
                for (int gi = 0; gi < nodes.n; ++gi) {
                    perp[j].x.push_back(nodes.x[gi]);
                    perp[j].w.push_back(nodes.w[gi]);
                }
            }
        }
    }

    for (int i = 0; i < rows; ++i) {
        const double aLo = outPrime.edges[i], aHi = outPrime.edges[i + 1];
        for (int m = 0; m < nIn; ++m) {
            const double sLo = inGrid.edges[m], sHi = inGrid.edges[m + 1];
            const double gap = std::max({0.0, sLo - aHi, aLo - sHi});
            const double cw = std::max(aHi - aLo, sHi - sLo);
            if (outPerp.empty()) {
                const bool near = gap < cw;
                if (near) ++op.diag.refinedEntries;
                op.diag.minCellDistance = std::min(op.diag.minCellDistance, gap);
                op.matrix[(size_t(i) * cols) * nIn + m] = detail::prime_avg(
                    aLo, aHi, 0.0, sLo, sHi, d, P.lambda, P.alpha, near, &op.diag);
            } else {
                for (int j = 0; j < cols; ++j) {
                    const PerpData& pd = perp[j];
                    const double dmin = std::hypot(gap, pd.lo);
                    op.diag.minCellDistance =
                        std::min(op.diag.minCellDistance, dmin);
                    const bool near = dmin < cw;
                    // centroid collapse in t needs the cell to be narrow
                    // relative to the kernel distance
                    const bool wide = pd.width > 0.25 * dmin;
                    double acc;
                    if (near || wide) {
                        ++op.diag.refinedEntries;
                        acc = 0.0;
                        for (size_t g = 0; g < pd.x.size(); ++g)
                            acc += pd.w[g] *
                                   detail::prime_avg(aLo, aHi, pd.x[g], sLo,
                                                     sHi, d, P.lambda, P.alpha,
                                                     near, &op.diag);
                    } else {
                        acc = pd.mass * detail::prime_avg(aLo, aHi, pd.centroid,
                                                          sLo, sHi, d, P.lambda,
                                                          P.alpha, false, nullptr);
                    }
                    op.matrix[(size_t(i) * cols + j) * nIn + m] =
                        acc * sk / outPerp.measure[j];
                }
            }
        }
    }
    return op;
}

inline BiRadialFunction apply_extension(const DiscreteOperator& op,
                                        const RadialFunction& f) {
    if (!same_grid(op.inGrid, f.grid))
        throw invalid_input("apply_extension: grid mismatch");
    BiRadialFunction out = make_biradial(op.outPrime, op.outPerp);
    const int cols = op.outCols(), nIn = op.inCells();
    for (int i = 0; i < op.outRows(); ++i)
        for (int j = 0; j < cols; ++j) {
            const double* row = &op.matrix[(size_t(i) * cols + j) * nIn];
            double acc = 0.0;
            for (int m = 0; m < nIn; ++m) acc += row[m] * f.values[m];
            out.at(i, j) = acc;
        }
    return out;
}

inline RadialFunction apply_restriction(const DiscreteOperator& op,
                                        const BiRadialFunction& g) {
    if (!same_grid(op.outPrime, g.prime) ||
        (!op.outPerp.empty() && !same_grid(op.outPerp, g.perp)) ||
        (op.outPerp.empty() != g.perp.empty()))
        throw invalid_input("apply_restriction: grid mismatch");
    const int cols = op.outCols(), nIn = op.inCells();
    RadialFunction out{op.inGrid, std::vector<double>(nIn, 0.0)};
    for (int i = 0; i < op.outRows(); ++i)
        for (int j = 0; j < cols; ++j) {
            const double gm = g.at(i, j) * g.cellMeasure(i, j);
            if (gm == 0.0) continue;
            const double* row = &op.matrix[(size_t(i) * cols + j) * nIn];
            for (int m = 0; m < nIn; ++m) out.values[m] += row[m] * gm;
        }
    for (int m = 0; m < nIn; ++m) out.values[m] /= op.inGrid.measure[m];
    return out;
}

// <E f, g> over R^n, which equals the bilinear functional F(f, g) at
// quadrature accuracy
inline double bilinear(const DiscreteOperator& op, const RadialFunction& f,
                       const BiRadialFunction& g) {
    const BiRadialFunction Ef = apply_extension(op, f);
    double acc = 0.0;
    for (int i = 0; i < Ef.rows(); ++i)
        for (int j = 0; j < Ef.cols(); ++j)
            acc += Ef.at(i, j) * g.at(i, j) * g.cellMeasure(i, j);
    return acc;
}

inline double inner_product(const BiRadialFunction& a, const BiRadialFunction& b) {
    double acc = 0.0;
    for (int i = 0; i < a.rows(); ++i)
        for (int j = 0; j < a.cols(); ++j)
            acc += a.at(i, j) * b.at(i, j) * a.cellMeasure(i, j);
    return acc;
}

inline double inner_product(const RadialFunction& a, const RadialFunction& b) {
    double acc = 0.0;
    for (int i = 0; i < a.grid.cells(); ++i)
        acc += a.values[i] * b.values[i] * a.grid.measure[i];
    return acc;
}

} // namespace whls
