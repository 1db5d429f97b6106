#pragma once

#include <array>
#include <cmath>
#include <deque>
#include <string>
#include <vector>

#include "whls/kernel.hpp"

namespace whls {

enum class IterationStatus { Converged, MaxIterations, Stalled };

struct ConstantEstimate {
    double nHat = 0.0;          // estimate of the sharp constant
    RadialFunction fSharp;      // unit L^p norm
    BiRadialFunction gSharp;    // unit L^r norm
    double elResidual = 0.0;
    int iterations = 0;
    std::vector<double> history;
    IterationStatus status = IterationStatus::MaxIterations;
};

namespace detail {

inline RadialFunction normalize_lp(RadialFunction f, double p) {
    const double nrm = lp_norm(f, p);
    if (!(nrm > 0.0)) throw invalid_input("power_iterate: zero function");
    for (double& v : f.values) v /= nrm;
    return f;
}

inline BiRadialFunction normalize_lp(BiRadialFunction g, double p) {
    const double nrm = lp_norm(g, p);
    if (!(nrm > 0.0)) throw invalid_input("power_iterate: zero function");
    for (double& v : g.values) v /= nrm;
    return g;
}

// Anderson mixing over the last few fixed-point steps: finds the residual-
// minimizing affine combination of stored (x, G(x)) pairs in the measure-
// weighted l2 norm.  The caller decides whether to adopt the candidate.
class StepMixer {
  public:
    explicit StepMixer(const std::vector<double>& mu) : mu_(mu) {}

    void push(const std::vector<double>& x, const std::vector<double>& gx) {
        xs_.push_back(x);
        gs_.push_back(gx);
        if (int(xs_.size()) > kDepth + 1) {
            xs_.pop_front();
            gs_.pop_front();
        }
    }

    bool candidate(std::vector<double>& out) const {
        const int K = int(xs_.size());
        if (K < 3) return false;
        const size_t N = xs_[0].size();
        const int nv = K - 1;
        std::vector<std::vector<double>> res(K, std::vector<double>(N));
        for (int j = 0; j < K; ++j)
            for (size_t i = 0; i < N; ++i) res[j][i] = gs_[j][i] - xs_[j][i];
        std::vector<std::vector<double>> dif(nv, std::vector<double>(N));
        for (int j = 0; j < nv; ++j)
            for (size_t i = 0; i < N; ++i)
                dif[j][i] = res[j][i] - res[K - 1][i];

        std::array<std::array<double, kDepth>, kDepth> A{};
        std::array<double, kDepth> b{};
        for (int a1 = 0; a1 < nv; ++a1) {
            for (int a2 = 0; a2 < nv; ++a2) {
                double s = 0.0;
                for (size_t i = 0; i < N; ++i)
                    s += mu_[i] * dif[a1][i] * dif[a2][i];
                A[a1][a2] = s;
            }
            double s = 0.0;
            for (size_t i = 0; i < N; ++i)
                s += mu_[i] * dif[a1][i] * res[K - 1][i];
            b[a1] = -s;
            A[a1][a1] *= 1.0 + 1e-10;
        }
        std::array<double, kDepth> th{};
        if (!solve(A, b, th, nv)) return false;

        out.assign(N, 0.0);
        for (size_t i = 0; i < N; ++i) {
            double v = gs_[K - 1][i];
            for (int j = 0; j < nv; ++j) v += th[j] * (gs_[j][i] - gs_[K - 1][i]);
            out[i] = v > 0.0 ? v : 0.0;
        }
        return true;
    }

  private:
    static constexpr int kDepth = 4;

    static bool solve(std::array<std::array<double, kDepth>, kDepth>& A,
                      std::array<double, kDepth>& b,
                      std::array<double, kDepth>& th, int n) {
        for (int c = 0; c < n; ++c) {
            int piv = c;
            for (int r = c + 1; r < n; ++r)
                if (std::abs(A[r][c]) > std::abs(A[piv][c])) piv = r;
            if (!(std::abs(A[piv][c]) > 0.0)) return false;
            std::swap(A[c], A[piv]);
            std::swap(b[c], b[piv]);
            for (int r = c + 1; r < n; ++r) {
                const double f = A[r][c] / A[c][c];
                for (int cc = c; cc < n; ++cc) A[r][cc] -= f * A[c][cc];
                b[r] -= f * b[c];
            }
        }
        for (int c = n - 1; c >= 0; --c) {
            double s = b[c];
            for (int cc = c + 1; cc < n; ++cc) s -= A[c][cc] * th[cc];
            th[c] = s / A[c][c];
        }
        return true;
    }

    std::deque<std::vector<double>> xs_, gs_;
    const std::vector<double>& mu_;
};

} // namespace detail

/// Residual of the Euler--Lagrange integral system for the pair (u, v):
///   u = c1 R[v^kappa],  v = c2 E[u^theta]
/// with the scalar multipliers fitted by least squares.  Also checks the
/// critical exponent identity on (kappa, theta).
inline double el_residual(const DiscreteOperator& op, const RadialFunction& u,
                          const BiRadialFunction& v) {
    const HlsParams& P = op.spec.params;
    const DerivedExponents& D = op.spec.derived;
    if (!(lp_norm(u, 1.0) > 0.0) || !(lp_norm(v, 1.0) > 0.0))
        throw invalid_input("el_residual: zero input");

    const double lhs = (double(P.d()) / P.n) / (D.theta + 1.0) + 1.0 / (D.kappa + 1.0);
    const double rhs = (P.lambda + P.beta + P.alpha) / P.n;
    if (!approx_rel(lhs, rhs, 1e-12))
        throw invalid_input("el_residual: exponents violate the critical condition");

    const RadialFunction w1 = apply_restriction(op, pointwise_power(v, D.kappa));
    const double c1 = inner_product(u, w1) / inner_product(w1, w1);
    RadialFunction r1 = u;
    for (int i = 0; i < r1.grid.cells(); ++i)
        r1.values[i] -= c1 * w1.values[i];
    const double res1 = lp_norm(r1, P.p) / lp_norm(u, P.p);

    const BiRadialFunction w2 = apply_extension(op, pointwise_power(u, D.theta));
    const double c2 = inner_product(v, w2) / inner_product(w2, w2);
    BiRadialFunction r2 = v;
    for (size_t i = 0; i < r2.values.size(); ++i)
        r2.values[i] -= c2 * w2.values[i];
    const double res2 = lp_norm(r2, P.r) / lp_norm(v, P.r);

    return std::max(res1, res2);
}

/// Fixed-point iteration on the Euler--Lagrange system:
///   f <- normalize_p( (R[(E f)^{q-1}])^{1/(p-1)} )
/// recording nHat = ||E f||_q each step.  A step that decreases nHat is
/// damped by mixing toward the previous iterate; if 20 halvings do not
/// recover ascent the iteration reports Stalled.
inline ConstantEstimate power_iterate(const DiscreteOperator& op,
                                      const RadialFunction& init,
                                      double tol = 1e-8, int maxIter = 500) {
    const HlsParams& P = op.spec.params;
    const DerivedExponents& D = op.spec.derived;

    ConstantEstimate est;
    RadialFunction f = detail::normalize_lp(init, P.p);
    check_nonneg(f, "power_iterate");
    BiRadialFunction Ef = apply_extension(op, f);
    double nHat = lp_norm(Ef, D.q);
    est.history.push_back(nHat);
    est.status = IterationStatus::MaxIterations;
    detail::StepMixer mixer(f.grid.measure);

    for (int it = 1; it <= maxIter; ++it) {
        const BiRadialFunction g = pointwise_power(Ef, D.q - 1.0);
        RadialFunction h = apply_restriction(op, g);
        RadialFunction fNext = detail::normalize_lp(
            pointwise_power(std::move(h), 1.0 / (P.p - 1.0)), P.p);
        BiRadialFunction EfNext = apply_extension(op, fNext);
        double nNext = lp_norm(EfNext, D.q);

        int halvings = 0;
        while (nNext < nHat * (1.0 - 1e-10) && halvings < 20) {
            for (int i = 0; i < fNext.grid.cells(); ++i)
                fNext.values[i] = 0.5 * (fNext.values[i] + f.values[i]);
            fNext = detail::normalize_lp(std::move(fNext), P.p);
            EfNext = apply_extension(op, fNext);
            nNext = lp_norm(EfNext, D.q);
            ++halvings;
        }
        if (nNext < nHat * (1.0 - 1e-10)) {
            est.status = IterationStatus::Stalled;
            est.iterations = it;
            break;
        }

        // accelerated candidate from the recent steps; adopted only when it
        // beats the plain step, so the recorded history stays monotone
        mixer.push(f.values, fNext.values);
        std::vector<double> mixed;
        if (mixer.candidate(mixed)) {
            RadialFunction fMix{f.grid, std::move(mixed)};
            if (lp_norm(fMix, P.p) > 0.0) {
                fMix = detail::normalize_lp(std::move(fMix), P.p);
                BiRadialFunction EfMix = apply_extension(op, fMix);
                const double nMix = lp_norm(EfMix, D.q);
                if (nMix > nNext) {
                    fNext = std::move(fMix);
                    EfNext = std::move(EfMix);
                    nNext = nMix;
                }
            }
        }

        const double rel = std::abs(nNext - nHat) / nNext;
        f = std::move(fNext);
        Ef = std::move(EfNext);
        nHat = nNext;
        est.history.push_back(nHat);
        est.iterations = it;
        if (rel < tol) {
            est.status = IterationStatus::Converged;
            break;
        }
    }

    est.nHat = nHat;
    est.fSharp = f;
    est.gSharp = detail::normalize_lp(pointwise_power(Ef, D.q - 1.0), P.r);
    est.elResidual = el_residual(op, pointwise_power(f, P.p - 1.0),
                                 pointwise_power(est.gSharp, P.r - 1.0));
    return est;
}

/// Half-space representation of a bi-radial function: a function of
/// (y', rho) with plain Lebesgue measure in rho.
struct HalfspaceFunction {
    RadialGrid prime;
    std::vector<double> rhoEdges;
    std::vector<double> values; // [i * rhoCells + j]

    int rhoCells() const { return int(rhoEdges.size()) - 1; }
    double at(int i, int j) const { return values[size_t(i) * rhoCells() + j]; }
};

inline double lr_norm_halfspace(const HalfspaceFunction& G, double r) {
    double acc = 0.0;
    for (int i = 0; i < G.prime.cells(); ++i)
        for (int j = 0; j < G.rhoCells(); ++j)
            acc += std::pow(std::abs(G.at(i, j)), r) * G.prime.measure[i] *
                   (G.rhoEdges[j + 1] - G.rhoEdges[j]);
    return std::pow(acc, 1.0 / r);
}

/// G(y', rho) = |S^{k-1}|^{1/r} g(y', y'') rho^{(k-1)/r}, realized with the
/// cell-integrated measure factor so the L^r norms match exactly at cell
/// level.
inline HalfspaceFunction transform_to_halfspace(const BiRadialFunction& g,
                                                const HlsParams& params) {
    if (params.k < 1 || g.perp.empty())
        throw invalid_input("transform_to_halfspace: requires k >= 1");
    const double sk = unit_sphere_area(params.k);
    HalfspaceFunction G;
    G.prime = g.prime;
    G.rhoEdges = g.perp.edges;
    G.values.resize(g.values.size());
    for (int j = 0; j < g.cols(); ++j) {
        const double dt = g.perp.edges[j + 1] - g.perp.edges[j];
        const double tau = std::pow(g.perp.measure[j] / (sk * dt), 1.0 / params.r);
        const double factor = std::pow(sk, 1.0 / params.r) * tau;
        for (int i = 0; i < g.rows(); ++i)
            G.values[size_t(i) * g.cols() + j] = factor * g.at(i, j);
    }
    return G;
}

struct ConstantRelationReport {
    double predictedFactor;    // |S^{k-1}|^{1/r-1}
    double halfspaceConstant;  // estimate through the transformed pair
    double ratio;              // halfspaceConstant / (predictedFactor * nHat)
    double normError;          // | ||g||_r - ||G||_r | / ||g||_r
};

/// Checks the sharp-constant relation between the product-space and
/// half-space inequalities using the transformed optimal pair and the same
/// operator data.
inline ConstantRelationReport constant_relation_check(const DiscreteOperator& op,
                                                      const ConstantEstimate& est) {
    const HlsParams& P = op.spec.params;
    if (P.k < 1) throw invalid_input("constant_relation_check: requires k >= 1");
    const double sk = unit_sphere_area(P.k);
    const HalfspaceFunction G = transform_to_halfspace(est.gSharp, P);

    // half-space bilinear form, summed with the transformed weights
    const BiRadialFunction Ef = apply_extension(op, est.fSharp);
    double fHalf = 0.0;
    for (int i = 0; i < Ef.rows(); ++i)
        for (int j = 0; j < Ef.cols(); ++j) {
            const double dt = op.outPerp.edges[j + 1] - op.outPerp.edges[j];
            const double tau =
                std::pow(op.outPerp.measure[j] / (sk * dt), 1.0 / P.r);
            const double chi = op.outPerp.measure[j] / (sk * tau);
            fHalf += Ef.at(i, j) * G.at(i, j) * chi * op.outPrime.measure[i];
        }

    ConstantRelationReport rep;
    rep.predictedFactor = std::pow(sk, 1.0 / P.r - 1.0);
    const double gNorm = lp_norm(est.gSharp, P.r);
    const double GNorm = lr_norm_halfspace(G, P.r);
    rep.normError = std::abs(gNorm - GNorm) / gNorm;
    rep.halfspaceConstant = fHalf / (lp_norm(est.fSharp, P.p) * GNorm);
    rep.ratio = rep.halfspaceConstant / (rep.predictedFactor * est.nHat);
    return rep;
}

} // namespace whls
