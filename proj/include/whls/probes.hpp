#pragma once

#include <cmath>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "whls/kernel.hpp"
#include "whls/rearrange.hpp"

namespace whls {

enum class Verdict { Holds, Diverges, Inconclusive };

inline const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::Holds: return "HOLDS";
    case Verdict::Diverges: return "DIVERGES";
    case Verdict::Inconclusive: return "INCONCLUSIVE";
    }
    return "?";
}

struct LinearFit {
    double slope = 0.0;
    double intercept = 0.0;
    double r2 = 0.0;
};

struct ProbeReport {
    std::string name;
    HlsParams params;
    std::vector<std::pair<double, double>> observations; // (control, measured)
    bool hasFit = false;
    LinearFit fit;
    Verdict verdict = Verdict::Inconclusive;
    std::map<std::string, double> tolerances;
    std::map<std::string, double> extras;
};

namespace detail {

inline LinearFit linear_fit(const std::vector<std::pair<double, double>>& xy) {
    if (xy.size() < 2) throw invalid_input("linear_fit: need >= 2 points");
    const double n = double(xy.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (auto [x, y] : xy) {
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
    }
    LinearFit f;
    f.slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    f.intercept = (sy - f.slope * sx) / n;
    double ssRes = 0, ssTot = 0;
    const double yBar = sy / n;
    for (auto [x, y] : xy) {
        const double e = y - (f.intercept + f.slope * x);
        ssRes += e * e;
        ssTot += (y - yBar) * (y - yBar);
    }
    f.r2 = (ssTot > 0.0) ? 1.0 - ssRes / ssTot : 1.0;
    return f;
}

// Phi(t) = double integral over the unit ball squared (in R^d) of
// (|x-y'|^2 + t^2)^{-lambda/2}, by nested Gauss with the inner integral
// split at s = a.
inline double box_pair_integral(int d, double lambda, double t) {
    const auto g = quad::gauss8();
    const double w = unit_sphere_area(d);
    auto inner = [&](double a) {
        double acc = 0.0;
        for (double lo : {0.0, a}) {
            const double hi = (lo == 0.0) ? a : 1.0;
            if (!(hi > lo)) continue;
            const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
            for (int i = 0; i < g.n; ++i) {
                const double s = mid + half * g.x[i];
                acc += g.w[i] * half * std::pow(s, d - 1) *
                       angular_kernel(a, s, t, d, lambda);
            }
        }
        return acc;
    };
    double acc = 0.0;
    for (int pnl = 0; pnl < 2; ++pnl) { // [0, 1/2], [1/2, 1]
        const double lo = 0.5 * pnl, hi = lo + 0.5;
        const double mid = 0.5 * (lo + hi), half = 0.5 * (hi - lo);
        for (int i = 0; i < g.n; ++i) {
            const double a = mid + half * g.x[i];
            acc += g.w[i] * half * w * std::pow(a, d - 1) * inner(a);
        }
    }
    return acc;
}

// integral of t^{c} Phi(t)^q over [lo, hi], log-graded panels
inline double truncated_tail_segment(double lo, double hi, double c, double q,
                                     int d, double lambda) {
    const auto g = quad::gauss8();
    const int panels = std::max(2, int(std::ceil(4.0 * std::log2(hi / lo))));
    double acc = 0.0;
    double a = lo;
    const double ratio = std::pow(hi / lo, 1.0 / panels);
    for (int pnl = 0; pnl < panels; ++pnl) {
        const double b = (pnl == panels - 1) ? hi : a * ratio;
        const double mid = 0.5 * (a + b), half = 0.5 * (b - a);
        for (int i = 0; i < g.n; ++i) {
            const double t = mid + half * g.x[i];
            acc += g.w[i] * half * std::pow(t, c) *
                   std::pow(box_pair_integral(d, lambda, t), q);
        }
        a = b;
    }
    return acc;
}

// Shared divergence-fit logic: given (log(1/eps), T(eps)) observations with a
// fixed eps ratio, classify logarithmic vs power growth against the
// predicted exponent.
inline void classify_divergence(ProbeReport& rep, double predictedExponent) {
    rep.tolerances["exponentRelTol"] = 0.05;
    rep.tolerances["r2Min"] = 0.99;
    rep.extras["predictedExponent"] = predictedExponent;
    rep.hasFit = true;
    if (std::abs(predictedExponent) < 1e-9) {
        // boundary: T grows linearly in log(1/eps); fit the tail where the
        // lower-order terms have died out
        auto tail = rep.observations;
        if (tail.size() > 4) tail.erase(tail.begin(), tail.end() - 4);
        rep.fit = linear_fit(tail);
        rep.verdict = (rep.fit.r2 >= 0.99 && rep.fit.slope > 0.0)
                          ? Verdict::Diverges
                          : Verdict::Inconclusive;
    } else {
        // power growth: consecutive increments kill the additive constant,
        // leaving log(dT_i) exactly linear in log(1/eps_{i+1}); fit the
        // smallest-eps increments, where corrections from the slowly varying
        // prefactor are negligible
        std::vector<std::pair<double, double>> incr;
        for (size_t i = 0; i + 1 < rep.observations.size(); ++i) {
            const double dT = rep.observations[i + 1].second -
                              rep.observations[i].second;
            if (!(dT > 0.0)) continue;
            incr.emplace_back(rep.observations[i + 1].first, std::log(dT));
        }
        if (incr.size() > 3) incr.erase(incr.begin(), incr.end() - 3);
        if (incr.size() < 2) {
            rep.verdict = Verdict::Inconclusive;
            return;
        }
        rep.fit = linear_fit(incr);
        const bool match =
            std::abs(rep.fit.slope - predictedExponent) <=
                0.05 * std::abs(predictedExponent) &&
            rep.fit.r2 >= 0.99;
        rep.verdict = match ? Verdict::Diverges : Verdict::Inconclusive;
    }
}

} // namespace detail

/// Checks the dyadic-decomposition inequality
///   integral (rho^{-gamma} h)^tau drho/rho <= 2^{(2 gamma + 1) tau}
///   (integral rho^{-gamma} h drho/rho)^tau
/// for a non-decreasing h given as a piecewise-constant grid function,
/// extended by its last value beyond the grid (both sides in closed form per
/// cell).
inline ProbeReport dyadic_lemma_check(const RadialFunction& h, double gamma,
                                      double tau) {
    if (!(gamma > 0.0)) throw invalid_input("dyadic_lemma_check: gamma must be > 0");
    if (!(tau >= 1.0)) throw invalid_input("dyadic_lemma_check: tau must be >= 1");
    check_nonneg(h, "dyadic_lemma_check");
    for (int i = 1; i < h.grid.cells(); ++i)
        if (h.values[i] < h.values[i - 1])
            throw invalid_input("dyadic_lemma_check: h must be non-decreasing");

    double lhs = 0.0, rhsInner = 0.0;
    for (int i = 0; i < h.grid.cells(); ++i) {
        const double lo = h.grid.edges[i], hi = h.grid.edges[i + 1];
        const double v = h.values[i];
        if (v == 0.0) continue;
        if (lo == 0.0)
            throw invalid_input(
                "dyadic_lemma_check: h must vanish on a zero-reaching cell");
        lhs += std::pow(v, tau) * quad::power_integral(lo, hi, -gamma * tau - 1.0);
        rhsInner += v * quad::power_integral(lo, hi, -gamma - 1.0);
    }
    const double last = h.values.back();
    if (last > 0.0) { // tail (rMax, infinity) at the last value
        const double R = h.grid.rMax();
        lhs += std::pow(last, tau) * std::pow(R, -gamma * tau) / (gamma * tau);
        rhsInner += last * std::pow(R, -gamma) / gamma;
    }
    const double rhs = std::pow(2.0, (2.0 * gamma + 1.0) * tau) *
                       std::pow(rhsInner, tau);

    ProbeReport rep;
    rep.name = "dyadic-lemma";
    rep.observations.emplace_back(lhs, rhs);
    rep.tolerances["relSlack"] = 1e-8;
    rep.extras["gamma"] = gamma;
    rep.extras["tau"] = tau;
    rep.verdict = (lhs <= rhs * (1.0 + 1e-8)) ? Verdict::Holds
                                              : Verdict::Inconclusive;
    return rep;
}

/// Compares W = ||E h||_q^q on the weighted product space against
/// U = ||I_gamma h||_q^q for the plain kernel |z - x|^{-gamma} on R^{n-k},
/// with the explicit constant
///   C = (lambda 2^{2 gamma + 1} / (gamma (lambda - gamma)))^q |S^{k-1}|.
/// Also records W/U across dyadic rescalings of h.
inline ProbeReport norm_equivalence(const RadialFunction& h, const HlsParams& P) {
    const KernelSpec spec = make_kernel_spec(P);
    if (P.k < 1) throw invalid_input("norm_equivalence: requires k >= 1");
    check_nonneg(h, "norm_equivalence");
    const DerivedExponents& D = spec.derived;

    // the reduced plain-kernel parameters are automatically in balance
    HlsParams red;
    red.n = P.d();
    red.k = 0;
    red.lambda = D.gamma;
    red.beta = 0.0;
    red.p = P.p;
    red.r = P.r;
    const KernelSpec redSpec = make_kernel_spec(red);

    // perp grid mirrors the positive part of h's grid
    const auto& e = h.grid.edges;
    const double rMin = (e.front() > 0.0) ? e.front() : e[1];
    const int mPos = h.grid.cells() - ((e.front() == 0.0) ? 1 : 0);
    const double cExplicit =
        std::pow(P.lambda * std::pow(2.0, 2.0 * D.gamma + 1.0) /
                     (D.gamma * (P.lambda - D.gamma)),
                 D.q) *
        unit_sphere_area(P.k);

    ProbeReport rep;
    rep.name = "norm-equivalence";
    rep.params = P;
    rep.tolerances["quadTol"] = 1e-8;
    rep.extras["cExplicit"] = cExplicit;

    double w0 = 0.0, u0 = 0.0;
    for (double s : {1.0, 0.25, 4.0}) {
        const RadialGrid in = scale_grid(h.grid, s);
        const RadialFunction hs{in, h.values};
        const RadialGrid perp =
            make_log_grid(P.k, rMin * s, in.rMax(), std::max(8, mPos), true);
        const DiscreteOperator opW = build_extension(spec, in, in, perp);
        const DiscreteOperator opU = build_extension(redSpec, in, in, {});
        const double W = std::pow(lp_norm(apply_extension(opW, hs), D.q), D.q);
        const double U = std::pow(lp_norm(apply_extension(opU, hs), D.q), D.q);
        if (s == 1.0) {
            w0 = W;
            u0 = U;
            rep.extras["W"] = W;
            rep.extras["U"] = U;
        }
        rep.observations.emplace_back(s, (U > 0.0) ? W / U : 0.0);
    }
    const bool zero = (w0 == 0.0 && u0 == 0.0);
    bool ratiosStable = true;
    for (auto [s, ratio] : rep.observations)
        for (auto [s2, ratio2] : rep.observations)
            if (ratio2 > 0.0 && !(ratio / ratio2 < 10.0)) ratiosStable = false;
    rep.verdict = (zero || (w0 <= cExplicit * u0 * (1.0 + 1e-8) && ratiosStable))
                      ? Verdict::Holds
                      : Verdict::Inconclusive;
    return rep;
}

/// Truncated version of the divergent integral behind the sharpness of the
/// beta bound; fits the growth in 1/eps against the predicted exponent.
inline ProbeReport probe_beta_sharpness(const HlsParams& P,
                                        const std::vector<double>& epsilons) {
    if (!(P.r > 1.0) || !(P.lambda > 0.0) || P.k < 1)
        throw invalid_input("probe_beta_sharpness: need r > 1, lambda > 0, k >= 1");
    if (epsilons.size() < 3)
        throw invalid_input("probe_beta_sharpness: need >= 3 epsilons");
    for (size_t i = 1; i < epsilons.size(); ++i)
        if (!(epsilons[i] < epsilons[i - 1]) || !(epsilons.back() > 0.0))
            throw invalid_input("probe_beta_sharpness: epsilons must decrease to 0");
    const double q = P.r / (P.r - 1.0);
    const int d = P.d();
    const bool small = (P.lambda <= double(d));
    const double bound = small ? double(P.k) - double(P.k) / P.r
                               : double(P.n) - P.lambda - double(P.k) / P.r;
    if (P.beta < bound - 1e-12)
        throw invalid_input(
            "probe_beta_sharpness: parameters are inside the valid region");

    ProbeReport rep;
    rep.name = "beta-sharpness";
    rep.params = P;
    double predicted;
    if (small) {
        // first construction: f = indicator of the unit ball;
        //   T(eps) = |S^{k-1}| integral over (eps, 1) of t^{k-1-beta q} Phi^q
        predicted = P.beta * q - double(P.k);
        const double sk = unit_sphere_area(P.k);
        const double c = double(P.k) - 1.0 - P.beta * q;
        double T = sk * detail::truncated_tail_segment(epsilons[0], 1.0, c, q, d,
                                                       P.lambda);
        rep.observations.emplace_back(std::log(1.0 / epsilons[0]), T);
        for (size_t i = 1; i < epsilons.size(); ++i) {
            T += sk * detail::truncated_tail_segment(epsilons[i], epsilons[i - 1],
                                                     c, q, d, P.lambda);
            rep.observations.emplace_back(std::log(1.0 / epsilons[i]), T);
        }
    } else {
        // second construction: f = indicator of a large ball; the ball
        // integral is exactly omega_d rho^d, leaving a pure power integral
        predicted = (P.lambda + P.beta - double(P.k) / q + double(P.k) - P.n) * q;
        const double wd = std::pow(unit_ball_volume(d), q);
        for (double eps : epsilons)
            rep.observations.emplace_back(
                std::log(1.0 / eps),
                wd * quad::power_integral(eps, 1.0, -predicted - 1.0));
    }
    detail::classify_divergence(rep, predicted);
    return rep;
}

/// Divergence of the plain inequality (beta = 0) once lambda reaches
/// n - k/r, via the large-ball construction.
inline ProbeReport probe_lambda_range(const HlsParams& P,
                                      const std::vector<double>& epsilons) {
    if (P.beta != 0.0) throw invalid_input("probe_lambda_range: requires beta = 0");
    if (!(P.r > 1.0) || P.k < 1)
        throw invalid_input("probe_lambda_range: need r > 1, k >= 1");
    const double bound = double(P.n) - double(P.k) / P.r;
    if (P.lambda < bound - 1e-12)
        throw invalid_input("probe_lambda_range: lambda below n - k/r");
    const double q = P.r / (P.r - 1.0);
    ProbeReport rep;
    rep.name = "lambda-range";
    rep.params = P;
    const double predicted = (P.lambda - bound) * q;
    const double wd = std::pow(unit_ball_volume(P.d()), q);
    for (double eps : epsilons)
        rep.observations.emplace_back(
            std::log(1.0 / eps),
            wd * quad::power_integral(eps, 1.0, -predicted - 1.0));
    detail::classify_divergence(rep, predicted);
    return rep;
}

/// Ratio integral (E f)^q / (||f||_*^{q-p} ||f||_p^p) over a family, with a
/// grid-doubling stability check; the supremum is the empirical constant.
inline ProbeReport adams_bound_check(const DiscreteOperator& opCoarse,
                                     const DiscreteOperator& opFine,
                                     const std::vector<RadialFunction>& family) {
    if (family.empty()) throw invalid_input("adams_bound_check: empty family");
    const HlsParams& P = opCoarse.spec.params;
    const double q = opCoarse.spec.derived.q;

    auto ratio = [&](const DiscreteOperator& op, const RadialFunction& f) {
        const double fp = lp_norm(f, P.p);
        if (!(fp > 0.0)) throw invalid_input("adams_bound_check: zero member");
        const double star = star_norm(f, P).value;
        const double num = std::pow(lp_norm(apply_extension(op, f), q), q);
        return num / (std::pow(star, q - P.p) * std::pow(fp, P.p));
    };

    ProbeReport rep;
    rep.name = "adams-bound";
    rep.params = P;
    rep.tolerances["stabilityRelTol"] = 0.20;
    double supC = 0.0, supF = 0.0;
    for (const auto& f : family) {
        check_nonneg(f, "adams_bound_check");
        const double rc = ratio(opCoarse, f);
        const double rf = ratio(opFine, resample(f, opFine.inGrid));
        rep.observations.emplace_back(rc, rf);
        supC = std::max(supC, rc);
        supF = std::max(supF, rf);
    }
    rep.extras["supCoarse"] = supC;
    rep.extras["supFine"] = supF;
    const bool stable = std::abs(supF - supC) <= 0.20 * supC;
    rep.verdict = (std::isfinite(supC) && stable) ? Verdict::Holds
                                                  : Verdict::Inconclusive;
    return rep;
}

/// Same shape of check for the |x|^{-alpha}-weighted operator norm
/// ||E_alpha f||_q <= C ||f||_p.
inline ProbeReport sw_probe(const DiscreteOperator& opCoarse,
                            const DiscreteOperator& opFine,
                            const std::vector<RadialFunction>& family) {
    const HlsParams& P = opCoarse.spec.params;
    if (!(P.alpha > 0.0)) throw invalid_input("sw_probe: requires alpha > 0");
    if (family.empty()) throw invalid_input("sw_probe: empty family");
    const double q = opCoarse.spec.derived.q;

    auto ratio = [&](const DiscreteOperator& op, const RadialFunction& f) {
        const double fp = lp_norm(f, P.p);
        if (!(fp > 0.0)) throw invalid_input("sw_probe: zero member");
        return lp_norm(apply_extension(op, f), q) / fp;
    };

    ProbeReport rep;
    rep.name = "sw-bound";
    rep.params = P;
    rep.tolerances["stabilityRelTol"] = 0.20;
    double supC = 0.0, supF = 0.0;
    for (const auto& f : family) {
        check_nonneg(f, "sw_probe");
        const double rc = ratio(opCoarse, f);
        const double rf = ratio(opFine, resample(f, opFine.inGrid));
        rep.observations.emplace_back(rc, rf);
        supC = std::max(supC, rc);
        supF = std::max(supF, rf);
    }
    rep.extras["supCoarse"] = supC;
    rep.extras["supFine"] = supF;
    const bool stable = std::abs(supF - supC) <= 0.20 * supC;
    rep.verdict = (std::isfinite(supC) && stable) ? Verdict::Holds
                                                  : Verdict::Inconclusive;
    return rep;
}

} // namespace whls
