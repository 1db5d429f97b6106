#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "whls/common.hpp"

namespace whls {

/// Parameter set for the weighted bilinear form
///   F(f,g) = integral of f(x) g(y) / (|x|^alpha |x-y|^lambda |y''|^beta)
/// with x in R^{n-k}, y = (y', y'') in R^{n-k} x R^k and
/// |x-y|^2 = |x-y'|^2 + |y''|^2.  alpha = 0 is the base inequality; alpha > 0
/// gives the Stein--Weiss variant.
struct HlsParams {
    int n = 1;
    int k = 0;
    double lambda = 0.0;
    double beta = 0.0;
    double p = 0.0;
    double r = 0.0;
    double alpha = 0.0;

    int d() const { return n - k; } // dimension of the x-space
};

struct DerivedExponents {
    double q;       // dual exponent, q = r/(r-1)
    double gamma;   // lambda - k/q + beta (+ alpha when alpha > 0)
    double pPrime;  // p/(p-1)
    double kappa;   // 1/(r-1)
    double theta;   // 1/(p-1)
    double betaHat; // beta - (k-1)(1 - 1/r), half-space weight exponent
};

enum class Regime { LambdaSmall, LambdaLarge };

struct ValidityReport {
    bool valid = false;
    Regime regime = Regime::LambdaSmall;
    double betaBound = 0.0;
    std::vector<std::string> violations;
    // Stein--Weiss hypotheses, only meaningful when alpha > 0.
    bool swChecked = false;
    double swAlphaBound = 0.0;
    bool swSumCondition = false;
};

constexpr double kBalanceTol = 1e-12;

// Left-hand side of the balance condition minus the right-hand side,
// with the Stein--Weiss weight folded in.
inline double balance_residual(const HlsParams& P) {
    const double lhs = (double(P.d()) / P.n) / P.p + 1.0 / P.r
                     + (P.alpha + P.beta + P.lambda) / P.n;
    const double rhs = 2.0 - double(P.k) / P.n;
    return lhs - rhs;
}

inline DerivedExponents derive_exponents(const HlsParams& P) {
    if (!(P.p > 1.0)) throw invalid_input("derive_exponents: p must be > 1");
    if (!(P.r > 1.0)) throw invalid_input("derive_exponents: r must be > 1");
    DerivedExponents D;
    D.q = P.r / (P.r - 1.0);
    D.gamma = P.lambda - double(P.k) / D.q + P.beta + P.alpha;
    D.pPrime = P.p / (P.p - 1.0);
    D.kappa = 1.0 / (P.r - 1.0);
    D.theta = 1.0 / (P.p - 1.0);
    D.betaHat = P.beta - double(P.k - 1) * (1.0 - 1.0 / P.r);
    return D;
}

inline ValidityReport validate(const HlsParams& P) {
    ValidityReport R;
    auto fail = [&R](const std::string& name) { R.violations.push_back(name); };

    if (P.n < 1) fail("n >= 1");
    if (P.k < 0 || P.k >= P.n) fail("0 <= k < n");
    if (!(P.lambda > 0.0)) fail("lambda > 0");
    if (!(P.p > 1.0)) fail("p > 1");
    if (!(P.r > 1.0)) fail("r > 1");
    if (P.alpha < 0.0) fail("alpha >= 0");
    if (!R.violations.empty()) return R; // exponent algebra below needs these

    R.regime = (P.lambda <= P.n - P.k) ? Regime::LambdaSmall : Regime::LambdaLarge;
    R.betaBound = (R.regime == Regime::LambdaSmall)
                      ? double(P.k) - double(P.k) / P.r
                      : double(P.n) - P.lambda - double(P.k) / P.r;

    if (std::abs(balance_residual(P)) > kBalanceTol) fail("balance condition");
    if (P.k == 0) {
        // no perpendicular weight without perpendicular directions
        if (P.beta != 0.0) fail("beta == 0 (k = 0)");
    } else if (!(P.beta < R.betaBound)) {
        fail("beta < betaBound");
    }

    const DerivedExponents D = derive_exponents(P);
    if (!(D.gamma > 0.0)) fail("gamma > 0");
    if (!(D.gamma < P.d())) fail("gamma < n-k");

    if (P.alpha > 0.0) {
        R.swChecked = true;
        R.swAlphaBound = double(P.d()) * (P.p - 1.0) / P.p;
        R.swSumCondition = (1.0 / P.p + 1.0 / P.r >= 1.0);
        if (!(P.alpha < R.swAlphaBound)) fail("alpha < (n-k)(p-1)/p");
        if (!R.swSumCondition) fail("1/p + 1/r >= 1");
        if (!(P.lambda < P.n - P.k)) fail("lambda < n-k (Stein-Weiss)");
    }

    R.valid = R.violations.empty();
    return R;
}

enum class BalanceField { Lambda, Beta, P, R };

// Solves the balance condition for one field, all others fixed.
inline double solve_balance(const HlsParams& partial, BalanceField field) {
    HlsParams P = partial;
    const double n = P.n, k = P.k, d = P.d();
    switch (field) {
    case BalanceField::Lambda:
    case BalanceField::Beta: {
        // alpha + beta + lambda = n (2 - k/n - (d/n)/p - 1/r)
        const double s = n * (2.0 - k / n - (d / n) / P.p - 1.0 / P.r);
        const double v = (field == BalanceField::Lambda)
                             ? s - P.alpha - P.beta
                             : s - P.alpha - P.lambda;
        if (field == BalanceField::Lambda && !(v > 0.0))
            throw no_solution("solve_balance: required lambda <= 0");
        return v;
    }
    case BalanceField::P: {
        const double invP = (2.0 - k / n - 1.0 / P.r
                             - (P.alpha + P.beta + P.lambda) / n) * n / d;
        if (!(invP > 0.0) || !(invP < 1.0))
            throw no_solution("solve_balance: required p outside (1, inf)");
        return 1.0 / invP;
    }
    case BalanceField::R: {
        const double invR = 2.0 - k / n - (d / n) / P.p
                          - (P.alpha + P.beta + P.lambda) / n;
        if (!(invR > 0.0) || !(invR < 1.0))
            throw no_solution("solve_balance: required r outside (1, inf)");
        return 1.0 / invR;
    }
    }
    throw invalid_input("solve_balance: unknown field");
}

} // namespace whls
