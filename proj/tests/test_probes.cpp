#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>

#include "whls/probes.hpp"

using namespace whls;

namespace {
const HlsParams kSetA{2, 1, 0.7, 0.05, 4.0 / 3, 4.0 / 3, 0.0};
const std::vector<double> kEps{1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
} // namespace

TEST_CASE("dyadic inequality on the step function") {
    // h = chi_{[1, infinity)}, gamma = 0.5, tau = 2:
    // LHS = 1/(gamma tau) = 1, RHS = 2^4 / gamma^2 = 64
    const RadialGrid g = grid_from_edges(1, {1.0, 30.0});
    const RadialFunction h{g, {1.0}};
    const ProbeReport rep = dyadic_lemma_check(h, 0.5, 2.0);
    CHECK(rep.verdict == Verdict::Holds);
    CHECK(rep.observations[0].first == Catch::Approx(1.0).epsilon(1e-12));
    CHECK(rep.observations[0].second == Catch::Approx(64.0).epsilon(1e-12));
}

TEST_CASE("dyadic inequality trivial cases") {
    const RadialGrid g = make_log_grid(1, 0.1, 10.0, 16, false);
    const RadialFunction zero{g, std::vector<double>(g.cells(), 0.0)};
    const ProbeReport rep = dyadic_lemma_check(zero, 0.5, 2.0);
    CHECK(rep.verdict == Verdict::Holds);
    CHECK(rep.observations[0].first == 0.0);

    // tau = 1: both sides are the same integral up to 2^{2 gamma + 1} > 1
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    RadialFunction h{g, std::vector<double>(g.cells())};
    double level = 0.0;
    for (double& v : h.values) level = v = level + U(rng);
    const ProbeReport r1 = dyadic_lemma_check(h, 0.7, 1.0);
    CHECK(r1.verdict == Verdict::Holds);
    CHECK(r1.observations[0].second ==
          Catch::Approx(std::pow(2.0, 2.4) * r1.observations[0].first)
              .epsilon(1e-12));

    RadialFunction bad = h;
    std::swap(bad.values.front(), bad.values.back());
    CHECK_THROWS_AS(dyadic_lemma_check(bad, 0.5, 2.0), invalid_input);
}

TEST_CASE("random monotone functions satisfy the dyadic inequality") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    const RadialGrid g = make_log_grid(1, 1e-2, 100.0, 32, false);
    for (double gamma : {0.25, 0.5, 0.9})
        for (double tau : {1.0, 2.0, 4.0})
            for (int trial = 0; trial < 3; ++trial) {
                RadialFunction h{g, std::vector<double>(g.cells())};
                double level = 0.0;
                for (double& v : h.values) level = v = level + U(rng);
                CHECK(dyadic_lemma_check(h, gamma, tau).verdict == Verdict::Holds);
            }
}

TEST_CASE("norm equivalence with the explicit lemma constant") {
    const RadialGrid g = make_log_grid(1, 1e-2, 50.0, 48, true);
    RadialFunction h{g, std::vector<double>(g.cells(), 0.0)};
    for (int i = 0; i < g.cells(); ++i)
        if (g.radii[i] < 1.0) h.values[i] = 1.0;
    const ProbeReport rep = norm_equivalence(h, kSetA);
    CHECK(rep.verdict == Verdict::Holds);
    // (lambda 2^{2 gamma + 1} / (gamma (lambda - gamma)))^q |S^0|
    //   = (0.7 * 4 / 0.5 * 5)^4 * 2 = 28^4 * 2
    CHECK(rep.extras.at("cExplicit") == Catch::Approx(1229312.0).epsilon(1e-12));
    CHECK(rep.extras.at("W") <= 1229312.0 * rep.extras.at("U"));
    // scale stability of the ratio
    for (const auto& [s, ratio] : rep.observations)
        CHECK(ratio == Catch::Approx(rep.observations[0].second).epsilon(1e-6));
}

TEST_CASE("norm equivalence trivial and error cases") {
    const RadialGrid g = make_log_grid(1, 1e-2, 10.0, 16, true);
    const RadialFunction zero{g, std::vector<double>(g.cells(), 0.0)};
    CHECK(norm_equivalence(zero, kSetA).verdict == Verdict::Holds);

    HlsParams bad = kSetA;
    bad.beta = 0.3;
    const RadialFunction one{g, std::vector<double>(g.cells(), 1.0)};
    CHECK_THROWS_AS(norm_equivalence(one, bad), invalid_input);
}

TEST_CASE("beta sharpness at and above the boundary") {
    // boundary: beta q = k gives logarithmic growth
    HlsParams P{2, 1, 0.5, 0.25, 0.0, 4.0 / 3, 0.0};
    const ProbeReport atB = probe_beta_sharpness(P, kEps);
    CHECK(atB.verdict == Verdict::Diverges);
    CHECK(atB.fit.r2 >= 0.99);

    P.beta = 0.30; // exponent beta q - k = 0.2
    const ProbeReport above = probe_beta_sharpness(P, kEps);
    CHECK(above.verdict == Verdict::Diverges);
    CHECK(std::abs(above.fit.slope - 0.2) <= 0.05 * 0.2);

    HlsParams valid = kSetA;
    CHECK_THROWS_AS(probe_beta_sharpness(valid, kEps), invalid_input);
}

TEST_CASE("beta sharpness covers the lambda-large construction") {
    // lambda > n - k engages the large-ball construction
    HlsParams P{2, 1, 1.3, 0.5, 0.0, 4.0 / 3, 0.0};
    // bound n - lambda - k/r = 2 - 1.3 - 0.75 = -0.05 < beta
    const ProbeReport rep = probe_beta_sharpness(P, kEps);
    CHECK(rep.verdict == Verdict::Diverges);
    // exponent (lambda + beta - k/q + k - n) q = (1.3+0.5-0.25-1)*4 = 2.2
    CHECK(rep.fit.slope == Catch::Approx(2.2).epsilon(1e-10));
}

TEST_CASE("lambda range probe") {
    HlsParams P{2, 1, 1.25, 0.0, 0.0, 4.0 / 3, 0.0};
    const ProbeReport atB = probe_lambda_range(P, kEps);
    CHECK(atB.verdict == Verdict::Diverges);
    CHECK(atB.fit.r2 >= 0.99);

    P.lambda = 1.35;
    const ProbeReport above = probe_lambda_range(P, kEps);
    CHECK(above.verdict == Verdict::Diverges);
    CHECK(above.fit.slope == Catch::Approx(0.4).epsilon(1e-10));

    P.lambda = 1.0;
    CHECK_THROWS_AS(probe_lambda_range(P, kEps), invalid_input);
    P.lambda = 1.25;
    P.beta = 0.1;
    CHECK_THROWS_AS(probe_lambda_range(P, kEps), invalid_input);
}

namespace {

std::vector<RadialFunction> test_family(const RadialGrid& g, const HlsParams& P) {
    std::vector<RadialFunction> fam;
    RadialFunction gauss{g, std::vector<double>(g.cells())};
    RadialFunction chi{g, std::vector<double>(g.cells(), 0.0)};
    RadialFunction pw{g, std::vector<double>(g.cells())};
    for (int i = 0; i < g.cells(); ++i) {
        const double x = g.radii[i];
        gauss.values[i] = std::exp(-x * x);
        if (x < 1.0) chi.values[i] = 1.0;
        pw.values[i] = std::pow(1.0 + x * x, -double(P.d()) / P.p * 1.01);
    }
    fam.push_back(std::move(gauss));
    fam.push_back(std::move(chi));
    fam.push_back(std::move(pw));
    return fam;
}

} // namespace

TEST_CASE("adams bound ratio is finite, stable and homogeneous") {
    const KernelSpec spec = make_kernel_spec(kSetA);
    const RadialGrid gc = make_log_grid(1, 1e-3, 100.0, 32, true);
    const RadialGrid gf = make_log_grid(1, 1e-3, 100.0, 64, true);
    const DiscreteOperator opC = build_extension(spec, gc, gc, gc);
    const DiscreteOperator opF = build_extension(spec, gf, gf, gf);
    const auto fam = test_family(gc, kSetA);
    const ProbeReport rep = adams_bound_check(opC, opF, fam);
    CHECK(rep.verdict == Verdict::Holds);
    CHECK(rep.extras.at("supCoarse") > 0.0);

    // homogeneity of the ratio under f -> c f
    auto scaled = fam;
    for (auto& f : scaled)
        for (double& v : f.values) v *= 7.0;
    const ProbeReport rep2 = adams_bound_check(opC, opF, scaled);
    CHECK(rep2.extras.at("supCoarse") ==
          Catch::Approx(rep.extras.at("supCoarse")).epsilon(1e-10));

    CHECK_THROWS_AS(adams_bound_check(opC, opF, {}), invalid_input);
    std::vector<RadialFunction> degenerate{
        RadialFunction{gc, std::vector<double>(gc.cells(), 0.0)}};
    CHECK_THROWS_AS(adams_bound_check(opC, opF, degenerate), invalid_input);
}

TEST_CASE("stein-weiss ratio probe") {
    HlsParams P{2, 1, 0.7, 0.0, 4.0 / 3, 4.0 / 3, 0.1};
    P.beta = solve_balance(P, BalanceField::Beta); // -0.05
    REQUIRE(validate(P).valid);
    const KernelSpec spec = make_kernel_spec(P);
    const RadialGrid gc = make_log_grid(1, 1e-3, 100.0, 32, true);
    const RadialGrid gf = make_log_grid(1, 1e-3, 100.0, 64, true);
    const DiscreteOperator opC = build_extension(spec, gc, gc, gc);
    const DiscreteOperator opF = build_extension(spec, gf, gf, gf);
    const ProbeReport rep = sw_probe(opC, opF, test_family(gc, P));
    CHECK(rep.verdict == Verdict::Holds);
    CHECK(rep.extras.at("supCoarse") > 0.0);

    // alpha at its bound never validates
    HlsParams Q = P;
    Q.alpha = 0.25;
    Q.beta = solve_balance(Q, BalanceField::Beta);
    CHECK_THROWS_AS(make_kernel_spec(Q), invalid_input);

    // alpha = 0 must use the base path
    const KernelSpec base = make_kernel_spec(kSetA);
    const DiscreteOperator opBase = build_extension(base, gc, gc, gc);
    CHECK_THROWS_AS(sw_probe(opBase, opBase, test_family(gc, kSetA)),
                    invalid_input);
}
