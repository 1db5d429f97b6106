#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "whls/kernel.hpp"

using namespace whls;

namespace {
const HlsParams kSetA{2, 1, 0.7, 0.05, 4.0 / 3, 4.0 / 3, 0.0};

DiscreteOperator set_a_operator(int M, double rMax = 100.0) {
    const KernelSpec spec = make_kernel_spec(kSetA);
    const RadialGrid in = make_log_grid(1, 1e-3, rMax, M, true);
    const RadialGrid perp = make_log_grid(1, 1e-3, rMax, M, true);
    return build_extension(spec, in, in, perp);
}
} // namespace

TEST_CASE("angular kernel closed forms") {
    CHECK(angular_kernel(1.0, 0.0, 1.0, 1, 2.0) == Catch::Approx(1.0).epsilon(1e-14));
    // dim 2 with s = 0: integrand constant in the angle
    const double a = 0.8, t = 0.3, lambda = 1.4;
    CHECK(angular_kernel(a, 0.0, t, 2, lambda) ==
          Catch::Approx(2.0 * std::numbers::pi *
                        std::pow(a * a + t * t, -lambda / 2))
              .epsilon(1e-13));
    CHECK_THROWS_AS(angular_kernel(1.0, 1.0, 0.0, 1, 1.0), invalid_input);
}

TEST_CASE("angular kernel dim 2 quadrature matches a dense reference") {
    const double a = 1.0, s = 0.7, t = 0.05, lambda = 0.7;
    // trapezoid reference at high resolution
    const int N = 200000;
    double ref = 0.0;
    const double c0 = a * a + s * s + t * t, b = 2.0 * a * s;
    for (int i = 0; i < N; ++i) {
        const double th = (i + 0.5) * std::numbers::pi / N;
        ref += std::pow(c0 - b * std::cos(th), -lambda / 2);
    }
    ref *= 2.0 * std::numbers::pi / N;
    CHECK(angular_kernel(a, s, t, 2, lambda) == Catch::Approx(ref).epsilon(1e-10));
}

TEST_CASE("make_kernel_spec rejects invalid parameters") {
    HlsParams bad = kSetA;
    bad.beta = 0.3; // above the beta bound
    CHECK_THROWS_AS(make_kernel_spec(bad), invalid_input);
}

TEST_CASE("extension of zero is zero and preserves positivity") {
    const DiscreteOperator op = set_a_operator(24);
    RadialFunction zero{op.inGrid, std::vector<double>(op.inGrid.cells(), 0.0)};
    const BiRadialFunction Ez = apply_extension(op, zero);
    for (double v : Ez.values) CHECK(v == 0.0);

    for (double v : op.matrix) {
        CHECK(std::isfinite(v));
        CHECK(v >= 0.0);
    }
}

TEST_CASE("discrete duality is a transpose identity") {
    const DiscreteOperator op = set_a_operator(32);
    std::mt19937 rng(17);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 10; ++trial) {
        RadialFunction f{op.inGrid, std::vector<double>(op.inGrid.cells())};
        for (double& v : f.values) v = U(rng);
        BiRadialFunction g = make_biradial(op.outPrime, op.outPerp);
        for (double& v : g.values) v = U(rng);
        const double lhs = bilinear(op, f, g);
        const double rhs = inner_product(f, apply_restriction(op, g));
        CHECK(std::abs(lhs - rhs) <= 1e-12 * std::abs(lhs));
    }
}

TEST_CASE("exact rescaling leaves entries covariant") {
    const KernelSpec spec = make_kernel_spec(kSetA);
    const RadialGrid in = make_log_grid(1, 1e-3, 50.0, 20, true);
    const RadialGrid perp = make_log_grid(1, 1e-3, 50.0, 20, true);
    const DiscreteOperator op = build_extension(spec, in, in, perp);
    const double s = 2.0;
    const DiscreteOperator opS = build_extension(spec, scale_grid(in, s),
                                                 scale_grid(in, s),
                                                 scale_grid(perp, s));
    const double factor =
        std::pow(s, double(kSetA.d()) - kSetA.lambda - kSetA.beta);
    for (size_t idx = 0; idx < op.matrix.size(); ++idx)
        CHECK(opS.matrix[idx] ==
              Catch::Approx(op.matrix[idx] * factor).epsilon(1e-10));
}

TEST_CASE("far entries reproduce the kernel cell averages") {
    const DiscreteOperator op = set_a_operator(24);
    // pick a well separated (output, input) pair and re-integrate the entry
    // with an independent dense rule
    const int i = 20, j = 18, m = 2;
    const double aLo = op.outPrime.edges[i], aHi = op.outPrime.edges[i + 1];
    const double sLo = op.inGrid.edges[m], sHi = op.inGrid.edges[m + 1];
    const double tLo = op.outPerp.edges[j], tHi = op.outPerp.edges[j + 1];
    const double beta = kSetA.beta, lambda = kSetA.lambda;
    const int N = 400;
    double acc = 0.0;
    for (int ia = 0; ia < N; ++ia)
        for (int is = 0; is < N; ++is)
            for (int it = 0; it < N / 4; ++it) {
                const double a = aLo + (aHi - aLo) * (ia + 0.5) / N;
                const double sv = sLo + (sHi - sLo) * (is + 0.5) / N;
                const double t = tLo + (tHi - tLo) * (it + 0.5) / (N / 4);
                acc += angular_kernel(a, sv, t, 1, lambda) * std::pow(t, -beta) *
                       ((aHi - aLo) / N) * ((sHi - sLo) / N) *
                       ((tHi - tLo) / (N / 4));
            }
    // normalize: average over the output prime shell, perp sphere factor over
    // the perp cell measure
    const double primeMass = quad::power_integral(aLo, aHi, 0.0);
    const double sk = unit_sphere_area(1);
    const double entry = acc / primeMass * sk / op.outPerp.measure[j];
    const double stored =
        op.matrix[(size_t(i) * op.outCols() + j) * op.inCells() + m];
    // the assembly collapses the perp integral to its power-weighted centroid
    // on far cells, so a dense reference only matches to the quadrature
    // modulus
    CHECK(stored == Catch::Approx(entry).epsilon(2e-2));

    // exact wiring check: rebuild the far entry from the published quadrature
    // primitives
    const double tc = quad::power_centroid(tLo, tHi, -beta);
    const double tMass = quad::power_integral(tLo, tHi, -beta);
    const auto an = quad::power_weighted_nodes(aLo, aHi, 0.0, quad::gauss4());
    double avg = 0.0;
    for (int ia = 0; ia < an.n; ++ia) {
        const auto sn = quad::power_weighted_nodes(sLo, sHi, 0.0, quad::gauss4());
        double inner = 0.0;
        for (int is = 0; is < sn.n; ++is)
            inner += sn.w[is] * angular_kernel(an.x[ia], sn.x[is], tc, 1, lambda);
        avg += an.w[ia] * inner;
    }
    avg /= primeMass;
    CHECK(stored ==
          Catch::Approx(tMass * avg * sk / op.outPerp.measure[j]).epsilon(1e-12));
}

TEST_CASE("extension of a non-increasing profile is non-increasing per slice") {
    const DiscreteOperator op = set_a_operator(32);
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        RadialFunction f{op.inGrid, std::vector<double>(op.inGrid.cells())};
        double level = 1.0;
        for (int i = 0; i < op.inGrid.cells(); ++i) {
            f.values[i] = level;
            level *= U(rng); // non-increasing by construction
        }
        const BiRadialFunction Ef = apply_extension(op, f);
        for (int j = 0; j < Ef.cols(); ++j)
            for (int i = 1; i < Ef.rows(); ++i)
                CHECK(Ef.at(i, j) <= Ef.at(i - 1, j) * (1.0 + 1e-9));
    }
}

TEST_CASE("bilinear form is bilinear and dominated for beta <= 0") {
    const DiscreteOperator op = set_a_operator(20);
    std::mt19937 rng(31);
    std::uniform_real_distribution<double> U(0.0, 1.0);
    RadialFunction f{op.inGrid, std::vector<double>(op.inGrid.cells())};
    for (double& v : f.values) v = U(rng);
    BiRadialFunction g = make_biradial(op.outPrime, op.outPerp);
    for (double& v : g.values) v = U(rng);
    RadialFunction cf = f;
    for (double& v : cf.values) v *= 2.0;
    BiRadialFunction dg = g;
    for (double& v : dg.values) v *= 3.0;
    CHECK(bilinear(op, cf, dg) ==
          Catch::Approx(6.0 * bilinear(op, f, g)).epsilon(1e-13));

    // kernel domination: for beta < 0,
    //   |x-y|^{-lambda} |y''|^{-beta} <= |x-y|^{-(lambda+beta)}
    HlsParams neg{2, 1, 0.85, -0.1, 4.0 / 3, 4.0 / 3, 0.0};
    REQUIRE(validate(neg).valid);
    HlsParams flat{2, 1, 0.75, 0.0, 4.0 / 3, 4.0 / 3, 0.0};
    REQUIRE(validate(flat).valid);
    const DiscreteOperator opNeg = build_extension(
        make_kernel_spec(neg), op.inGrid, op.outPrime, op.outPerp);
    const DiscreteOperator opFlat = build_extension(
        make_kernel_spec(flat), op.inGrid, op.outPrime, op.outPerp);
    CHECK(bilinear(opNeg, f, g) <= bilinear(opFlat, f, g) * (1.0 + 1e-8));
}

TEST_CASE("assembly precondition errors are named") {
    const KernelSpec spec = make_kernel_spec(kSetA);
    const RadialGrid in = make_log_grid(1, 1e-3, 10.0, 16, true);
    const RadialGrid wrongDim = make_log_grid(2, 1e-3, 10.0, 16, true);
    CHECK_THROWS_AS(build_extension(spec, wrongDim, in, in), invalid_input);

    // beta >= k with a zero-reaching perp cell cannot be integrated (such
    // parameters never validate, so the raw spec exercises the guard)
    HlsParams big = kSetA;
    big.beta = 1.2;
    const KernelSpec rawSpec{big, derive_exponents(big)};
    const RadialGrid perp = make_log_grid(1, 1e-3, 10.0, 16, true);
    CHECK_THROWS_AS(build_extension(rawSpec, in, in, perp), invalid_input);
}

TEST_CASE("refinement keeps the extension norm stable") {
    const KernelSpec spec = make_kernel_spec(kSetA);
    double prev = 0.0;
    for (int M : {32, 64}) {
        const RadialGrid in = make_log_grid(1, 1e-3, 100.0, M, true);
        const RadialGrid perp = make_log_grid(1, 1e-3, 100.0, M, true);
        const DiscreteOperator op = build_extension(spec, in, in, perp);
        RadialFunction f{in, std::vector<double>(in.cells())};
        for (int i = 0; i < in.cells(); ++i)
            f.values[i] = std::exp(-in.radii[i] * in.radii[i]);
        const double nq = lp_norm(apply_extension(op, f), spec.derived.q) /
                          lp_norm(f, kSetA.p);
        if (prev > 0.0) CHECK(std::abs(nq - prev) / prev < 0.01);
        prev = nq;
    }
}
