#pragma once

#include <cstdio>
#include <fstream>
#include <string>

#include <json.hpp>

#include "whls/optimize.hpp"
#include "whls/probes.hpp"

namespace whls {

using json = nlohmann::json;

inline std::string fmt17(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

inline json to_json(const HlsParams& P) {
    return json{{"n", P.n},         {"k", P.k},     {"lambda", P.lambda},
                {"beta", P.beta},   {"p", P.p},     {"r", P.r},
                {"alpha", P.alpha}};
}

inline HlsParams params_from_json(const json& j) {
    HlsParams P;
    P.n = j.at("n").get<int>();
    P.k = j.at("k").get<int>();
    P.lambda = j.at("lambda").get<double>();
    P.beta = j.at("beta").get<double>();
    P.p = j.at("p").get<double>();
    P.r = j.at("r").get<double>();
    P.alpha = j.value("alpha", 0.0);
    return P;
}

inline json to_json(const DerivedExponents& D) {
    return json{{"q", D.q},           {"gamma", D.gamma},
                {"pPrime", D.pPrime}, {"kappa", D.kappa},
                {"theta", D.theta},   {"betaHat", D.betaHat}};
}

inline json to_json(const ValidityReport& R) {
    json j{{"valid", R.valid},
           {"regime", R.regime == Regime::LambdaSmall ? "LambdaSmall" : "LambdaLarge"},
           {"betaBound", R.betaBound},
           {"violations", R.violations}};
    if (R.swChecked)
        j["steinWeiss"] = json{{"alphaBound", R.swAlphaBound},
                               {"sumCondition", R.swSumCondition}};
    return j;
}

inline const char* to_string(IterationStatus s) {
    switch (s) {
    case IterationStatus::Converged: return "converged";
    case IterationStatus::MaxIterations: return "max-iterations";
    case IterationStatus::Stalled: return "stalled";
    }
    return "?";
}

inline json to_json(const ConstantEstimate& e) {
    return json{{"nHat", e.nHat},
                {"elResidual", e.elResidual},
                {"iterations", e.iterations},
                {"status", to_string(e.status)},
                {"history", e.history}};
}

inline json to_json(const AssemblyDiagnostics& d) {
    return json{{"totalEntries", d.totalEntries},
                {"refinedEntries", d.refinedEntries},
                {"closedFormEntries", d.closedFormEntries},
                {"minCellDistance", d.minCellDistance}};
}

inline json to_json(const ProbeReport& r) {
    json obs = json::array();
    for (auto [a, b] : r.observations) obs.push_back(json::array({a, b}));
    json j{{"name", r.name},
           {"params", to_json(r.params)},
           {"observations", obs},
           {"verdict", to_string(r.verdict)},
           {"tolerances", r.tolerances},
           {"extras", r.extras}};
    if (r.hasFit)
        j["fit"] = json{{"slope", r.fit.slope},
                        {"intercept", r.fit.intercept},
                        {"r2", r.fit.r2}};
    return j;
}

inline json to_json(const StarNormResult& s) {
    return json{{"value", s.value},
                {"argCenter", s.argCenter},
                {"argRadius", s.argRadius}};
}

inline json to_json(const ConstantRelationReport& r) {
    return json{{"predictedFactor", r.predictedFactor},
                {"halfspaceConstant", r.halfspaceConstant},
                {"ratio", r.ratio},
                {"normError", r.normError}};
}

inline void write_csv(const std::string& path, const RadialFunction& f) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("write_csv: cannot open " + path);
    out << "radius,value\n";
    for (int i = 0; i < f.grid.cells(); ++i)
        out << fmt17(f.grid.radii[i]) << ',' << fmt17(f.values[i]) << '\n';
}

inline void write_csv(const std::string& path, const BiRadialFunction& g) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("write_csv: cannot open " + path);
    out << "radiusPrime,radiusPerp,value\n";
    for (int i = 0; i < g.rows(); ++i)
        for (int j = 0; j < g.cols(); ++j)
            out << fmt17(g.prime.radii[i]) << ','
                << fmt17(g.perp.empty() ? 0.0 : g.perp.radii[j]) << ','
                << fmt17(g.at(i, j)) << '\n';
}

inline void write_observations_csv(const std::string& path,
                                   const ProbeReport& r,
                                   const char* ctrl = "control",
                                   const char* meas = "measured") {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw invalid_input("write_csv: cannot open " + path);
    out << ctrl << ',' << meas << '\n';
    for (auto [a, b] : r.observations)
        out << fmt17(a) << ',' << fmt17(b) << '\n';
}

} // namespace whls
