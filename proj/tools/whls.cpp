// Experiment runner: wires the parameter algebra, operator assembly,
// sharp-constant iteration, rearrangement utilities and probes behind a
// config-driven command line, and emits machine-readable reports.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "whls/serialize.hpp"

using namespace whls;

namespace {

json default_config() {
    return json{
        {"n", 2},       {"k", 1},          {"lambda", 0.7}, {"beta", 0.05},
        {"p", 4.0 / 3}, {"r", 4.0 / 3},    {"alpha", 0.0},  {"rMin", 1e-3},
        {"rMax", 100.0},{"gridM", 128},    {"tol", 1e-8},   {"maxIter", 500},
        {"seed", 12345},{"threads", 1},    {"profile", "gaussian"},
        {"gamma", 0.5}, {"tau", 2.0},
        {"epsilons", json::array({1e-1, 1e-2, 1e-3, 1e-4, 1e-5})},
        {"multistart", false}};
}

// key=value lines (with comma-separated lists) as the fallback config format
json parse_kv(const std::string& text) {
    json j = json::object();
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const auto eq = line.find('=');
        if (eq == std::string::npos) continue;
        auto trim = [](std::string s) {
            const auto a = s.find_first_not_of(" \t\r");
            const auto b = s.find_last_not_of(" \t\r");
            return (a == std::string::npos) ? std::string()
                                            : s.substr(a, b - a + 1);
        };
        const std::string key = trim(line.substr(0, eq));
        const std::string val = trim(line.substr(eq + 1));
        if (key.empty() || val.empty()) continue;
        auto scalar = [](const std::string& v) -> json {
            if (v == "true") return true;
            if (v == "false") return false;
            try {
                size_t pos = 0;
                const double d = std::stod(v, &pos);
                if (pos == v.size())
                    return (d == std::floor(d) && std::abs(d) < 1e15 &&
                            v.find_first_of(".eE") == std::string::npos)
                               ? json(std::int64_t(d))
                               : json(d);
            } catch (...) {
            }
            return v;
        };
        if (val.find(',') != std::string::npos) {
            json arr = json::array();
            std::istringstream vs(val);
            std::string item;
            while (std::getline(vs, item, ',')) arr.push_back(scalar(trim(item)));
            j[key] = arr;
        } else {
            j[key] = scalar(val);
        }
    }
    return j;
}

json load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw invalid_input("cannot open config file: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    const std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error&) {
        return parse_kv(text);
    }
}

HlsParams params_of(const json& cfg) { return params_from_json(cfg); }

RadialFunction make_profile(const std::string& name, const RadialGrid& g,
                            const HlsParams& P, unsigned seed) {
    RadialFunction f{g, std::vector<double>(g.cells(), 0.0)};
    if (name == "gaussian") {
        for (int i = 0; i < g.cells(); ++i)
            f.values[i] = std::exp(-g.radii[i] * g.radii[i]);
    } else if (name == "indicator") {
        for (int i = 0; i < g.cells(); ++i)
            if (g.radii[i] < 1.0) f.values[i] = 1.0;
    } else if (name == "power") {
        const double e = double(P.d()) / P.p * 1.01;
        for (int i = 0; i < g.cells(); ++i)
            f.values[i] = std::pow(1.0 + g.radii[i] * g.radii[i], -e);
    } else if (name == "random") {
        std::mt19937 rng(seed);
        std::uniform_real_distribution<double> U(0.0, 1.0);
        for (double& v : f.values) v = U(rng);
    } else {
        throw invalid_input("unknown profile: " + name);
    }
    return f;
}

struct RunResult {
    json results = json::object();
    json diagnostics = json::object();
    int exitCode = 0;
};

RadialGrid cfg_grid(const json& cfg, int dim) {
    return make_log_grid(dim, cfg.at("rMin").get<double>(),
                         cfg.at("rMax").get<double>(),
                         cfg.at("gridM").get<int>(), true);
}

DiscreteOperator cfg_operator(const json& cfg, const KernelSpec& spec) {
    const HlsParams& P = spec.params;
    const RadialGrid in = cfg_grid(cfg, P.d());
    const RadialGrid perp = (P.k >= 1) ? cfg_grid(cfg, P.k) : RadialGrid{};
    return build_extension(spec, in, in, perp);
}

RunResult run_params(const json& cfg, const std::string&) {
    const HlsParams P = params_of(cfg);
    RunResult rr;
    const ValidityReport v = validate(P);
    rr.results["validity"] = to_json(v);
    if (P.p > 1.0 && P.r > 1.0)
        rr.results["derived"] = to_json(derive_exponents(P));
    rr.exitCode = v.valid ? 0 : 1;
    return rr;
}

RunResult run_estimate(const json& cfg, const std::string& outDir) {
    const HlsParams P = params_of(cfg);
    const KernelSpec spec = make_kernel_spec(P);
    const DiscreteOperator op = cfg_operator(cfg, spec);
    const double tol = cfg.at("tol").get<double>();
    const int maxIter = cfg.at("maxIter").get<int>();
    const unsigned seed = cfg.at("seed").get<unsigned>();

    std::vector<std::string> starts{"gaussian"};
    if (cfg.value("multistart", false)) starts = {"gaussian", "power", "indicator"};

    RunResult rr;
    ConstantEstimate best;
    json perStart = json::array();
    for (const auto& s : starts) {
        const ConstantEstimate e =
            power_iterate(op, make_profile(s, op.inGrid, P, seed), tol, maxIter);
        perStart.push_back(json{{"init", s}, {"estimate", to_json(e)}});
        if (e.nHat > best.nHat) best = e;
    }
    rr.results["estimate"] = to_json(best);
    rr.results["starts"] = perStart;
    rr.diagnostics["assembly"] = to_json(op.diag);
    write_csv(outDir + "/fsharp.csv", best.fSharp);
    write_csv(outDir + "/gsharp.csv", best.gSharp);
    if (P.k >= 1) {
        const ConstantRelationReport cr = constant_relation_check(op, best);
        rr.results["constantRelation"] = to_json(cr);
    }
    rr.exitCode = (best.status == IterationStatus::Stalled) ? 1 : 0;
    return rr;
}

std::vector<double> cfg_epsilons(const json& cfg) {
    return cfg.at("epsilons").get<std::vector<double>>();
}

int verdict_exit(Verdict v, Verdict expected) {
    if (v != expected) return 1;
    return (v == Verdict::Diverges) ? 2 : 0;
}

RunResult run_probe(const json& cfg, const std::string& name,
                    const std::string& outDir) {
    const HlsParams P = params_of(cfg);
    RunResult rr;
    ProbeReport rep;
    Verdict expected = Verdict::Holds;
    if (name == "dyadic") {
        const RadialGrid g =
            make_log_grid(1, cfg.at("rMin").get<double>(),
                          cfg.at("rMax").get<double>(), cfg.at("gridM").get<int>(),
                          false);
        RadialFunction h{g, std::vector<double>(g.cells())};
        for (int i = 0; i < g.cells(); ++i)
            h.values[i] = std::min(g.radii[i], 1.0);
        rep = dyadic_lemma_check(h, cfg.at("gamma").get<double>(),
                                 cfg.at("tau").get<double>());
    } else if (name == "beta-sharpness") {
        rep = probe_beta_sharpness(P, cfg_epsilons(cfg));
        expected = Verdict::Diverges;
    } else if (name == "lambda-range") {
        rep = probe_lambda_range(P, cfg_epsilons(cfg));
        expected = Verdict::Diverges;
    } else if (name == "adams" || name == "sw") {
        const KernelSpec spec = make_kernel_spec(P);
        const DiscreteOperator opC = cfg_operator(cfg, spec);
        json fineCfg = cfg;
        fineCfg["gridM"] = cfg.at("gridM").get<int>() * 2;
        const DiscreteOperator opF = cfg_operator(fineCfg, spec);
        std::vector<RadialFunction> family;
        for (const char* prof : {"gaussian", "indicator", "power"})
            family.push_back(make_profile(prof, opC.inGrid, P,
                                          cfg.at("seed").get<unsigned>()));
        rep = (name == "adams") ? adams_bound_check(opC, opF, family)
                                : sw_probe(opC, opF, family);
    } else {
        throw invalid_input("unknown probe: " + name);
    }
    rr.results["probe"] = to_json(rep);
    write_observations_csv(outDir + "/observations.csv", rep);
    rr.exitCode = verdict_exit(rep.verdict, expected);
    return rr;
}

RunResult run_rearrange(const json& cfg, const std::string& outDir) {
    const HlsParams P = params_of(cfg);
    const RadialGrid g = cfg_grid(cfg, std::max(1, P.d()));
    const RadialFunction f = make_profile(cfg.at("profile").get<std::string>(), g,
                                          P, cfg.at("seed").get<unsigned>());
    const RadialFunction fs = symm_decr_rearrange(f);
    RunResult rr;
    json norms = json::object();
    for (double p : {1.0, 4.0 / 3, 2.0, 4.0}) {
        char key[16];
        std::snprintf(key, sizeof key, "p=%g", p);
        norms[key] = json{{"before", lp_norm(f, p)}, {"after", lp_norm(fs, p)}};
    }
    rr.results["norms"] = norms;
    write_csv(outDir + "/input.csv", f);
    write_csv(outDir + "/rearranged.csv", fs);
    return rr;
}

RunResult run_starnorm(const json& cfg, const std::string&) {
    const HlsParams P = params_of(cfg);
    const RadialGrid g = cfg_grid(cfg, std::max(1, P.d()));
    const RadialFunction f = make_profile(cfg.at("profile").get<std::string>(), g,
                                          P, cfg.at("seed").get<unsigned>());
    RunResult rr;
    rr.results["starNorm"] = to_json(star_norm(f, P));
    rr.results["lpNorm"] = lp_norm(f, P.p);
    return rr;
}

RunResult run_norm_equivalence(const json& cfg, const std::string& outDir) {
    const HlsParams P = params_of(cfg);
    const RadialGrid g = cfg_grid(cfg, P.d());
    const RadialFunction h = make_profile(cfg.value("profile", "indicator"), g, P,
                                          cfg.at("seed").get<unsigned>());
    const ProbeReport rep = norm_equivalence(h, P);
    RunResult rr;
    rr.results["probe"] = to_json(rep);
    write_observations_csv(outDir + "/observations.csv", rep, "scale", "ratio");
    rr.exitCode = verdict_exit(rep.verdict, Verdict::Holds);
    return rr;
}

RunResult dispatch(const std::string& op, const json& cfg,
                   const std::string& outDir);

RunResult run_batch(const json& cfg, const std::string& outDir) {
    if (!cfg.contains("experiments") || !cfg.at("experiments").is_array())
        throw invalid_input("batch config needs an 'experiments' array");
    RunResult rr;
    std::ofstream summary(outDir + "/summary.csv", std::ios::binary);
    summary << "index,op,exitCode,value,detail\n";
    json rows = json::array();
    int worst = 0;
    bool anyDiverge = false, anyError = false;
    int idx = 0;
    for (const auto& exp : cfg.at("experiments")) {
        json sub = default_config();
        sub.update(exp);
        const std::string op = exp.value("op", "params");
        std::string value = "-", detail = "-";
        int code;
        try {
            const RunResult sr = dispatch(op, sub, outDir);
            code = sr.exitCode;
            if (sr.results.contains("estimate")) {
                value = fmt17(sr.results["estimate"]["nHat"].get<double>());
                detail = fmt17(sr.results["estimate"]["elResidual"].get<double>());
            } else if (sr.results.contains("probe")) {
                value = sr.results["probe"]["verdict"].get<std::string>();
            } else if (sr.results.contains("validity")) {
                value = sr.results["validity"]["valid"].get<bool>() ? "valid"
                                                                    : "invalid";
            }
            rows.push_back(json{{"op", op}, {"exitCode", code},
                                {"results", sr.results}});
        } catch (const std::exception& ex) {
            code = 1;
            value = "error";
            detail = ex.what();
            rows.push_back(json{{"op", op}, {"exitCode", 1}, {"error", ex.what()}});
        }
        if (code == 1) anyError = true;
        if (code == 2) anyDiverge = true;
        summary << idx++ << ',' << op << ',' << code << ',' << value << ','
                << '"' << detail << '"' << '\n';
    }
    worst = anyError ? 1 : (anyDiverge ? 2 : 0);
    rr.results["experiments"] = rows;
    rr.exitCode = worst;
    return rr;
}

RunResult dispatch(const std::string& op, const json& cfg,
                   const std::string& outDir) {
    if (op == "params") return run_params(cfg, outDir);
    if (op == "estimate") return run_estimate(cfg, outDir);
    if (op == "rearrange") return run_rearrange(cfg, outDir);
    if (op == "starnorm") return run_starnorm(cfg, outDir);
    if (op == "norm-equivalence") return run_norm_equivalence(cfg, outDir);
    if (op.rfind("probe:", 0) == 0) return run_probe(cfg, op.substr(6), outDir);
    if (op == "batch") return run_batch(cfg, outDir);
    throw invalid_input("unknown operation: " + op);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"weighted-HLS numerical toolkit"};
    app.require_subcommand(1);

    std::string configPath, outDir = ".", probeName;
    int gridM = -1, threads = -1, seed = -1;
    double tol = -1.0;
    bool multistart = false;

    app.add_option("--config", configPath, "config file (JSON or key=value)");
    app.add_option("--out", outDir, "output directory");
    app.add_option("--grid-m", gridM, "cells per grid axis");
    app.add_option("--tol", tol, "convergence tolerance");
    app.add_flag("--multistart", multistart, "run all default initializations");
    app.add_option("--threads", threads, "worker threads");
    app.add_option("--seed", seed, "random seed");

    auto* cmdParams = app.add_subcommand("params", "validate and derive exponents");
    auto* cmdEstimate = app.add_subcommand("estimate", "sharp-constant iteration");
    auto* cmdProbe = app.add_subcommand("probe", "run a named probe");
    cmdProbe->add_option("name", probeName, "probe name")->required();
    auto* cmdRearrange =
        app.add_subcommand("rearrange", "symmetric decreasing rearrangement");
    auto* cmdStarnorm = app.add_subcommand("starnorm", "ball-supremum norm");
    auto* cmdNormEq =
        app.add_subcommand("norm-equivalence", "weighted vs plain kernel norms");
    auto* cmdBatch = app.add_subcommand("batch", "run a list of experiments");

    CLI11_PARSE(app, argc, argv);

    const auto t0 = std::chrono::steady_clock::now();
    json cfg = default_config();
    std::string op = "params";
    if (cmdEstimate->parsed()) op = "estimate";
    if (cmdProbe->parsed()) op = "probe:" + probeName;
    if (cmdRearrange->parsed()) op = "rearrange";
    if (cmdStarnorm->parsed()) op = "starnorm";
    if (cmdNormEq->parsed()) op = "norm-equivalence";
    if (cmdBatch->parsed()) op = "batch";

    int code = 0;
    json report;
    try {
        if (!configPath.empty()) cfg.update(load_config(configPath));
        if (gridM > 0) cfg["gridM"] = gridM;
        if (tol > 0.0) cfg["tol"] = tol;
        if (threads > 0) cfg["threads"] = threads;
        if (seed >= 0) cfg["seed"] = seed;
        if (multistart) cfg["multistart"] = true;
        cfg["op"] = op;

        const RunResult rr = dispatch(op, cfg, outDir);
        report["config"] = cfg;
        report["results"] = rr.results;
        report["diagnostics"] = rr.diagnostics;
        code = rr.exitCode;
    } catch (const std::exception& ex) {
        report["config"] = cfg;
        report["error"] = ex.what();
        code = 1;
        std::fprintf(stderr, "error: %s\n", ex.what());
    }
    report["versions"] = json{{"whls", "0.1.0"}};
    report["wallTimeMs"] =
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - t0)
            .count();

    std::ofstream out(outDir + "/report.json", std::ios::binary);
    out << report.dump(2) << '\n';
    return code;
}
