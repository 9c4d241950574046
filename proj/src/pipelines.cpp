#include "dichoteq/pipelines.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>

#include "dichoteq/bounded.hpp"
#include "dichoteq/conjugacy.hpp"
#include "dichoteq/errors.hpp"

namespace dichoteq {

namespace {

double positive(const nlohmann::json& j, const char* key, double fallback) {
    if (!j.contains(key)) return fallback;
    const double v = j.at(key).get<double>();
    if (!(v > 0.0)) throw ConfigError(std::string(key) + " must be positive");
    return v;
}

} // namespace

RunConfig load_config(const nlohmann::json& doc) {
    if (!doc.is_object()) throw ConfigError("config must be a JSON object");
    RunConfig cfg;

    if (!doc.contains("window")) throw ConfigError("config needs a window [lo, hi]");
    {
        const auto& w = doc.at("window");
        if (!w.is_array() || w.size() != 2) throw ConfigError("window must be [lo, hi]");
        try {
            cfg.window = Window(w.at(0).get<int>(), w.at(1).get<int>());
        } catch (const InvalidParams& e) {
            throw ConfigError(e.what());
        }
    }
    if (cfg.window.length() < 8) throw ConfigError("window length must be at least 8");

    if (doc.contains("scenario")) {
        const auto& sc = doc.at("scenario");
        cfg.scenario_name = sc.at("name").get<std::string>();
        cfg.scenario_params = sc.value("params", nlohmann::json::object());
        if (doc.contains("certificate")) cfg.inline_certificate = doc.at("certificate");
    } else if (doc.contains("system")) {
        cfg.inline_system = doc.at("system");
        if (!doc.contains("certificate"))
            throw ConfigError("inline system needs an inline certificate");
        cfg.inline_certificate = doc.at("certificate");
        cfg.scenario_params = nlohmann::json::object();
        if (doc.contains("f")) cfg.scenario_params["f"] = doc.at("f");
        if (doc.contains("g")) cfg.scenario_params["g"] = doc.at("g");
    } else {
        throw ConfigError("config needs either a scenario or an inline system");
    }
    cfg.scenario_params["window"] = {cfg.window.n_min, cfg.window.n_max};

    const nlohmann::json tol = doc.value("tolerances", nlohmann::json::object());
    cfg.eps = positive(tol, "eps", cfg.eps);
    cfg.round_trip_tol = positive(tol, "round_trip_tol", cfg.round_trip_tol);
    cfg.residual_tol = positive(tol, "residual_tol", cfg.residual_tol);
    cfg.cert_tol = positive(tol, "cert_tol", cfg.cert_tol);

    const nlohmann::json smp = doc.value("sampling", nlohmann::json::object());
    cfg.seed = smp.value("seed", cfg.seed);
    cfg.num_points = smp.value("num_points", cfg.num_points);
    cfg.num_solutions = smp.value("num_solutions", cfg.num_solutions);
    cfg.num_flow_samples = smp.value("num_flow_samples", cfg.num_flow_samples);
    cfg.max_offset = smp.value("max_offset", cfg.max_offset);
    cfg.xi_radius = smp.value("xi_radius", cfg.xi_radius);
    if (smp.contains("deltas")) cfg.deltas = smp.at("deltas").get<std::vector<double>>();
    cfg.num_directions = smp.value("num_directions", cfg.num_directions);
    cfg.modulus_points = smp.value("modulus_points", cfg.modulus_points);
    for (double d : cfg.deltas)
        if (!(d > 0.0 && d < 1.0)) throw ConfigError("deltas must lie in (0, 1)");

    const nlohmann::json checks = doc.value("checks", nlohmann::json::object());
    if (checks.contains("alphas")) cfg.alphas = checks.at("alphas").get<std::vector<double>>();
    cfg.stepanov_L = checks.value("stepanov_L", cfg.stepanov_L);
    cfg.fault_injection = checks.value("fault_injection", cfg.fault_injection);

    const nlohmann::json bounded = doc.value("bounded", nlohmann::json::object());
    if (bounded.contains("forcing")) cfg.forcing = bounded.at("forcing");
    if (bounded.contains("nonlinear")) cfg.nonlinear = bounded.at("nonlinear");

    cfg.out_dir = doc.value("output", nlohmann::json::object()).value("dir", cfg.out_dir);
    return cfg;
}

Scenario build_scenario(const RunConfig& cfg) {
    if (!cfg.scenario_name.empty()) {
        try {
            Scenario s = make_scenario(cfg.scenario_name, cfg.scenario_params);
            if (cfg.inline_certificate)
                s.cert = DichotomyCertificate::from_json(*cfg.inline_certificate);
            return s;
        } catch (const UnknownFamily& e) {
            throw ConfigError(e.what());
        } catch (const InvalidParams& e) {
            throw ConfigError(e.what());
        }
    }
    const nlohmann::json& sysj = *cfg.inline_system;
    const int dim = sysj.at("dim").get<int>();
    const auto tables = sysj.at("matrices").get<std::vector<std::vector<double>>>();
    if (tables.size() != static_cast<size_t>(cfg.window.length()) + 1)
        throw ConfigError("inline system must list one matrix per window index");
    std::vector<Matrix> mats;
    mats.reserve(tables.size());
    for (const auto& flat : tables) {
        if (flat.size() != static_cast<size_t>(dim) * dim)
            throw ConfigError("inline matrix has wrong size");
        Matrix A(dim);
        A.data() = flat;
        mats.push_back(std::move(A));
    }
    Scenario s{"inline",
               LinearSystem::from_table(cfg.window, std::move(mats)),
               DichotomyCertificate::from_json(*cfg.inline_certificate),
               make_perturbation(dim, cfg.scenario_params.value(
                                          "f", nlohmann::json{{"family", "zero"}})),
               make_perturbation(dim, cfg.scenario_params.value(
                                          "g", nlohmann::json{{"family", "zero"}})),
               {}};
    return s;
}

namespace {

nlohmann::json config_echo(const RunConfig& cfg, const char* command) {
    nlohmann::json j;
    j["tool"] = "dichoteq";
    j["command"] = command;
    j["seed"] = cfg.seed;
    j["window"] = {cfg.window.n_min, cfg.window.n_max};
    j["scenario"] = cfg.scenario_name.empty() ? "inline" : cfg.scenario_name;
    j["tolerances"] = {{"eps", cfg.eps},
                       {"round_trip_tol", cfg.round_trip_tol},
                       {"residual_tol", cfg.residual_tol},
                       {"cert_tol", cfg.cert_tol}};
    return j;
}

void finalize(PipelineResult& result, const RunConfig& cfg, const char* command) {
    nlohmann::json j = config_echo(cfg, command);
    j.update(result.detail.summary());
    result.summary = std::move(j);
    result.exit_code = result.detail.all_passed() ? 0 : 1;
}

VecSeq forcing_from_config(const RunConfig& cfg, int dim) {
    VecSeq q;
    q.first = cfg.window.n_min;
    const size_t count = static_cast<size_t>(cfg.window.length()) + 1;
    if (!cfg.forcing || cfg.forcing->contains("constant")) {
        Vec value(static_cast<size_t>(dim), 1.0);
        if (cfg.forcing) {
            const auto& c = cfg.forcing->at("constant");
            if (c.is_number())
                value.assign(static_cast<size_t>(dim), c.get<double>());
            else
                value = c.get<Vec>();
        }
        if (value.size() != static_cast<size_t>(dim))
            throw ConfigError("constant forcing has wrong dimension");
        q.vals.assign(count, value);
        return q;
    }
    if (cfg.forcing->contains("table")) {
        const auto rows = cfg.forcing->at("table").get<std::vector<Vec>>();
        if (rows.size() != count)
            throw ConfigError("forcing table must cover every window index");
        for (const Vec& row : rows)
            if (row.size() != static_cast<size_t>(dim))
                throw ConfigError("forcing table row has wrong dimension");
        q.vals = rows;
        return q;
    }
    throw ConfigError("forcing must be {\"constant\": ...} or {\"table\": ...}");
}

} // namespace

PipelineResult run_certify(const RunConfig& cfg) {
    const Scenario sc = build_scenario(cfg);
    PipelineResult result;
    VerificationReport& rep = result.detail;
    rep.title = "certify";

    const CertReport cr = verify_gdd(sc.sys, sc.cert, cfg.cert_tol);
    rep.rows.push_back({"verify_gdd", cr.worst_pair.first, cr.worst_pair.second, "",
                        cr.max_violation, cfg.cert_tol, cr.passed});

    rep.rows.push_back({"divergence_consistent", 0, 0, "",
                        std::min(cr.trend.forward_tail_rate, cr.trend.backward_tail_rate), 0.01,
                        cr.trend.consistent});

    const bool claimed_alpha = sc.cert.kind == DichotomyCertificate::Kind::alpha;
    if (claimed_alpha) {
        const CertReport er = verify_ed(sc.sys, sc.cert, cfg.cert_tol);
        rep.rows.push_back({"verify_ed", er.worst_pair.first, er.worst_pair.second, "",
                            er.max_violation, cfg.cert_tol, er.passed});
    }
    // The segment scan runs over the underlying rate sequence: for a named
    // scenario whose certificate was overridden by a constant-rate claim,
    // that is the scenario's own rates. A violating segment disproves the
    // claim; for a generalized certificate the scan is a plain diagnostic.
    DichotomyCertificate rate_source = sc.cert;
    if (!cfg.scenario_name.empty() && cfg.inline_certificate)
        rate_source = make_scenario(cfg.scenario_name, cfg.scenario_params).cert;
    std::vector<double> alphas = cfg.alphas;
    if (claimed_alpha) alphas.insert(alphas.begin(), sc.cert.alpha);
    for (const AlphaRejectionRow& row :
         alpha_rejection_scan(rate_source, alphas, sc.sys.window())) {
        const bool claim_broken = claimed_alpha && row.alpha <= sc.cert.alpha && row.found;
        rep.rows.push_back({"alpha_rejection", row.m, row.T,
                            hash_args({row.alpha}), row.found ? row.average : 0.0, row.alpha,
                            !claim_broken});
    }

    const H23Result h23 =
        check_h2_h3(sc.cert, sc.f.bound, sc.g.bound, max_seq(sc.f.lip, sc.g.lip),
                    sc.sys.window());
    rep.rows.push_back({"H2_bound_finite", h23.B_argmax, 0, "", h23.B,
                        std::numeric_limits<double>::max(), std::isfinite(h23.B)});
    rep.rows.push_back({"H3_contraction", h23.theta_argmax, 0, "",
                        h23.theta + h23.theta_tail, 1.0, h23.passed});

    double stepanov = std::numeric_limits<double>::quiet_NaN();
    try {
        stepanov = stepanov_norm(max_seq(sc.f.lip, sc.g.lip), cfg.stepanov_L, sc.sys.window());
        rep.rows.push_back({"stepanov_norm", 0, cfg.stepanov_L, "", stepanov,
                            std::numeric_limits<double>::max(), true});
    } catch (const WindowTooNarrow& e) {
        throw ConfigError(e.what());
    }

    rep.extra["M"] = sc.sys.sup_deviation();
    rep.extra["B"] = h23.B;
    rep.extra["B_tail"] = h23.B_tail;
    rep.extra["theta"] = h23.theta;
    rep.extra["theta_tail"] = h23.theta_tail;
    rep.extra["stepanov"] = stepanov;
    rep.extra["divergence_forward"] = cr.trend.forward_label;
    rep.extra["divergence_backward"] = cr.trend.backward_label;

    finalize(result, cfg, "certify");
    return result;
}

PipelineResult run_bounded(const RunConfig& cfg) {
    const Scenario sc = build_scenario(cfg);
    PipelineResult result;
    VerificationReport& rep = result.detail;
    rep.title = "bounded";

    BoundedOpts opts;
    opts.cert_tol = cfg.cert_tol;
    const VecSeq q = forcing_from_config(cfg, sc.sys.dim());
    BoundedSolution lin;
    try {
        lin = bounded_linear(sc.sys, sc.cert, q, opts);
    } catch (const CertificateRejected& e) {
        rep.rows.push_back({"certificate_accepted", 0, 0, "", 1.0, 0.0, false});
        rep.extra["engine_error"] = e.what();
        finalize(result, cfg, "bounded");
        return result;
    }
    rep.rows.push_back({"bounded_linear_residual", 0, 0, "", lin.residual_interior,
                        cfg.residual_tol, lin.residual_interior <= cfg.residual_tol});
    rep.rows.push_back({"bounded_linear_sup_vs_N", 0, 0, "", lin.sup_norm, lin.n_bound,
                        lin.within_n_bound});

    const VecSeq oracle = oracle_bounded(sc.sys, sc.cert, q, sc.sys.window());
    const Window interior = sc.sys.window().interior();
    double worst = 0.0, worst_bound = 0.0;
    bool oracle_ok = true;
    for (int n = interior.n_min; n <= interior.n_max; ++n) {
        const double d = dist_inf(lin.values.at(n), oracle.at(n));
        const double t = lin.tail_at[static_cast<size_t>(n - lin.values.lo())] +
                         1e-13 * std::max(1.0, inf_norm(oracle.at(n)));
        if (d > worst) {
            worst = d;
            worst_bound = t;
        }
        oracle_ok = oracle_ok && d <= t;
    }
    rep.rows.push_back(
        {"oracle_discrepancy_vs_tail", 0, 0, "", worst, worst_bound, oracle_ok});

    rep.extra["tail_budget"] = lin.tail_budget;
    rep.extra["sup_norm"] = lin.sup_norm;

    if (cfg.nonlinear) {
        const double amp = positive(*cfg.nonlinear, "amp", 0.2);
        const double offset = cfg.nonlinear->value("offset", 1.0);
        auto qfun = [amp, offset](int, const Vec& z) {
            Vec y(z.size());
            for (size_t i = 0; i < z.size(); ++i) y[i] = amp * std::tanh(z[i]) + offset;
            return y;
        };
        PicardOpts popts;
        popts.cert_tol = cfg.cert_tol;
        popts.verify_certificate = false; // already verified above
        const BoundedSolution non =
            bounded_nonlinear(sc.sys, sc.cert, qfun, Seq::constant(amp + std::fabs(offset)),
                              Seq::constant(amp), cfg.eps, popts);
        rep.rows.push_back({"picard_residual", 0, 0, "", non.residual_interior,
                            cfg.residual_tol, non.residual_interior <= cfg.residual_tol});
        double worst_ratio = 0.0;
        for (double rho : non.contraction_ratios) worst_ratio = std::max(worst_ratio, rho);
        rep.rows.push_back({"picard_ratio", 0, 0, "", worst_ratio, non.theta + 0.05,
                            worst_ratio <= non.theta + 0.05});
        rep.rows.push_back({"picard_sup_vs_majorant", 0, 0, "", non.sup_norm,
                            non.series_majorant, non.sup_norm <= non.series_majorant});
        rep.extra["picard_iters"] = non.picard_iters;
        rep.extra["theta"] = non.theta;
        rep.extra["b_tilde"] = non.b_tilde;
    }

    finalize(result, cfg, "bounded");
    return result;
}

namespace {

/// A certificate or contraction hypothesis failing at engine construction is
/// a check outcome (exit 1), not a numerical breakdown (exit 3).
std::optional<ConjugacyEngine> try_engine(const Scenario& sc, const EngineOpts& eopts,
                                          VerificationReport& rep) {
    std::optional<ConjugacyEngine> engine;
    try {
        engine.emplace(sc.sys, sc.cert, sc.f, sc.g, eopts);
    } catch (const CertificateRejected& e) {
        rep.rows.push_back({"certificate_accepted", 0, 0, "", 1.0, 0.0, false});
        rep.extra["engine_error"] = e.what();
    } catch (const NotContractive& e) {
        rep.rows.push_back({"H3_contraction", 0, 0, "", 1.0, 1.0, false});
        rep.extra["engine_error"] = e.what();
    }
    return engine;
}

} // namespace

PipelineResult run_verify(const RunConfig& cfg) {
    const Scenario sc = build_scenario(cfg);
    EngineOpts eopts;
    eopts.eps = cfg.eps;
    eopts.cert_tol = cfg.cert_tol;
    eopts.round_trip_tol = cfg.round_trip_tol;
    eopts.residual_tol = cfg.residual_tol;

    Sampler sampler(cfg.seed);
    PipelineResult result;
    result.detail.title = "verify";

    std::optional<ConjugacyEngine> maybe = try_engine(sc, eopts, result.detail);
    if (!maybe) {
        finalize(result, cfg, "verify");
        return result;
    }
    const ConjugacyEngine& engine = *maybe;

    EquivalenceOpts eq;
    eq.num_points = cfg.num_points;
    eq.num_solutions = cfg.num_solutions;
    eq.xi_radius = cfg.xi_radius;
    eq.fault_injection = cfg.fault_injection;
    result.detail.append(verify_equivalence(engine, sampler, eq));

    if (engine.backward_admissible()) {
        FlowIdentityOpts fl;
        fl.num_samples = cfg.num_flow_samples;
        fl.max_offset = cfg.max_offset;
        fl.xi_radius = cfg.xi_radius;
        fl.tol = cfg.round_trip_tol;
        result.detail.append(verify_flow_identity(engine, sampler, fl));
        result.detail.extra["flow_identity_checked"] = true;
    } else {
        result.detail.extra["flow_identity_checked"] = false;
    }

    finalize(result, cfg, "verify");
    return result;
}

PipelineResult run_modulus(const RunConfig& cfg) {
    const Scenario sc = build_scenario(cfg);
    EngineOpts eopts;
    eopts.eps = cfg.eps;
    eopts.cert_tol = cfg.cert_tol;

    PipelineResult result;
    VerificationReport& rep = result.detail;
    rep.title = "modulus";

    std::optional<ConjugacyEngine> maybe = try_engine(sc, eopts, rep);
    if (!maybe) {
        finalize(result, cfg, "modulus");
        return result;
    }
    const ConjugacyEngine& engine = *maybe;
    const Window& w = engine.window();

    std::optional<HolderParams> hp;
    if (sc.cert.kind == DichotomyCertificate::Kind::alpha) {
        const double F = sc.f.bound.max_on(w.n_min, w.n_max);
        const double G = sc.g.bound.max_on(w.n_min, w.n_max);
        const double r = engine.r_seq().max_on(w.n_min, w.n_max);
        hp = holder_params(sc.cert.K, F, G, sc.cert.alpha, sc.sys.sup_deviation(), r);
    }

    Sampler sampler(cfg.seed);
    std::vector<Vec> dirs;
    for (int i = 0; i < cfg.num_directions; ++i) dirs.push_back(sampler.unit_inf(engine.dim()));

    const Window interior = w.interior();
    std::vector<double> uniform_worst(cfg.deltas.size(), 0.0);
    std::string ladder_csv = "delta,direction,anchor,modulus,bound\n";
    for (int p = 0; p < cfg.modulus_points; ++p) {
        const int n = sampler.index(interior.n_min, interior.n_max);
        const Vec xi = sampler.box(engine.dim(), cfg.xi_radius);
        const ModulusTable table = continuity_modulus(engine, n, xi, cfg.deltas, dirs, hp);
        for (const ModulusRow& row : table.rows) {
            rep.rows.push_back({"modulus", n, row.direction, hash_args(xi), row.measured,
                                row.bound, row.within});
            ladder_csv += format_double(row.delta) + ',' + std::to_string(row.direction) +
                          ',' + std::to_string(n) + ',' + format_double(row.measured) + ',' +
                          format_double(row.bound) + '\n';
            for (size_t di = 0; di < cfg.deltas.size(); ++di)
                if (cfg.deltas[di] == row.delta)
                    uniform_worst[di] = std::max(uniform_worst[di], row.measured);
        }
        if (hp && hp->applicable)
            rep.rows.push_back({"modulus_slope", n, 0, hash_args(xi), table.fitted_slope,
                                hp->exponent - 0.1, table.fitted_slope >= hp->exponent - 0.1});
        else
            rep.rows.push_back(
                {"modulus_slope", n, 0, hash_args(xi), table.fitted_slope, 0.0, true});
    }

    // uniform-continuity probe: the worst modulus per delta over the sampled
    // anchors, which must shrink (up to twice the solver accuracy) with delta
    std::vector<size_t> order(cfg.deltas.size());
    for (size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::sort(order.begin(), order.end(),
              [&](size_t a, size_t b) { return cfg.deltas[a] > cfg.deltas[b]; });
    bool monotone = true;
    for (size_t i = 1; i < order.size(); ++i)
        monotone = monotone &&
                   uniform_worst[order[i]] <= uniform_worst[order[i - 1]] + 2.0 * cfg.eps;
    for (size_t i = 0; i < order.size(); ++i)
        rep.rows.push_back({"uniform_modulus", 0, static_cast<int>(i), "",
                            uniform_worst[order[i]], 0.0, true});
    rep.rows.push_back({"uniform_modulus_monotone", 0, 0, "", monotone ? 1.0 : 0.0, 1.0,
                        monotone});

    if (hp) {
        rep.extra["holder"] = {{"alpha", hp->alpha},   {"theta", hp->theta},
                               {"B", hp->B},           {"D1", hp->D1},
                               {"D2", hp->D2},         {"exponent", hp->exponent},
                               {"M", hp->M},           {"r", hp->r},
                               {"applicable", hp->applicable}};
    } else {
        rep.extra["holder"] = {{"applicable", false}, {"reason", "generalized certificate"}};
    }

    result.extra_files.emplace_back("modulus.csv", std::move(ladder_csv));
    finalize(result, cfg, "modulus");
    return result;
}

void write_outputs(const PipelineResult& result, const std::string& out_dir) {
    namespace fs = std::filesystem;
    fs::create_directories(out_dir);
    {
        std::ofstream js(fs::path(out_dir) / "summary.json", std::ios::binary);
        js << result.summary.dump(2) << '\n';
    }
    {
        std::ofstream csv(fs::path(out_dir) / "detail.csv", std::ios::binary);
        result.detail.write_csv(csv);
    }
    for (const auto& [name, content] : result.extra_files) {
        std::ofstream extra(fs::path(out_dir) / name, std::ios::binary);
        extra << content;
    }
}

} // namespace dichoteq
