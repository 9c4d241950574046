#include "dichoteq/conjugacy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dichoteq/errors.hpp"

namespace dichoteq {

ConjugacyEngine::ConjugacyEngine(LinearSystem sys, DichotomyCertificate cert, Perturbation f,
                                 Perturbation g, EngineOpts opts)
    : sys_(std::move(sys)),
      cert_(std::move(cert)),
      f_(std::move(f)),
      g_(std::move(g)),
      r_(max_seq(f_.lip, g_.lip)),
      opts_(opts),
      cert_report_(verify_gdd(sys_, cert_, opts.cert_tol)),
      h23_(check_h2_h3(cert_, f_.bound, g_.bound, r_, sys_.window())) {
    if (!cert_report_.passed)
        throw CertificateRejected("certificate fails with relative excess " +
                                  std::to_string(cert_report_.max_violation));
    if (!(h23_.theta < 1.0))
        throw NotContractive("theta = max_n N(n, r) = " + std::to_string(h23_.theta) + " >= 1");
    backward_admissible_ = true;
    for (int k = sys_.window().n_min; k <= sys_.window().n_max; ++k) {
        if (!(inf_norm(sys_.coeff_inv(k)) * r_(k) < 1.0)) {
            backward_admissible_ = false;
            break;
        }
    }
}

AuxSolution ConjugacyEngine::solve_aux(const Perturbation& carrier, const Perturbation& added,
                                       int m, const Vec& anchor) const {
    const Window& w = sys_.window();
    const GreenSeriesOperator series(sys_, cert_);
    AuxSolution out;
    out.traj = propagate_all(sys_, carrier, m, anchor, opts_.prop);

    // carrier values enter the forcing both inside and outside the nonlinear
    // term; the outside part is fixed across sweeps
    std::vector<Vec> fixed(static_cast<size_t>(w.length()) + 1);
    for (int k = w.n_min; k <= w.n_max; ++k)
        fixed[static_cast<size_t>(k - w.n_min)] = carrier(k, out.traj.at(k));

    const size_t states = static_cast<size_t>(w.length()) + 2;
    VecSeq wseq;
    wseq.first = w.n_min;
    wseq.vals.assign(states, Vec(static_cast<size_t>(sys_.dim()), 0.0));

    const double theta = h23_.theta;
    const double threshold = theta > 1e-12 ? opts_.eps * (1.0 - theta) / theta : opts_.eps;
    double prev_diff = -1.0;
    for (int iter = 0;; ++iter) {
        if (iter >= opts_.picard_cap)
            throw IterationCapExceeded("chi/vartheta iteration cap reached at anchor index " +
                                       std::to_string(m));
        VecSeq next = series.apply([&](int k) {
            return sub(added(k, add(wseq.at(k), out.traj.at(k))),
                       fixed[static_cast<size_t>(k - w.n_min)]);
        });
        double diff = 0.0;
        for (int k = w.n_min; k <= w.n_max + 1; ++k)
            diff = std::max(diff, dist_inf(next.at(k), wseq.at(k)));
        wseq = std::move(next);
        if (prev_diff > 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + h23_.B))
            out.ratios.push_back(diff / prev_diff);
        if (diff > 1e9 * (1.0 + h23_.B))
            throw NotContractive("chi/vartheta iteration diverging at anchor index " +
                                 std::to_string(m));
        prev_diff = diff;
        if (diff <= threshold) {
            out.iters = iter + 1;
            break;
        }
    }
    out.w = std::move(wseq);
    return out;
}

AuxSolution ConjugacyEngine::solve_chi(int m, const Vec& xi) const {
    return solve_aux(f_, g_, m, xi);
}

AuxSolution ConjugacyEngine::solve_vartheta(int m, const Vec& nu) const {
    return solve_aux(g_, f_, m, nu);
}

Vec ConjugacyEngine::H(int n, const Vec& xi) const { return add(xi, solve_chi(n, xi).w.at(n)); }

Vec ConjugacyEngine::L(int n, const Vec& nu) const {
    return add(nu, solve_vartheta(n, nu).w.at(n));
}

ConjugacyEngine ConjugacyEngine::swapped() const {
    return ConjugacyEngine(sys_, cert_, g_, f_, opts_);
}

namespace {

int clamp_state(const Window& w, int n) { return std::clamp(n, w.n_min, w.n_max + 1); }

} // namespace

VerificationReport verify_equivalence(const ConjugacyEngine& engine, Sampler& sampler,
                                      const EquivalenceOpts& opts) {
    const Window& w = engine.window();
    const EngineOpts& eo = engine.opts();
    VerificationReport report;
    report.title = "equivalence";

    const double id_bound = engine.B() + engine.B_tail();

    // declared (A2)/(H1) metadata of both perturbations, probed statistically
    for (const auto& [tag, pert] : {std::pair<const char*, const Perturbation*>{"f", &engine.f()},
                                    {"g", &engine.g()}}) {
        double bound_q = 0.0, lip_q = 0.0;
        for (int i = 0; i < 64; ++i) {
            const int n = sampler.index(w.n_min, w.n_max);
            const Vec x = sampler.box(engine.dim(), opts.xi_radius);
            const Vec y = sampler.box(engine.dim(), opts.xi_radius);
            const double F = pert->bound(n), r = pert->lip(n);
            if (F > 0.0) bound_q = std::max(bound_q, inf_norm((*pert)(n, x)) / F);
            const double dxy = dist_inf(x, y);
            if (r > 0.0 && dxy > 1e-12)
                lip_q = std::max(lip_q, dist_inf((*pert)(n, x), (*pert)(n, y)) / (r * dxy));
        }
        const double cap = 1.0 + 1e-9;
        report.rows.push_back({std::string("metadata_bound_") + tag, 0, 0, "", bound_q, cap,
                               bound_q <= cap});
        report.rows.push_back({std::string("metadata_lipschitz_") + tag, 0, 0, "", lip_q, cap,
                               lip_q <= cap});
    }

    for (int i = 0; i < opts.num_points; ++i) {
        const int n = sampler.index(w.n_min, w.n_max);
        const Vec xi = sampler.box(engine.dim(), opts.xi_radius);
        const Vec nu = sampler.box(engine.dim(), opts.xi_radius);

        const Vec Hxi = engine.H(n, xi);
        report.rows.push_back({"H_minus_id_bound", n, 0, hash_args(xi),
                               dist_inf(Hxi, xi), id_bound, dist_inf(Hxi, xi) <= id_bound});
        const Vec Lnu = engine.L(n, nu);
        report.rows.push_back({"L_minus_id_bound", n, 0, hash_args(nu),
                               dist_inf(Lnu, nu), id_bound, dist_inf(Lnu, nu) <= id_bound});

        const double rt1 = dist_inf(engine.L(n, Hxi), xi);
        report.rows.push_back(
            {"round_trip_LH", n, 0, hash_args(xi), rt1, eo.round_trip_tol,
             rt1 <= eo.round_trip_tol});
        const double rt2 = dist_inf(engine.H(n, Lnu), nu);
        report.rows.push_back(
            {"round_trip_HL", n, 0, hash_args(nu), rt2, eo.round_trip_tol,
             rt2 <= eo.round_trip_tol});
    }

    const GreenSeriesOperator series(engine.sys(), engine.cert());
    const Window interior = w.interior(eo.interior_frac);

    for (int s = 0; s < opts.num_solutions; ++s) {
        const int m = sampler.index(w.n_min, w.n_max);
        const Vec xi = sampler.box(engine.dim(), opts.xi_radius);

        // trajectory of the f-system, mapped pointwise through H
        const VecSeq x = propagate_all(engine.sys(), engine.f(), m, xi, eo.prop);
        VecSeq y;
        y.first = x.first;
        y.vals.resize(x.vals.size());
        for (int k = w.n_min; k <= w.n_max + 1; ++k) y.at(k) = engine.H(k, x.at(k));
        if (opts.fault_injection && s == opts.num_solutions / 2) {
            const int mid = (interior.n_min + interior.n_max) / 2;
            y.at(mid)[0] += opts.fault_magnitude;
        }
        const double resH = solution_residual(engine.sys(), engine.g(), y);
        report.rows.push_back({"solution_map_residual_H", m, 0, hash_args(xi), resH,
                               eo.residual_tol, resH <= eo.residual_tol});

        // series identity along the mapped trajectory
        const VecSeq rhs = series.apply([&](int k) {
            return sub(engine.g()(k, y.at(k)), engine.f()(k, x.at(k)));
        });
        for (int p = 0; p < opts.hom1_probes; ++p) {
            const int n = sampler.index(interior.n_min, interior.n_max);
            const double d = dist_inf(add(rhs.at(n), x.at(n)), y.at(n));
            report.rows.push_back({"series_identity_H", n, m, hash_args(xi), d,
                                   eo.residual_tol, d <= eo.residual_tol});
        }

        // trajectory of the g-system, mapped through L
        const int m2 = sampler.index(w.n_min, w.n_max);
        const Vec nu = sampler.box(engine.dim(), opts.xi_radius);
        const VecSeq ytraj = propagate_all(engine.sys(), engine.g(), m2, nu, eo.prop);
        VecSeq xmap;
        xmap.first = ytraj.first;
        xmap.vals.resize(ytraj.vals.size());
        for (int k = w.n_min; k <= w.n_max + 1; ++k) xmap.at(k) = engine.L(k, ytraj.at(k));
        const double resL = solution_residual(engine.sys(), engine.f(), xmap);
        report.rows.push_back({"solution_map_residual_L", m2, 0, hash_args(nu), resL,
                               eo.residual_tol, resL <= eo.residual_tol});
    }

    report.extra["B"] = engine.B();
    report.extra["B_tail"] = engine.B_tail();
    report.extra["theta"] = engine.theta();
    report.extra["theta_tail"] = engine.theta_tail();
    report.extra["fault_injection"] = opts.fault_injection;
    return report;
}

VerificationReport verify_flow_identity(const ConjugacyEngine& engine, Sampler& sampler,
                                        const FlowIdentityOpts& opts) {
    if (!engine.backward_admissible())
        throw BackwardNotContractive(
            "flow-identity check needs backward-admissible trajectories");
    const Window& w = engine.window();
    VerificationReport report;
    report.title = "flow_identity";

    for (int i = 0; i < opts.num_samples; ++i) {
        const int m = sampler.index(w.n_min + opts.max_offset, w.n_max - opts.max_offset);
        const int n = clamp_state(w, m + sampler.index(-opts.max_offset, opts.max_offset));
        const Vec xi = sampler.box(engine.dim(), opts.xi_radius);

        const AuxSolution a = engine.solve_chi(m, xi);
        const Vec via_m = a.w.at(n);
        const Vec via_n = engine.chi(n, n, a.traj.at(n));
        const double d1 = dist_inf(via_m, via_n);
        report.rows.push_back(
            {"flow_identity_chi", n, m, hash_args(xi), d1, opts.tol, d1 <= opts.tol});

        const Vec nu = sampler.box(engine.dim(), opts.xi_radius);
        const AuxSolution b = engine.solve_vartheta(m, nu);
        const double d2 = dist_inf(b.w.at(n), engine.vartheta(n, n, b.traj.at(n)));
        report.rows.push_back(
            {"flow_identity_vartheta", n, m, hash_args(nu), d2, opts.tol, d2 <= opts.tol});
    }
    return report;
}

double gronwall_bound(const LinearSystem& sys, const Perturbation& f, int k, int n,
                      double delta) {
    const Matrix I = Matrix::identity(sys.dim());
    double s = 0.0;
    if (n > k)
        for (int p = k; p <= n - 1; ++p) s += inf_norm(sys.coeff(p) - I) + f.lip(p);
    else
        for (int p = n; p <= k - 1; ++p) s += inf_norm(sys.coeff(p) - I) + f.lip(p);
    return delta * std::exp(s);
}

double gamma(const ConjugacyEngine& engine, int n, int ell) {
    if (ell < 1) throw InvalidParams("gamma reach ell must be >= 1");
    const Window& w = engine.window();
    if (n - ell < w.n_min || n + ell > w.n_max)
        throw WindowTooNarrow("gamma(n, ell) span [" + std::to_string(n - ell) + "," +
                              std::to_string(n + ell) + "] leaves the window");
    const LinearSystem& sys = engine.sys();
    const DichotomyCertificate& cert = engine.cert();
    const Seq& r = engine.r_seq();
    const Matrix I = Matrix::identity(sys.dim());

    double total = 0.0;
    for (int k = n - ell; k <= n - 1; ++k) {
        double growth = 0.0;
        for (int l = k; l <= n - 1; ++l) growth += inf_norm(sys.coeff(l) - I) + r(l);
        total += series_weight(cert, n, k) * r(k) * std::exp(growth);
    }
    for (int k = n; k <= n + ell - 1; ++k) {
        double growth = 0.0;
        for (int l = n; l <= k - 1; ++l) growth += inf_norm(sys.coeff(l) - I) + r(l);
        total += series_weight(cert, n, k) * r(k) * std::exp(growth);
    }
    return total;
}

HolderParams holder_params(double K, double F, double G, double alpha, double M, double r) {
    if (!(alpha > 0.0)) throw InvalidParams("alpha must be positive");
    HolderParams hp;
    hp.K = K;
    hp.F = F;
    hp.G = G;
    hp.alpha = alpha;
    hp.M = M;
    hp.r = r;
    const double e = std::exp(-alpha);
    const double ratio = (1.0 + e) / (1.0 - e);
    hp.theta = K * r * ratio;
    hp.B = K * (F + G) * ratio;
    hp.theta_ok = hp.theta < 1.0;
    if (hp.theta_ok) {
        hp.D1 = 1.0 + 2.0 * K * (F + G) / ((1.0 - e) * (1.0 - hp.theta));
        hp.D2 = 2.0 * hp.theta / (1.0 - hp.theta);
    } else {
        hp.D1 = hp.D2 = std::numeric_limits<double>::infinity();
    }
    hp.exponent = 1.0 - (M + r) / alpha;
    hp.applicable = hp.theta_ok && (M + r < alpha);
    return hp;
}

ModulusTable continuity_modulus(const ConjugacyEngine& engine, int n, const Vec& xi,
                                const std::vector<double>& deltas,
                                const std::vector<Vec>& directions,
                                const std::optional<HolderParams>& hp) {
    for (double d : deltas)
        if (!(d > 0.0 && d < 1.0)) throw InvalidParams("deltas must lie in (0, 1)");
    ModulusTable table;
    table.holder_applicable = hp.has_value() && hp->applicable;

    const Vec base = engine.H(n, xi);
    std::vector<double> worst_per_delta(deltas.size(), 0.0);
    for (size_t di = 0; di < deltas.size(); ++di) {
        const double delta = deltas[di];
        for (size_t ui = 0; ui < directions.size(); ++ui) {
            const Vec shifted = engine.H(n, add(xi, scale(delta, directions[ui])));
            ModulusRow row;
            row.delta = delta;
            row.direction = static_cast<int>(ui);
            row.measured = dist_inf(shifted, base);
            if (table.holder_applicable) {
                row.bound = (hp->D1 + hp->D2) * std::pow(delta, hp->exponent);
                row.within = row.measured <= row.bound;
            } else {
                row.bound = std::numeric_limits<double>::quiet_NaN();
                row.within = true;
            }
            table.all_within_bound = table.all_within_bound && row.within;
            worst_per_delta[di] = std::max(worst_per_delta[di], row.measured);
            table.rows.push_back(row);
        }
    }

    // least-squares slope of log(worst modulus) against log(delta)
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int used = 0;
    for (size_t i = 0; i < deltas.size(); ++i) {
        if (worst_per_delta[i] <= 0.0) continue;
        const double x = std::log(deltas[i]);
        const double y = std::log(worst_per_delta[i]);
        sx += x;
        sy += y;
        sxx += x * x;
        sxy += x * y;
        ++used;
    }
    if (used >= 2) {
        const double denom = used * sxx - sx * sx;
        table.fitted_slope = denom != 0.0 ? (used * sxy - sx * sy) / denom : 0.0;
    }
    return table;
}

} // namespace dichoteq
