#include "dichoteq/scenarios.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "dichoteq/bounded.hpp"
#include "dichoteq/errors.hpp"

namespace dichoteq {

Scenario Scenario::with_window(Window w) const {
    Scenario s = *this;
    s.sys = sys.rebuilt(w);
    return s;
}

Perturbation make_perturbation(int dim, const nlohmann::json& spec) {
    const std::string family = spec.value("family", "zero");
    if (family == "zero") return Perturbation::zero(dim);
    if (family == "saturating") {
        if (!spec.contains("c")) throw InvalidParams("saturating family needs amplitudes 'c'");
        Seq c = spec.at("c").is_number() ? Seq::constant(spec.at("c").get<double>())
                                         : Seq::from_json(spec.at("c"));
        Perturbation p;
        p.bound = c;
        p.lip = c;
        p.eval = [c](int n, const Vec& x) {
            Vec y(x.size());
            const double cn = c(n);
            for (size_t i = 0; i < x.size(); ++i) y[i] = cn * std::tanh(x[i]);
            return y;
        };
        return p;
    }
    throw UnknownFamily("unknown perturbation family '" + family + "'");
}

namespace {

Window window_from(const nlohmann::json& params) {
    if (!params.contains("window")) return Window(-30, 30);
    const auto& w = params.at("window");
    return Window(w.at(0).get<int>(), w.at(1).get<int>());
}

} // namespace

Scenario make_scenario(const std::string& name, const nlohmann::json& raw_params) {
    const nlohmann::json params =
        raw_params.is_object() ? raw_params : nlohmann::json::object();
    const Window w = window_from(params);
    const int dim = 2;
    const nlohmann::json fspec = params.value("f", nlohmann::json{{"family", "zero"}});
    const nlohmann::json gspec = params.value("g", nlohmann::json{{"family", "zero"}});

    if (name == "paper_diag") {
        const double c = params.value("c", 1.0);
        if (!(c > 0.0)) throw InvalidParams("paper_diag needs c > 0");
        auto gen = [c](int n) {
            const double b = std::exp(-c / (1.0 + std::abs(n)));
            return Matrix::diagonal({b, 1.0 / b});
        };
        Matrix P(2);
        P(0, 0) = 1.0;
        Scenario s{name,
                   LinearSystem(dim, w, gen),
                   DichotomyCertificate::generalized(P, 1.0, Seq::reciprocal(c)),
                   make_perturbation(dim, fspec),
                   make_perturbation(dim, gspec),
                   {}};
        s.expected["M"] = std::exp(c) - 1.0;
        return s;
    }
    if (name == "const_alpha") {
        const double alpha = params.value("alpha", std::log(2.0));
        if (!(alpha > 0.0)) throw InvalidParams("const_alpha needs alpha > 0");
        auto gen = [alpha](int) {
            return Matrix::diagonal({std::exp(-alpha), std::exp(alpha)});
        };
        Matrix P(2);
        P(0, 0) = 1.0;
        Scenario s{name,
                   LinearSystem(dim, w, gen),
                   DichotomyCertificate::with_alpha(P, 1.0, alpha),
                   make_perturbation(dim, fspec),
                   make_perturbation(dim, gspec),
                   {}};
        s.expected["M"] = std::exp(alpha) - 1.0;
        return s;
    }
    if (name == "stable_alpha") {
        const double alpha = params.value("alpha", 2.0);
        if (!(alpha > 0.0)) throw InvalidParams("stable_alpha needs alpha > 0");
        auto gen = [alpha, dim](int) {
            return std::exp(-alpha) * Matrix::identity(dim);
        };
        Scenario s{name,
                   LinearSystem(dim, w, gen),
                   DichotomyCertificate::with_alpha(Matrix::identity(dim), 1.0, alpha),
                   make_perturbation(dim, fspec),
                   make_perturbation(dim, gspec),
                   {}};
        s.expected["M"] = 1.0 - std::exp(-alpha);
        return s;
    }
    throw UnknownFamily("unknown scenario family '" + name + "'");
}

VecSeq oracle_bounded(const LinearSystem& sys, const DichotomyCertificate& cert,
                      const VecSeq& q, const Window& window) {
    const Window wide = window.doubled();
    const LinearSystem sys2 = sys.rebuilt(wide);

    VecSeq q2;
    q2.first = wide.n_min;
    q2.vals.reserve(static_cast<size_t>(wide.length()) + 1);
    for (int n = wide.n_min; n <= wide.n_max; ++n)
        q2.vals.push_back(q.at(std::clamp(n, q.lo(), q.hi())));

    BoundedOpts opts;
    opts.verify_certificate = false;
    const BoundedSolution sol = bounded_linear(sys2, cert, q2, opts);

    VecSeq out;
    out.first = window.n_min;
    for (int n = window.n_min; n <= window.n_max + 1; ++n) out.vals.push_back(sol.values.at(n));
    return out;
}

double oracle_scalar_fixed_point(const ScalarFixedPointParams& params) {
    double z = params.guess;
    for (int it = 0; it < params.cap; ++it) {
        const double fz = params.map(z);
        if (!std::isfinite(fz))
            throw NotContractive("scalar fixed-point iteration left the finite range");
        const double step = fz - z;
        z += params.damping * step;
        if (std::fabs(step) <= params.tol * std::max(1.0, std::fabs(z))) return z;
    }
    throw NotContractive("scalar fixed-point iteration did not settle within the cap");
}

PerturbationQuotients validate_perturbation(const Perturbation& p, int dim, const Window& w,
                                            int samples, double radius, Sampler& sampler) {
    PerturbationQuotients out;
    for (int i = 0; i < samples; ++i) {
        const int n = sampler.index(w.n_min, w.n_max);
        const Vec x = sampler.box(dim, radius);
        const Vec y = sampler.box(dim, radius);
        const double F = p.bound(n);
        const double r = p.lip(n);
        if (F > 0.0)
            out.max_bound_quotient = std::max(out.max_bound_quotient, inf_norm(p(n, x)) / F);
        const double dxy = dist_inf(x, y);
        if (r > 0.0 && dxy > 1e-12)
            out.max_lip_quotient =
                std::max(out.max_lip_quotient, dist_inf(p(n, x), p(n, y)) / (r * dxy));
    }
    return out;
}

} // namespace dichoteq
