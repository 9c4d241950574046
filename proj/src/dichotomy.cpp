#include "dichoteq/dichotomy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dichoteq/errors.hpp"

namespace dichoteq {

DichotomyCertificate DichotomyCertificate::generalized(Matrix P, double K, Seq a,
                                                       int base_index) {
    DichotomyCertificate c;
    c.P = std::move(P);
    c.K = K;
    c.a = std::move(a);
    c.kind = Kind::generalized;
    c.base_index = base_index;
    return c;
}

DichotomyCertificate DichotomyCertificate::with_alpha(Matrix P, double K, double alpha,
                                                      int base_index) {
    if (!(alpha > 0.0)) throw InvalidParams("alpha must be positive");
    DichotomyCertificate c;
    c.P = std::move(P);
    c.K = K;
    c.a = Seq::constant(alpha);
    c.kind = Kind::alpha;
    c.alpha = alpha;
    c.base_index = base_index;
    return c;
}

void DichotomyCertificate::require_projection(double tol) const {
    const double defect = inf_norm(P * P - P);
    if (!(defect <= tol))
        throw NotAProjection("||P^2 - P|| = " + std::to_string(defect) + " exceeds " +
                             std::to_string(tol));
}

void DichotomyCertificate::require_rates(const Window& w) const {
    for (int j = w.n_min; j <= w.n_max; ++j) {
        const double aj = a(j);
        if (aj < 0.0)
            throw InvalidParams("rate a_" + std::to_string(j) + " = " + std::to_string(aj) +
                                " is negative");
        if (kind == Kind::alpha && aj != alpha)
            throw InvalidParams("alpha certificate with non-constant rate at j = " +
                                std::to_string(j));
    }
    if (!(K >= 1.0)) throw InvalidParams("certificate constant K must be >= 1");
}

nlohmann::json DichotomyCertificate::to_json() const {
    nlohmann::json j;
    j["P"] = P.data();
    j["dim"] = P.size();
    j["K"] = K;
    j["a"] = a.to_json();
    j["kind"] = kind == Kind::alpha ? "alpha" : "generalized";
    if (kind == Kind::alpha) j["alpha"] = alpha;
    j["base_index"] = base_index;
    return j;
}

DichotomyCertificate DichotomyCertificate::from_json(const nlohmann::json& j) {
    const auto flat = j.at("P").get<std::vector<double>>();
    int dim = j.contains("dim") ? j.at("dim").get<int>()
                                : static_cast<int>(std::lround(std::sqrt(double(flat.size()))));
    if (dim < 1 || static_cast<size_t>(dim) * dim != flat.size())
        throw ConfigError("certificate P is not a square row-major matrix");
    Matrix P(dim);
    P.data() = flat;
    const double K = j.at("K").get<double>();
    const int base = j.value("base_index", 0);
    const std::string kind = j.value("kind", "generalized");
    if (kind == "alpha") {
        double alpha = j.contains("alpha") ? j.at("alpha").get<double>()
                                           : Seq::from_json(j.at("a"))(0);
        return with_alpha(std::move(P), K, alpha, base);
    }
    if (kind != "generalized") throw ConfigError("unknown certificate kind '" + kind + "'");
    return generalized(std::move(P), K, Seq::from_json(j.at("a")), base);
}

double pair_weight(const DichotomyCertificate& cert, int n, int m) {
    const int lo = std::min(n, m), hi = std::max(n, m);
    double s = 0.0;
    for (int j = lo; j < hi; ++j) s += cert.a(j);
    return cert.K * std::exp(-s);
}

double series_weight(const DichotomyCertificate& cert, int n, int m) {
    double s = 0.0;
    if (m < n)
        for (int j = m + 1; j <= n; ++j) s += cert.a(j);
    else
        for (int j = n; j <= m + 1; ++j) s += cert.a(j);
    return cert.K * std::exp(-s);
}

std::vector<Matrix> conjugated_projectors(const LinearSystem& sys,
                                          const DichotomyCertificate& cert) {
    const Window& w = sys.window();
    w.require_state(cert.base_index);
    std::vector<Matrix> proj(static_cast<size_t>(w.length()) + 2);
    auto slot = [&](int k) -> Matrix& { return proj[static_cast<size_t>(k - w.n_min)]; };
    slot(cert.base_index) = cert.P;
    for (int k = cert.base_index; k <= w.n_max; ++k)
        slot(k + 1) = sys.coeff(k) * slot(k) * sys.coeff_inv(k);
    for (int k = cert.base_index - 1; k >= w.n_min; --k)
        slot(k) = sys.coeff_inv(k) * slot(k + 1) * sys.coeff(k);
    return proj;
}

Matrix green(const LinearSystem& sys, const DichotomyCertificate& cert, int n, int m) {
    const Window& w = sys.window();
    w.require_state(n);
    w.require_state(m);
    const std::vector<Matrix> proj = conjugated_projectors(sys, cert);
    const Matrix& Pm = proj[static_cast<size_t>(m - w.n_min)];
    if (n >= m) {
        Matrix X = Pm;
        for (int k = m; k < n; ++k) X = sys.coeff(k) * X;
        return X;
    }
    Matrix X = Pm - Matrix::identity(sys.dim()); // -(I - P_m)
    for (int k = m - 1; k >= n; --k) X = sys.coeff_inv(k) * X;
    return X;
}

namespace {

std::string rate_label(double ratio) {
    if (ratio >= 0.5) return "linear";
    if (ratio >= 0.01) return "sublinear";
    return "plateau";
}

double avg_of(const Seq& a, int lo, int hi) {
    if (lo > hi) return 0.0;
    double s = 0.0;
    for (int j = lo; j <= hi; ++j) s += a(j);
    return s / (hi - lo + 1);
}

} // namespace

DivergenceTrend check_divergence(const DichotomyCertificate& cert, const Window& w) {
    DivergenceTrend t;
    double s = 0.0;
    for (int q = w.n_min; q <= w.n_max; ++q) {
        s += cert.a(q);
        t.forward_partial.push_back(s);
    }
    s = 0.0;
    std::vector<double> rev;
    for (int p = w.n_max; p >= w.n_min; --p) {
        s += cert.a(p);
        rev.push_back(s);
    }
    t.backward_partial.assign(rev.rbegin(), rev.rend());

    const int len = w.length();
    const int quarter = std::max(1, len / 4);
    const double mid_avg =
        avg_of(cert.a, w.n_min + quarter, w.n_max - quarter);
    const double fwd_tail = avg_of(cert.a, w.n_max - quarter + 1, w.n_max);
    const double bwd_tail = avg_of(cert.a, w.n_min, w.n_min + quarter - 1);
    const double denom = std::max(mid_avg, 1e-300);
    t.forward_tail_rate = fwd_tail / denom;
    t.backward_tail_rate = bwd_tail / denom;
    t.forward_label = rate_label(t.forward_tail_rate);
    t.backward_label = rate_label(t.backward_tail_rate);
    t.consistent = t.forward_label != "plateau" && t.backward_label != "plateau" &&
                   t.forward_partial.back() > 0.0;
    return t;
}

namespace {

CertReport sweep_pairs(const LinearSystem& sys, const DichotomyCertificate& cert, double tol,
                       bool constant_rate_bounds) {
    cert.require_projection();
    cert.require_rates(sys.window());
    const Window& w = sys.window();
    const std::vector<Matrix> proj = conjugated_projectors(sys, cert);
    const Matrix I = Matrix::identity(sys.dim());

    CertReport report;
    report.tolerance = tol;

    auto record = [&](double measured, double bound, int n, int m) {
        // the 1e-300 floor keeps deeply underflowed pairs comparable
        const double violation =
            measured <= bound ? 0.0 : (measured - bound) / std::max(bound, 1e-300);
        if (violation > report.max_violation) {
            report.max_violation = violation;
            report.worst_pair = {n, m};
        }
        ++report.pairs_checked;
    };
    auto bound_for = [&](int n, int m) {
        return constant_rate_bounds ? cert.K * std::exp(-cert.alpha * std::abs(n - m))
                                    : pair_weight(cert, n, m);
    };

    for (int m = w.n_min; m <= w.n_max + 1; ++m) {
        const Matrix& Pm = proj[static_cast<size_t>(m - w.n_min)];
        Matrix X = Pm;
        record(inf_norm(X), bound_for(m, m), m, m);
        for (int n = m + 1; n <= w.n_max + 1; ++n) {
            X = sys.coeff(n - 1) * X;
            record(inf_norm(X), bound_for(n, m), n, m);
        }
        Matrix Y = I - Pm;
        for (int n = m - 1; n >= w.n_min; --n) {
            Y = sys.coeff_inv(n) * Y;
            record(inf_norm(Y), bound_for(n, m), n, m);
        }
    }

    report.passed = report.max_violation <= tol;
    report.trend = check_divergence(cert, w);
    return report;
}

} // namespace

CertReport verify_gdd(const LinearSystem& sys, const DichotomyCertificate& cert, double tol) {
    return sweep_pairs(sys, cert, tol, false);
}

CertReport verify_ed(const LinearSystem& sys, const DichotomyCertificate& cert, double tol) {
    if (cert.kind != DichotomyCertificate::Kind::alpha)
        throw InvalidParams("constant-rate check requires an alpha certificate");
    return sweep_pairs(sys, cert, tol, true);
}

namespace {

struct EdgeData {
    double a_lo = 0.0, a_hi = 0.0; // smallest rate over the outer 10% band
    double g_lo = 0.0, g_hi = 0.0; // largest |g| over the same bands
};

EdgeData edges(const DichotomyCertificate& cert, const Seq& g, const Window& w) {
    const int span = w.edge_span();
    EdgeData e;
    e.a_lo = cert.a.min_on(w.n_min, w.n_min + span);
    e.a_hi = cert.a.min_on(w.n_max - span, w.n_max);
    auto abs_max = [&](int lo, int hi) {
        double best = 0.0;
        for (int n = lo; n <= hi; ++n) best = std::max(best, std::fabs(g(n)));
        return best;
    };
    e.g_lo = abs_max(w.n_min, w.n_min + span);
    e.g_hi = abs_max(w.n_max - span, w.n_max);
    return e;
}

double geometric_tail(double a) {
    if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
    const double q = std::exp(-a);
    return q / (1.0 - q);
}

} // namespace

NVal n_operator(const DichotomyCertificate& cert, const Seq& g, int n, const Window& w) {
    if (n < w.n_min || n > w.n_max)
        throw IndexOutOfWindow("N(n, g) evaluation index " + std::to_string(n) +
                               " outside the window");
    NVal out;
    double s = 0.0;
    for (int m = n - 1; m >= w.n_min; --m) {
        s += cert.a(m + 1); // sum_{j=m+1}^{n} a_j, accumulated outward
        out.value += cert.K * std::exp(-s) * g(m);
    }
    s = cert.a(n);
    for (int m = n; m <= w.n_max - 1; ++m) {
        s += cert.a(m + 1); // sum_{j=n}^{m+1} a_j
        out.value += cert.K * std::exp(-s) * g(m);
    }
    const EdgeData e = edges(cert, g, w);
    out.tail = cert.K * e.g_lo * geometric_tail(e.a_lo) + cert.K * e.g_hi * geometric_tail(e.a_hi);
    return out;
}

H23Result check_h2_h3(const DichotomyCertificate& cert, const Seq& F, const Seq& G,
                      const Seq& r, const Window& w) {
    const Seq fg = add_seq(F, G);
    H23Result out;
    for (int n = w.n_min; n <= w.n_max; ++n) {
        const NVal b = n_operator(cert, fg, n, w);
        if (b.value > out.B) {
            out.B = b.value;
            out.B_tail = b.tail;
            out.B_argmax = n;
        }
        const NVal th = n_operator(cert, r, n, w);
        if (th.value > out.theta) {
            out.theta = th.value;
            out.theta_tail = th.tail;
            out.theta_argmax = n;
        }
    }
    out.passed = out.theta + out.theta_tail < 1.0;
    return out;
}

TailResult h45_tail(const DichotomyCertificate& cert, const Perturbation& f,
                    const Perturbation& g, const Window& w,
                    const std::vector<TailSample>& samples, int J, int n,
                    TailVariant variant) {
    if (J < 1) throw InvalidParams("tail truncation J must be >= 1");
    w.require_coeff(n);

    auto delta_norm = [&](int k, const TailSample& smp) {
        if (variant == TailVariant::h4) {
            // g(k, u + x) - g(k, u' + x') + f(k, x') - f(k, x)
            Vec d = sub(g(k, add(smp.u, smp.x)), g(k, add(smp.u2, smp.x2)));
            d = add(d, sub(f(k, smp.x2), f(k, smp.x)));
            return inf_norm(d);
        }
        // f(k, v + y) - f(k, v' + y') + g(k, y) - g(k, y')
        Vec d = sub(f(k, add(smp.u, smp.x)), f(k, add(smp.u2, smp.x2)));
        d = add(d, sub(g(k, smp.x), g(k, smp.x2)));
        return inf_norm(d);
    };

    TailResult out;
    for (const TailSample& smp : samples) {
        double total = 0.0;
        for (int k = w.n_min; k <= n - 1 - J; ++k)
            total += series_weight(cert, n, k) * delta_norm(k, smp);
        for (int k = n + J; k <= w.n_max - 1; ++k)
            total += series_weight(cert, n, k) * delta_norm(k, smp);
        out.value = std::max(out.value, total);
    }

    const Seq fg_bound = add_seq(f.bound, g.bound);
    const EdgeData e = edges(cert, fg_bound, w);
    out.truncation_tail = 2.0 * cert.K *
                          (e.g_lo * geometric_tail(e.a_lo) + e.g_hi * geometric_tail(e.a_hi));
    return out;
}

double stepanov_norm(const Seq& r, int L, const Window& w) {
    if (L < 1) throw InvalidParams("Stepanov span L must be >= 1");
    const int lo = w.n_min + L, hi = w.n_max - L;
    if (lo > hi)
        throw WindowTooNarrow("no interior index admits the full +-" + std::to_string(L) +
                              " span");
    double best = 0.0;
    for (int n = lo; n <= hi; ++n) {
        double s = 0.0;
        for (int k = n - L; k <= n + L; ++k) s += r(k);
        best = std::max(best, s / (2.0 * L));
    }
    return best;
}

GrowthReport scan_unbounded_growth(const LinearSystem& sys, const DichotomyCertificate& cert,
                                   const std::vector<Vec>& samples, double threshold) {
    return scan_unbounded_growth(sys, cert.base_index, samples, threshold);
}

std::vector<AlphaRejectionRow> alpha_rejection_scan(const DichotomyCertificate& cert,
                                                    const std::vector<double>& alphas,
                                                    const Window& w) {
    std::vector<AlphaRejectionRow> rows;
    for (double alpha : alphas) {
        AlphaRejectionRow row;
        row.alpha = alpha;
        for (int T = 1; T <= w.length() && !row.found; ++T) {
            for (int m = w.n_min; m + T <= w.n_max; ++m) {
                double s = 0.0;
                for (int k = m; k <= m + T; ++k) s += cert.a(k);
                const double avg = s / T;
                if (avg < alpha) {
                    row.found = true;
                    row.m = m;
                    row.T = T;
                    row.average = avg;
                    break;
                }
            }
        }
        rows.push_back(row);
    }
    return rows;
}

} // namespace dichoteq
