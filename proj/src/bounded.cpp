#include "dichoteq/bounded.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "dichoteq/errors.hpp"

namespace dichoteq {

GreenSeriesOperator::GreenSeriesOperator(const LinearSystem& sys,
                                         const DichotomyCertificate& cert)
    : sys_(&sys), cert_(&cert), proj_(conjugated_projectors(sys, cert)) {
    const Window& w = sys.window();
    const size_t states = static_cast<size_t>(w.length()) + 2;
    rate_below_.assign(states, 0.0);
    rate_above_.assign(states, 0.0);
    for (int n = w.n_min + 1; n <= w.n_max + 1; ++n)
        rate_below_[static_cast<size_t>(n - w.n_min)] =
            rate_below_[static_cast<size_t>(n - 1 - w.n_min)] + cert.a(n - 1);
    for (int n = w.n_max; n >= w.n_min; --n)
        rate_above_[static_cast<size_t>(n - w.n_min)] =
            rate_above_[static_cast<size_t>(n + 1 - w.n_min)] + cert.a(n);
    const int span = w.edge_span();
    a_out_lo_ = cert.a.min_on(w.n_min, w.n_min + span);
    a_out_hi_ = cert.a.min_on(w.n_max - span, w.n_max);
    has_stable_ = inf_norm(cert.P) > 0.0;
    has_unstable_ = inf_norm(Matrix::identity(cert.P.size()) - cert.P) > 0.0;
}

const Matrix& GreenSeriesOperator::projector(int k) const {
    sys_->window().require_state(k);
    return proj_[static_cast<size_t>(k - sys_->window().n_min)];
}

VecSeq GreenSeriesOperator::apply(const std::function<Vec(int)>& q) const {
    const Window& w = sys_->window();
    const int dim = sys_->dim();
    const size_t states = static_cast<size_t>(w.length()) + 2;

    std::vector<Vec> forcing(states - 1);
    for (int n = w.n_min; n <= w.n_max; ++n) forcing[static_cast<size_t>(n - w.n_min)] = q(n);

    VecSeq phi;
    phi.first = w.n_min;
    phi.vals.assign(states, Vec(static_cast<size_t>(dim), 0.0));

    // forward pass: phi accumulates s
    Vec s(static_cast<size_t>(dim), 0.0);
    for (int n = w.n_min; n <= w.n_max; ++n) {
        const Vec& qn = forcing[static_cast<size_t>(n - w.n_min)];
        s = add(sys_->coeff(n) * s, proj_[static_cast<size_t>(n + 1 - w.n_min)] * qn);
        phi.at(n + 1) = s;
    }
    // backward pass: add u
    Vec u(static_cast<size_t>(dim), 0.0);
    for (int n = w.n_max; n >= w.n_min; --n) {
        const Vec& qn = forcing[static_cast<size_t>(n - w.n_min)];
        const Matrix& Pn1 = proj_[static_cast<size_t>(n + 1 - w.n_min)];
        u = sys_->coeff_inv(n) * sub(u, sub(qn, Pn1 * qn));
        phi.at(n) = add(phi.at(n), u);
    }
    return phi;
}

double GreenSeriesOperator::tail_at(int n, double q_out_lo, double q_out_hi) const {
    const Window& w = sys_->window();
    w.require_state(n);
    const double K = cert_->K;
    auto geo = [](double a) {
        if (!(a > 0.0)) return std::numeric_limits<double>::infinity();
        const double e = std::exp(-a);
        return e / (1.0 - e);
    };
    const size_t i = static_cast<size_t>(n - w.n_min);
    const double below =
        has_stable_ ? K * q_out_lo * std::exp(-rate_below_[i]) * (1.0 + geo(a_out_lo_)) : 0.0;
    const double above =
        has_unstable_ ? K * q_out_hi * std::exp(-rate_above_[i]) * geo(a_out_hi_) : 0.0;
    return below + above;
}

namespace {

struct ForcingStats {
    double out_lo = 0.0; // max |q| over the outer 10% band, lower side
    double out_hi = 0.0;
};

ForcingStats forcing_stats(const Window& w, const std::function<Vec(int)>& q) {
    const int span = w.edge_span();
    ForcingStats fs;
    for (int n = w.n_min; n <= w.n_min + span; ++n)
        fs.out_lo = std::max(fs.out_lo, inf_norm(q(n)));
    for (int n = w.n_max - span; n <= w.n_max; ++n)
        fs.out_hi = std::max(fs.out_hi, inf_norm(q(n)));
    return fs;
}

/// Fills the residual / sup-norm / tail / N-bound bookkeeping shared by the
/// linear and nonlinear paths. |q| enters as a scalar sequence.
void finish_solution(BoundedSolution& sol, const GreenSeriesOperator& op,
                     const std::function<Vec(int)>& q, const Seq& abs_q,
                     const BoundedOpts& opts) {
    const LinearSystem& sys = op.sys();
    const Window& w = sys.window();

    double res_all = 0.0, res_int = 0.0;
    const Window interior = w.interior(opts.interior_frac);
    for (int n = w.n_min; n <= w.n_max; ++n) {
        const double d = dist_inf(sol.values.at(n + 1), add(sys.coeff(n) * sol.values.at(n), q(n)));
        res_all = std::max(res_all, d);
        if (n >= interior.n_min && n <= interior.n_max) res_int = std::max(res_int, d);
    }
    sol.residual = res_all;
    sol.residual_interior = res_int;

    sol.sup_norm = 0.0;
    for (const Vec& v : sol.values.vals) sol.sup_norm = std::max(sol.sup_norm, inf_norm(v));

    const ForcingStats fs = forcing_stats(w, q);
    sol.tail_at.clear();
    sol.tail_at.reserve(sol.values.vals.size());
    sol.tail_budget = 0.0;
    for (int n = w.n_min; n <= w.n_max + 1; ++n) {
        const double t = op.tail_at(n, fs.out_lo, fs.out_hi);
        sol.tail_at.push_back(t);
        if (n >= interior.n_min && n <= interior.n_max)
            sol.tail_budget = std::max(sol.tail_budget, t);
    }

    sol.n_bound = 0.0;
    sol.within_n_bound = true;
    for (int n = interior.n_min; n <= interior.n_max; ++n) {
        const NVal nv = n_operator(op.cert(), abs_q, n, w);
        const double bound = nv.value + nv.tail;
        sol.n_bound = std::max(sol.n_bound, bound);
        if (inf_norm(sol.values.at(n)) > bound) sol.within_n_bound = false;
    }

    const DichotomyCertificate& cert = op.cert();
    std::vector<double> qmag(static_cast<size_t>(w.length()) + 1);
    for (int m = w.n_min; m <= w.n_max; ++m)
        qmag[static_cast<size_t>(m - w.n_min)] = inf_norm(q(m));
    sol.series_majorant = 0.0;
    for (int n = w.n_min; n <= w.n_max + 1; ++n) {
        double acc = 0.0, s = 0.0;
        for (int m = n - 1; m >= w.n_min; --m) { // weight K exp(-sum_{j=m+1}^{n-1} a_j)
            acc += cert.K * std::exp(-s) * qmag[static_cast<size_t>(m - w.n_min)];
            s += cert.a(m);
        }
        s = n <= w.n_max ? cert.a(n) : 0.0;
        for (int m = n; m <= w.n_max; ++m) { // weight K exp(-sum_{j=n}^{m} a_j)
            acc += cert.K * std::exp(-s) * qmag[static_cast<size_t>(m - w.n_min)];
            if (m + 1 <= w.n_max) s += cert.a(m + 1);
        }
        sol.series_majorant = std::max(sol.series_majorant, acc);
    }

    if (opts.tail_cap > 0.0 && sol.tail_budget > opts.tail_cap)
        throw TailBudgetExceeded("interior truncation bound " + std::to_string(sol.tail_budget) +
                                 " exceeds the requested cap " + std::to_string(opts.tail_cap));
}

void reject_if_invalid(const LinearSystem& sys, const DichotomyCertificate& cert,
                       const BoundedOpts& opts) {
    if (!opts.verify_certificate) return;
    const CertReport rep = verify_gdd(sys, cert, opts.cert_tol);
    if (!rep.passed)
        throw CertificateRejected(
            "dichotomy bound violated by relative excess " + std::to_string(rep.max_violation) +
            " at pair (" + std::to_string(rep.worst_pair.first) + "," +
            std::to_string(rep.worst_pair.second) + ")");
}

} // namespace

BoundedSolution bounded_linear(const LinearSystem& sys, const DichotomyCertificate& cert,
                               const VecSeq& q, const BoundedOpts& opts) {
    reject_if_invalid(sys, cert, opts);
    const Window& w = sys.window();
    if (q.lo() > w.n_min || q.hi() < w.n_max)
        throw IndexOutOfWindow("forcing must cover the coefficient window");

    const GreenSeriesOperator op(sys, cert);
    auto qf = [&](int n) { return q.at(n); };
    BoundedSolution sol;
    sol.values = op.apply(qf);
    sol.picard_iters = 0;
    const Seq abs_q = Seq::from_function(
        [q](int n) { return inf_norm(q.at(std::clamp(n, q.lo(), q.hi()))); });
    finish_solution(sol, op, qf, abs_q, opts);
    return sol;
}

BoundedSolution bounded_nonlinear(const LinearSystem& sys, const DichotomyCertificate& cert,
                                  const std::function<Vec(int, const Vec&)>& q, const Seq& Q,
                                  const Seq& r, double eps, const PicardOpts& opts) {
    reject_if_invalid(sys, cert, opts);
    const Window& w = sys.window();
    const GreenSeriesOperator op(sys, cert);

    double theta = 0.0, b_tilde = 0.0;
    for (int n = w.n_min; n <= w.n_max; ++n) {
        theta = std::max(theta, n_operator(cert, r, n, w).value);
        b_tilde = std::max(b_tilde, n_operator(cert, Q, n, w).value);
    }
    if (!(theta < 1.0))
        throw NotContractive("N(n, r) reaches " + std::to_string(theta) + " >= 1");

    const size_t states = static_cast<size_t>(w.length()) + 2;
    VecSeq phi;
    phi.first = w.n_min;
    phi.vals.assign(states, Vec(static_cast<size_t>(sys.dim()), 0.0));
    if (opts.seed != nullptr) {
        if (opts.seed->lo() > w.n_min || opts.seed->hi() < w.n_max)
            throw IndexOutOfWindow("seed sequence must cover the coefficient window");
        for (int n = w.n_min; n <= w.n_max + 1; ++n)
            if (opts.seed->contains(n)) phi.at(n) = opts.seed->at(n);
    }

    const double threshold = theta > 1e-12 ? eps * (1.0 - theta) / theta : eps;
    const double runaway = 1e9 * (1.0 + b_tilde);

    BoundedSolution sol;
    double prev_diff = -1.0;
    int iter = 0;
    for (;; ++iter) {
        if (iter >= opts.iteration_cap)
            throw IterationCapExceeded("Picard iteration did not reach the stopping rule in " +
                                       std::to_string(opts.iteration_cap) + " sweeps");
        VecSeq next = op.apply([&](int n) { return q(n, phi.at(n)); });
        double diff = 0.0;
        for (int n = w.n_min; n <= w.n_max + 1; ++n)
            diff = std::max(diff, dist_inf(next.at(n), phi.at(n)));
        phi = std::move(next);
        if (prev_diff > 1e3 * std::numeric_limits<double>::epsilon() * (1.0 + b_tilde))
            sol.contraction_ratios.push_back(diff / prev_diff);
        if (diff > runaway)
            throw NotContractive("Picard iteration is diverging (step " + std::to_string(diff) +
                                 ")");
        prev_diff = diff;
        if (diff <= threshold) {
            ++iter;
            break;
        }
    }

    sol.values = std::move(phi);
    sol.picard_iters = iter;
    sol.theta = theta;
    sol.b_tilde = b_tilde;
    auto qf = [&](int n) { return q(n, sol.values.at(n)); };
    finish_solution(sol, op, qf, Q, static_cast<const BoundedOpts&>(opts));
    return sol;
}

} // namespace dichoteq
