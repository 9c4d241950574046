#include "dichoteq/lin_sys.hpp"

#include <cmath>
#include <string>
#include <utility>

#include "dichoteq/errors.hpp"

namespace dichoteq {

const Vec& VecSeq::at(int n) const {
    if (!contains(n))
        throw IndexOutOfWindow("sequence index " + std::to_string(n) + " outside [" +
                               std::to_string(lo()) + "," + std::to_string(hi()) + "]");
    return vals[static_cast<size_t>(n - first)];
}

Vec& VecSeq::at(int n) {
    if (!contains(n))
        throw IndexOutOfWindow("sequence index " + std::to_string(n) + " outside [" +
                               std::to_string(lo()) + "," + std::to_string(hi()) + "]");
    return vals[static_cast<size_t>(n - first)];
}

LinearSystem::LinearSystem(int dim, Window window, std::function<Matrix(int)> coeff_gen,
                           double cond_cap)
    : dim_(dim), window_(window), gen_(std::move(coeff_gen)), cond_cap_(cond_cap) {
    if (dim < 1) throw InvalidParams("dimension must be positive");
    const Matrix I = Matrix::identity(dim);
    coeffs_.reserve(static_cast<size_t>(window_.length()) + 1);
    invs_.reserve(coeffs_.capacity());
    for (int n = window_.n_min; n <= window_.n_max; ++n) {
        Matrix A = gen_(n);
        if (A.size() != dim)
            throw InvalidParams("coefficient generator returned a matrix of wrong size at n = " +
                                std::to_string(n));
        InverseResult ir = invert(A);
        if (!(ir.cond <= cond_cap_))
            throw SingularCoefficient("A_" + std::to_string(n) + " condition number " +
                                      std::to_string(ir.cond) + " exceeds cap");
        sup_dev_ = std::max(sup_dev_, inf_norm(A - I));
        coeffs_.push_back(std::move(A));
        invs_.push_back(std::move(ir.inv));
    }
}

LinearSystem LinearSystem::from_table(Window window, std::vector<Matrix> coeffs,
                                      double cond_cap) {
    if (coeffs.size() != static_cast<size_t>(window.length()) + 1)
        throw InvalidParams("coefficient table must cover every index of the window");
    const int dim = coeffs.front().size();
    const int first = window.n_min;
    auto gen = [coeffs, first](int n) {
        long i = static_cast<long>(n) - first;
        if (i < 0) i = 0;
        if (i >= static_cast<long>(coeffs.size())) i = static_cast<long>(coeffs.size()) - 1;
        return coeffs[static_cast<size_t>(i)];
    };
    return LinearSystem(dim, window, gen, cond_cap);
}

const Matrix& LinearSystem::coeff(int n) const {
    window_.require_coeff(n);
    return coeffs_[static_cast<size_t>(n - window_.n_min)];
}

const Matrix& LinearSystem::coeff_inv(int n) const {
    window_.require_coeff(n);
    return invs_[static_cast<size_t>(n - window_.n_min)];
}

LinearSystem LinearSystem::rebuilt(Window window) const {
    return LinearSystem(dim_, window, gen_, cond_cap_);
}

Perturbation Perturbation::zero(int dim) {
    Perturbation p;
    p.eval = [dim](int, const Vec&) { return Vec(static_cast<size_t>(dim), 0.0); };
    p.bound = Seq::constant(0.0);
    p.lip = Seq::constant(0.0);
    p.is_zero = true;
    return p;
}

Matrix transition(const LinearSystem& sys, int n, int m) {
    sys.window().require_state(n);
    sys.window().require_state(m);
    if (n == m) return Matrix::identity(sys.dim());
    if (n > m) {
        Matrix X = Matrix::identity(sys.dim());
        for (int k = m; k < n; ++k) X = sys.coeff(k) * X;
        return X;
    }
    InverseResult ir = invert(transition(sys, m, n));
    if (!(ir.cond <= sys.cond_cap()))
        throw SingularCoefficient("transition(" + std::to_string(m) + "," + std::to_string(n) +
                                  ") condition number " + std::to_string(ir.cond) +
                                  " exceeds cap");
    return ir.inv;
}

namespace {

/// One backward step: solve x_k from x_{k+1} = A_k x_k + f(k, x_k) via the
/// contraction x -> A_k^{-1} (x_{k+1} - f(k, x)).
Vec backward_step(const LinearSystem& sys, const Perturbation& f, int k, const Vec& x_next,
                  const PropagateOpts& opts) {
    const Matrix& Ainv = sys.coeff_inv(k);
    if (f.is_zero) return Ainv * x_next;
    const double gain = inf_norm(Ainv) * f.lip(k);
    if (!(gain < 1.0))
        throw BackwardNotContractive("||A_" + std::to_string(k) + "^-1|| * r_" +
                                     std::to_string(k) + " = " + std::to_string(gain) +
                                     " >= 1");
    Vec x = Ainv * x_next;
    for (int it = 0; it < opts.inner_cap; ++it) {
        Vec next = Ainv * sub(x_next, f(k, x));
        const double step = dist_inf(next, x);
        x = std::move(next);
        if (step <= opts.inner_tol * std::max(1.0, inf_norm(x))) return x;
    }
    throw NoConvergence("backward step at k = " + std::to_string(k) +
                        " did not converge within the iteration cap");
}

void require_finite(const Vec& x, int n) {
    for (double v : x)
        if (!std::isfinite(v))
            throw NoConvergence("propagated state overflowed at n = " + std::to_string(n));
}

} // namespace

Vec propagate(const LinearSystem& sys, const Perturbation& f, int m, const Vec& xi, int n,
              const PropagateOpts& opts) {
    sys.window().require_state(m);
    sys.window().require_state(n);
    Vec x = xi;
    if (n >= m) {
        for (int k = m; k < n; ++k) {
            Vec ax = sys.coeff(k) * x;
            if (!f.is_zero) ax = add(ax, f(k, x));
            x = std::move(ax);
            require_finite(x, k + 1);
        }
    } else {
        for (int k = m - 1; k >= n; --k) {
            x = backward_step(sys, f, k, x, opts);
            require_finite(x, k);
        }
    }
    return x;
}

VecSeq propagate_all(const LinearSystem& sys, const Perturbation& f, int m, const Vec& xi,
                     const PropagateOpts& opts) {
    const Window& w = sys.window();
    w.require_state(m);
    VecSeq seq;
    seq.first = w.n_min;
    seq.vals.assign(static_cast<size_t>(w.length()) + 2, Vec());
    seq.at(m) = xi;
    for (int k = m; k <= w.n_max; ++k) {
        Vec x = sys.coeff(k) * seq.at(k);
        if (!f.is_zero) x = add(x, f(k, seq.at(k)));
        require_finite(x, k + 1);
        seq.at(k + 1) = std::move(x);
    }
    for (int k = m - 1; k >= w.n_min; --k) {
        seq.at(k) = backward_step(sys, f, k, seq.at(k + 1), opts);
        require_finite(seq.at(k), k);
    }
    return seq;
}

double solution_residual(const LinearSystem& sys, const Perturbation& f, const VecSeq& seq) {
    double worst = 0.0;
    for (int n = seq.lo(); n < seq.hi(); ++n) {
        if (!sys.window().contains_coeff(n)) continue;
        Vec pred = sys.coeff(n) * seq.at(n);
        if (!f.is_zero) pred = add(pred, f(n, seq.at(n)));
        worst = std::max(worst, dist_inf(seq.at(n + 1), pred));
    }
    return worst;
}

bool GrowthReport::all_nonzero_grow() const {
    for (const GrowthSample& s : samples) {
        if (s.verdict == GrowthVerdict::trivial) continue;
        if (s.verdict == GrowthVerdict::inconclusive) return false;
    }
    return true;
}

GrowthReport scan_unbounded_growth(const LinearSystem& sys, int base_index,
                                   const std::vector<Vec>& samples, double threshold) {
    const Window& w = sys.window();
    w.require_state(base_index);
    GrowthReport report;
    report.base_index = base_index;
    report.threshold = threshold;
    for (const Vec& xi : samples) {
        GrowthSample gs;
        gs.xi = xi;
        const double scale = inf_norm(xi);
        if (scale == 0.0) {
            gs.verdict = GrowthVerdict::trivial;
            report.samples.push_back(std::move(gs));
            continue;
        }
        Vec x = xi;
        for (int n = base_index; n < w.n_max + 1; ++n) {
            x = sys.coeff(n) * x;
            gs.max_forward = std::max(gs.max_forward, inf_norm(x) / scale);
        }
        x = xi;
        for (int n = base_index - 1; n >= w.n_min; --n) {
            x = sys.coeff_inv(n) * x;
            gs.max_backward = std::max(gs.max_backward, inf_norm(x) / scale);
        }
        const bool fwd = gs.max_forward >= threshold;
        const bool bwd = gs.max_backward >= threshold;
        gs.verdict = fwd && bwd  ? GrowthVerdict::grows_both
                     : fwd       ? GrowthVerdict::grows_forward
                     : bwd       ? GrowthVerdict::grows_backward
                                 : GrowthVerdict::inconclusive;
        report.samples.push_back(std::move(gs));
    }
    return report;
}

std::string to_string(GrowthVerdict v) {
    switch (v) {
    case GrowthVerdict::trivial: return "trivial";
    case GrowthVerdict::grows_forward: return "grows_forward";
    case GrowthVerdict::grows_backward: return "grows_backward";
    case GrowthVerdict::grows_both: return "grows_both";
    case GrowthVerdict::inconclusive: return "inconclusive";
    }
    return "?";
}

} // namespace dichoteq
