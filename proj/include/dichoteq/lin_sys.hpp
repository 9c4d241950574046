#pragma once

#include <functional>
#include <string>
#include <vector>

#include "dichoteq/linalg.hpp"
#include "dichoteq/seq.hpp"
#include "dichoteq/window.hpp"

namespace dichoteq {

/// Vector-valued sequence stored over a contiguous index range.
struct VecSeq {
    int first = 0;
    std::vector<Vec> vals;

    int lo() const { return first; }
    int hi() const { return first + static_cast<int>(vals.size()) - 1; }
    bool contains(int n) const { return n >= lo() && n <= hi(); }

    const Vec& at(int n) const;
    Vec& at(int n);
};

/// Linear part z_{n+1} = A_n z_n on a finite window. Coefficients are
/// materialized once from a generator; the generator itself is retained so
/// diagnostics can rebuild the system on a wider window. Every A_n is
/// inverted up front and checked against the condition cap.
class LinearSystem {
public:
    LinearSystem(int dim, Window window, std::function<Matrix(int)> coeff_gen,
                 double cond_cap = 1e12);

    /// Table-backed system; out-of-range lookups freeze at the edge matrices.
    static LinearSystem from_table(Window window, std::vector<Matrix> coeffs,
                                   double cond_cap = 1e12);

    int dim() const { return dim_; }
    const Window& window() const { return window_; }
    double cond_cap() const { return cond_cap_; }

    const Matrix& coeff(int n) const;     // A_n
    const Matrix& coeff_inv(int n) const; // A_n^-1

    /// sup_n ||A_n - I|| over the window (the constant M).
    double sup_deviation() const { return sup_dev_; }

    /// Same generator on a different window.
    LinearSystem rebuilt(Window window) const;

private:
    int dim_;
    Window window_;
    std::function<Matrix(int)> gen_;
    double cond_cap_;
    std::vector<Matrix> coeffs_;
    std::vector<Matrix> invs_;
    double sup_dev_ = 0.0;
};

/// Nonlinear perturbation f(n, x) with its declared bound sequence F_n and
/// Lipschitz sequence r_n. For the built-in families the metadata is exact.
struct Perturbation {
    std::function<Vec(int, const Vec&)> eval;
    Seq bound; // F_n
    Seq lip;   // r_n
    bool is_zero = false;

    static Perturbation zero(int dim);

    Vec operator()(int n, const Vec& x) const { return eval(n, x); }
};

struct PropagateOpts {
    double inner_tol = 1e-13;
    int inner_cap = 400;
};

/// Transition matrix W_n W_m^{-1}: the ordered product A_{n-1}...A_m for
/// n >= m (empty product = I), and the inverse of the opposite product for
/// n < m. Indices are state indices in [n_min, n_max + 1].
Matrix transition(const LinearSystem& sys, int n, int m);

/// Solution x(n, m, xi) of x_{k+1} = A_k x_k + f(k, x_k) with x_m = xi.
/// Backward steps (n < m) solve each step by fixed-point iteration, which
/// requires ||A_k^-1|| r_k < 1 at every intermediate k.
Vec propagate(const LinearSystem& sys, const Perturbation& f, int m, const Vec& xi, int n,
              const PropagateOpts& opts = {});

/// Full trajectory through (m, xi) over all state indices of the window.
VecSeq propagate_all(const LinearSystem& sys, const Perturbation& f, int m, const Vec& xi,
                     const PropagateOpts& opts = {});

/// Max defect of a candidate sequence against the recurrence
/// x_{n+1} = A_n x_n + f(n, x_n), over all n with n, n+1 in the sequence.
double solution_residual(const LinearSystem& sys, const Perturbation& f, const VecSeq& seq);

enum class GrowthVerdict { trivial, grows_forward, grows_backward, grows_both, inconclusive };

struct GrowthSample {
    Vec xi;
    double max_forward = 0.0;  // max |transition(n, base) xi| for n >= base
    double max_backward = 0.0; // max over n <= base
    GrowthVerdict verdict = GrowthVerdict::inconclusive;
};

struct GrowthReport {
    int base_index = 0;
    double threshold = 0.0;
    std::vector<GrowthSample> samples;
    /// True when every nonzero sample grew beyond the threshold in at least
    /// one direction (finite-window evidence that only 0 stays bounded).
    bool all_nonzero_grow() const;
};

/// Checks that nonzero initial conditions blow up toward one of the window
/// ends under the plain linear dynamics. A finite window can only report
/// evidence: samples below threshold both ways come back inconclusive.
GrowthReport scan_unbounded_growth(const LinearSystem& sys, int base_index,
                                   const std::vector<Vec>& samples, double threshold = 10.0);

struct DichotomyCertificate;
/// Same scan anchored at the certificate's base index.
GrowthReport scan_unbounded_growth(const LinearSystem& sys, const DichotomyCertificate& cert,
                                   const std::vector<Vec>& samples, double threshold = 10.0);

std::string to_string(GrowthVerdict v);

} // namespace dichoteq
