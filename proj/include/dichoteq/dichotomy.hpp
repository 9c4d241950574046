#pragma once

#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dichoteq/lin_sys.hpp"
#include "dichoteq/linalg.hpp"
#include "dichoteq/seq.hpp"
#include "dichoteq/window.hpp"

namespace dichoteq {

// Two families of decay weights appear below, differing by where the index
// sums stop. They are kept separate on purpose and must not be "unified":
//
//  * pair weights  K exp(-sum_{j=min(n,m)}^{max(n,m)-1} a_j)  carry |n - m|
//    factors and are the exact envelope of the transition products of the
//    diagonal model families (the dichotomy inequalities hold with equality
//    there, and for constant a_j they reduce to K e^{-alpha |n-m|});
//
//  * series weights K exp(-sum_{j=m+1}^{n} a_j)   for m <  n, and
//                   K exp(-sum_{j=n}^{m+1} a_j)   for m >= n,
//    one extra decay factor per branch, used by the functional N(n, g) and
//    every bound derived from it (B, theta, tail sums, Gamma).

/// Claimed dichotomy data: projection P at a base index, constant K >= 1 and
/// the nonnegative rate sequence a_j. kind == alpha means a_j is constant.
struct DichotomyCertificate {
    enum class Kind { generalized, alpha };

    Matrix P;
    double K = 1.0;
    Seq a;
    Kind kind = Kind::generalized;
    double alpha = 0.0; // meaningful only when kind == alpha
    int base_index = 0;

    static DichotomyCertificate generalized(Matrix P, double K, Seq a, int base_index = 0);
    static DichotomyCertificate with_alpha(Matrix P, double K, double alpha, int base_index = 0);

    /// Throws NotAProjection unless ||P^2 - P|| <= tol.
    void require_projection(double tol = 1e-10) const;
    /// Throws InvalidParams if a_j < 0 somewhere on the window, or if
    /// kind == alpha but a is not identically alpha there.
    void require_rates(const Window& w) const;

    nlohmann::json to_json() const;
    static DichotomyCertificate from_json(const nlohmann::json& j);
};

/// Pair weight: certified bound on ||W_n P W_m^{-1}|| (n >= m) or on
/// ||W_n (I-P) W_m^{-1}|| (n < m).
double pair_weight(const DichotomyCertificate& cert, int n, int m);

/// Series weight for the functional N (see the note above).
double series_weight(const DichotomyCertificate& cert, int n, int m);

/// Projection conjugated along the flow: P_k = W_k P W_k^{-1}, computed
/// step by step from the base index, for every state index of the window.
std::vector<Matrix> conjugated_projectors(const LinearSystem& sys,
                                          const DichotomyCertificate& cert);

/// Green kernel: W_n P W_m^{-1} for n >= m, -W_n (I-P) W_m^{-1} for n < m,
/// formed from per-step transition products (no global pivot).
Matrix green(const LinearSystem& sys, const DichotomyCertificate& cert, int n, int m);

struct DivergenceTrend {
    std::vector<double> forward_partial;  // sums from n_min up to q
    std::vector<double> backward_partial; // sums from p up to n_max
    double forward_tail_rate = 0.0;       // last-quarter avg / middle avg
    double backward_tail_rate = 0.0;
    std::string forward_label;            // "linear" | "sublinear" | "plateau"
    std::string backward_label;
    bool consistent = false;              // finite-window verdict, never a proof
};

/// Partial sums of a_j from both window ends with a growth-rate verdict.
DivergenceTrend check_divergence(const DichotomyCertificate& cert, const Window& w);

struct CertReport {
    double max_violation = 0.0;           // worst relative excess over the claimed bound
    std::pair<int, int> worst_pair{0, 0}; // (n, m) attaining it
    int pairs_checked = 0;
    double tolerance = 0.0;
    bool passed = false;
    DivergenceTrend trend;
};

/// Checks the dichotomy inequalities for every ordered state-index pair of
/// the window, both branches, against the pair weights.
CertReport verify_gdd(const LinearSystem& sys, const DichotomyCertificate& cert,
                      double tol = 1e-9);

/// Constant-rate form of the same check: bound K e^{-alpha (n-m)} resp.
/// K e^{-alpha (m-n)}. Accepts exactly the same instances as verify_gdd for
/// kind == alpha certificates (the pair weights coincide).
CertReport verify_ed(const LinearSystem& sys, const DichotomyCertificate& cert,
                     double tol = 1e-9);

struct NVal {
    double value = 0.0; // window-truncated N(n, g)
    double tail = 0.0;  // bound on the mass truncated away, from boundary data
};

/// Two-sided decay-weighted sum N(n, g) of a nonnegative sequence, truncated
/// to the window; the tail term uses the smallest rate and the largest |g|
/// over the outer 10% band on each side.
NVal n_operator(const DichotomyCertificate& cert, const Seq& g, int n, const Window& w);

struct H23Result {
    double B = 0.0;
    double B_tail = 0.0;
    int B_argmax = 0;
    double theta = 0.0;
    double theta_tail = 0.0;
    int theta_argmax = 0;
    bool passed = false; // theta + theta_tail < 1, strictly
};

/// B = max_n N(n, F+G), theta = max_n N(n, r) over the window.
H23Result check_h2_h3(const DichotomyCertificate& cert, const Seq& F, const Seq& G,
                      const Seq& r, const Window& w);

enum class TailVariant { h4, h5 };

struct TailSample {
    Vec u, u2, x, x2;
};

struct TailResult {
    double value = 0.0;            // max over samples of the truncated tail sums
    double truncation_tail = 0.0;  // bound on the out-of-window remainder
};

/// Tail sums of the uniform-continuity hypotheses: series-weighted sums of
/// |Delta_k| over k <= n-1-J and k >= n+J. Variant h4 uses
/// Delta_k = g(k,u+x) - g(k,u'+x') + f(k,x') - f(k,x); h5 swaps the roles of
/// f and g. Nonincreasing in J for fixed samples.
TailResult h45_tail(const DichotomyCertificate& cert, const Perturbation& f,
                    const Perturbation& g, const Window& w,
                    const std::vector<TailSample>& samples, int J, int n,
                    TailVariant variant);

/// Sliding-average sup: max over interior n of (1/2L) sum_{k=n-L}^{n+L} r_k.
/// Throws WindowTooNarrow when no n admits the full span.
double stepanov_norm(const Seq& r, int L, const Window& w);

struct AlphaRejectionRow {
    double alpha = 0.0;
    bool found = false;
    int m = 0;      // violating segment [m, m+T]
    int T = 0;
    double average = 0.0; // (1/T) sum_{k=m}^{m+T} a_k
};

/// For each candidate rate, hunts for a segment whose average rate falls
/// below it, which rules the constant-rate form out. Smallest T wins; a miss
/// is reported as "no counterexample in window", not as a proof.
std::vector<AlphaRejectionRow> alpha_rejection_scan(const DichotomyCertificate& cert,
                                                    const std::vector<double>& alphas,
                                                    const Window& w);

} // namespace dichoteq
