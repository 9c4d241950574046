#pragma once

#include <functional>
#include <vector>

#include "dichoteq/dichotomy.hpp"
#include "dichoteq/lin_sys.hpp"
#include "dichoteq/window.hpp"

namespace dichoteq {

/// Window-truncated evaluation of the Green series
///     phi_n = sum_{m} G(n, m+1) q_m,        m over [n_min, n_max],
/// split into a forward pass through the stable range and a backward pass
/// through the complementary range:
///     s_{n+1} = A_n s_n + P_{n+1} q_n,              s_{n_min} = 0,
///     u_n     = A_n^{-1} (u_{n+1} - (I - P_{n+1}) q_n),  u_{n_max+1} = 0,
/// with phi = s + u. The truncated series satisfies the forced recurrence
/// exactly on the whole window; truncation error relative to the two-sided
/// series is tracked per index by tail_at(). References the system and
/// certificate it was built from; both must outlive the operator.
class GreenSeriesOperator {
public:
    GreenSeriesOperator(const LinearSystem& sys, const DichotomyCertificate& cert);

    const LinearSystem& sys() const { return *sys_; }
    const DichotomyCertificate& cert() const { return *cert_; }
    const Matrix& projector(int k) const; // P_k, state index

    /// q must be defined for every coefficient index; result spans the state
    /// indices [n_min, n_max + 1].
    VecSeq apply(const std::function<Vec(int)>& q) const;

    /// Per-index bound on the mass of the two series tails cut off by the
    /// window, for a forcing dominated by q_out_lo / q_out_hi beyond the
    /// respective edge and rates at least a_out_lo / a_out_hi there.
    double tail_at(int n, double q_out_lo, double q_out_hi) const;

    /// Smallest rate over the outer 10% band of each side.
    double a_out_lo() const { return a_out_lo_; }
    double a_out_hi() const { return a_out_hi_; }

private:
    const LinearSystem* sys_;
    const DichotomyCertificate* cert_;
    std::vector<Matrix> proj_;
    std::vector<double> rate_below_; // sum_{j=n_min}^{n-1} a_j per state index
    std::vector<double> rate_above_; // sum_{j=n}^{n_max} a_j per state index
    double a_out_lo_ = 0.0;
    double a_out_hi_ = 0.0;
    bool has_stable_ = true;   // P != 0: the below-window tail can carry mass
    bool has_unstable_ = true; // P != I: same for the above-window tail
};

struct BoundedSolution {
    VecSeq values;                 // state indices [n_min, n_max + 1]
    double residual = 0.0;          // recurrence defect, max over the window
    double residual_interior = 0.0; // same, middle 80%
    double sup_norm = 0.0;          // max |values| over all state indices
    int picard_iters = 0;
    std::vector<double> tail_at;    // per-index truncation bound, aligned with values
    double tail_budget = 0.0;       // max of tail_at over the interior
    double n_bound = 0.0;           // max over interior of N(n, |q|) + N-tail
    bool within_n_bound = false;    // |phi_n| <= N(n, |q|) + N-tail on the interior
    /// Certified envelope of the computed values: max_n of the pair-weighted
    /// sum of |q| over the window. Unlike the N comparison above this bound
    /// always holds once the certificate verifies, since the pair weights
    /// dominate the Green kernel norms directly.
    double series_majorant = 0.0;
    double theta = 0.0;             // contraction estimate (nonlinear case)
    double b_tilde = 0.0;           // max_n N(n, Q) (nonlinear case)
    std::vector<double> contraction_ratios; // successive-difference ratios
};

struct BoundedOpts {
    bool verify_certificate = true;
    double cert_tol = 1e-9;
    double tail_cap = 0.0;      // 0 disables the TailBudgetExceeded check
    double interior_frac = 0.8;
};

/// Unique bounded solution of z_{n+1} = A_n z_n + q_n as the truncated Green
/// series. Throws CertificateRejected when the certificate fails, and
/// TailBudgetExceeded when tail_cap > 0 and the truncation bound exceeds it.
BoundedSolution bounded_linear(const LinearSystem& sys, const DichotomyCertificate& cert,
                               const VecSeq& q, const BoundedOpts& opts = {});

struct PicardOpts : BoundedOpts {
    int iteration_cap = 500;
    const VecSeq* seed = nullptr; // nullptr means the zero sequence
};

/// Unique bounded solution of z_{n+1} = A_n z_n + q(n, z_n) by successive
/// approximation through the Green series, stopped by the a-posteriori rule
/// ||phi_j - phi_{j-1}|| <= eps (1 - theta) / theta. Q and r are the declared
/// bound and Lipschitz sequences of q; theta = max_n N(n, r) must be < 1.
BoundedSolution bounded_nonlinear(const LinearSystem& sys, const DichotomyCertificate& cert,
                                  const std::function<Vec(int, const Vec&)>& q, const Seq& Q,
                                  const Seq& r, double eps, const PicardOpts& opts = {});

} // namespace dichoteq
