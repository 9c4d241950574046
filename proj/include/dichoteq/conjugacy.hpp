#pragma once

#include <optional>
#include <vector>

#include "dichoteq/bounded.hpp"
#include "dichoteq/dichotomy.hpp"
#include "dichoteq/lin_sys.hpp"
#include "dichoteq/report.hpp"
#include "dichoteq/sampling.hpp"
#include "dichoteq/window.hpp"

namespace dichoteq {

struct EngineOpts {
    double eps = 1e-9;           // Picard target for chi / vartheta
    double cert_tol = 1e-9;
    double round_trip_tol = 1e-6;
    double residual_tol = 1e-8;
    double interior_frac = 0.8;
    int picard_cap = 500;
    PropagateOpts prop;
};

/// chi / vartheta solve bundle: the carrier trajectory and the bounded
/// solution of the cross-perturbed system along it.
struct AuxSolution {
    VecSeq traj;
    VecSeq w;
    int iters = 0;
    std::vector<double> ratios;
};

/// Binds one linear part with a verified dichotomy certificate and the two
/// perturbations f, g; exposes the bounded solutions chi / vartheta and the
/// pointwise equivalence maps H and L built from them. Immutable after
/// construction; every evaluation is a pure function of its arguments.
class ConjugacyEngine {
public:
    ConjugacyEngine(LinearSystem sys, DichotomyCertificate cert, Perturbation f,
                    Perturbation g, EngineOpts opts = {});

    const LinearSystem& sys() const { return sys_; }
    const DichotomyCertificate& cert() const { return cert_; }
    const Perturbation& f() const { return f_; }
    const Perturbation& g() const { return g_; }
    const Seq& r_seq() const { return r_; }
    const EngineOpts& opts() const { return opts_; }
    const Window& window() const { return sys_.window(); }
    int dim() const { return sys_.dim(); }

    double B() const { return h23_.B; }
    double B_tail() const { return h23_.B_tail; }
    double theta() const { return h23_.theta; }
    double theta_tail() const { return h23_.theta_tail; }
    const H23Result& h23() const { return h23_; }
    const CertReport& cert_report() const { return cert_report_; }

    /// True when ||A_k^-1|| r_k < 1 holds at every window index, so
    /// trajectories extend backward from any anchor.
    bool backward_admissible() const { return backward_admissible_; }

    /// Bounded solution of w_{n+1} = A_n w_n - f(n, x_n) + g(n, w_n + x_n)
    /// along the trajectory x of the f-system through (m, xi).
    AuxSolution solve_chi(int m, const Vec& xi) const;
    /// Mirror image, along the trajectory y of the g-system through (m, nu):
    /// z_{n+1} = A_n z_n + f(n, z_n + y_n) - g(n, y_n).
    AuxSolution solve_vartheta(int m, const Vec& nu) const;

    Vec chi(int n, int m, const Vec& xi) const { return solve_chi(m, xi).w.at(n); }
    Vec vartheta(int n, int m, const Vec& nu) const { return solve_vartheta(m, nu).w.at(n); }

    /// H(n, xi) = xi + chi(n; (n, xi)) and L(n, nu) = nu + vartheta(n; (n, nu)).
    Vec H(int n, const Vec& xi) const;
    Vec L(int n, const Vec& nu) const;

    /// Engine with the roles of f and g exchanged.
    ConjugacyEngine swapped() const;

private:
    AuxSolution solve_aux(const Perturbation& carrier, const Perturbation& added, int m,
                          const Vec& anchor) const;

    LinearSystem sys_;
    DichotomyCertificate cert_;
    Perturbation f_;
    Perturbation g_;
    Seq r_;
    EngineOpts opts_;
    CertReport cert_report_;
    H23Result h23_;
    bool backward_admissible_ = false;
};

struct EquivalenceOpts {
    int num_points = 100;    // round-trip / bound-transfer sample points
    int num_solutions = 10;  // mapped trajectories per direction
    int hom1_probes = 3;     // series-identity spot checks per trajectory
    double xi_radius = 2.0;
    /// Adds +magnitude to one mapped value before the residual check; the
    /// corresponding row must then fail.
    bool fault_injection = false;
    double fault_magnitude = 0.1;
};

/// Checks the defining properties of the equivalence pair (H, L) by sampling:
/// boundedness of H - id and L - id, solution mapping in both directions,
/// round trips, and the fixed-point series identity along trajectories.
VerificationReport verify_equivalence(const ConjugacyEngine& engine, Sampler& sampler,
                                      const EquivalenceOpts& opts = {});

struct FlowIdentityOpts {
    int num_samples = 40;
    int max_offset = 5;
    double xi_radius = 2.0;
    double tol = 1e-6;
};

/// chi(n; (m, xi)) must agree with chi(n; (n, x(n, m, xi))) wherever the
/// trajectory can be continued; same for vartheta along the g-system.
VerificationReport verify_flow_identity(const ConjugacyEngine& engine, Sampler& sampler,
                                        const FlowIdentityOpts& opts = {});

/// delta * exp(sum_{p} (||A_p - I|| + r_p)) with p over [k, n) for n > k and
/// over [n, k) for n < k; returns delta when n == k.
double gronwall_bound(const LinearSystem& sys, const Perturbation& f, int k, int n,
                      double delta);

/// Finite continuity budget at anchor n and reach ell: series-weighted
/// Lipschitz mass times the growth factors the trajectories can accumulate
/// within the reach.
double gamma(const ConjugacyEngine& engine, int n, int ell);

struct HolderParams {
    double alpha = 0.0, K = 1.0, F = 0.0, G = 0.0, r = 0.0, M = 0.0;
    double theta = 0.0;    // K r (1 + e^-alpha) / (1 - e^-alpha)
    double B = 0.0;        // K (F+G) (1 + e^-alpha) / (1 - e^-alpha)
    double D1 = 0.0;       // 1 + 2K(F+G) / ((1 - e^-alpha)(1 - theta))
    double D2 = 0.0;       // 2 theta / (1 - theta)
    double exponent = 0.0; // 1 - (M + r)/alpha
    bool theta_ok = false;
    bool applicable = false; // M + r < alpha and theta < 1
};

HolderParams holder_params(double K, double F, double G, double alpha, double M, double r);

struct ModulusRow {
    double delta = 0.0;
    int direction = 0;
    double measured = 0.0;
    double bound = 0.0; // (D1 + D2) delta^exponent when applicable, else NaN
    bool within = true;
};

struct ModulusTable {
    std::vector<ModulusRow> rows;
    double fitted_slope = 0.0; // log-log fit of the per-delta worst modulus
    bool holder_applicable = false;
    bool all_within_bound = true;
};

/// Measures |H(n, xi + delta u) - H(n, xi)| over the delta ladder and the
/// given unit directions; compares against the Holder envelope when one is
/// supplied and applicable.
ModulusTable continuity_modulus(const ConjugacyEngine& engine, int n, const Vec& xi,
                                const std::vector<double>& deltas,
                                const std::vector<Vec>& directions,
                                const std::optional<HolderParams>& hp = std::nullopt);

} // namespace dichoteq
