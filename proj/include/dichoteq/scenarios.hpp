#pragma once

#include <functional>
#include <map>
#include <string>

#include <json.hpp>

#include "dichoteq/dichotomy.hpp"
#include "dichoteq/lin_sys.hpp"
#include "dichoteq/sampling.hpp"
#include "dichoteq/window.hpp"

namespace dichoteq {

/// A ready-to-run bundle: system, certificate and perturbation pair, plus a
/// few closed-form reference values for cross-checking.
struct Scenario {
    std::string name;
    LinearSystem sys;
    DichotomyCertificate cert;
    Perturbation f;
    Perturbation g;
    std::map<std::string, double> expected;

    Scenario with_window(Window w) const;
};

/// Perturbation families.
///   zero                      f == 0 with exact zero metadata
///   saturating(c)             f(n, x)_i = c_n tanh(x_i); F_n = r_n = c_n exactly
/// The spec of c is a sequence JSON ({"mode": "constant"|"table"|"reciprocal"})
/// or a bare number (constant).
Perturbation make_perturbation(int dim, const nlohmann::json& spec);

/// System families.
///   paper_diag    params {c > 0}: A_n = diag(b_n, 1/b_n), b_n = exp(-c/(1+|n|)),
///                 P = diag(1, 0), K = 1, a_j = c/(1+|j|). Rates decay toward
///                 the ends but their partial sums diverge: a generalized
///                 dichotomy that is not a constant-rate one.
///   const_alpha   params {alpha > 0}: A_n = diag(e^-alpha, e^alpha),
///                 P = diag(1, 0), K = 1, a_j = alpha.
///   stable_alpha  params {alpha > 0}: A_n = e^-alpha I (d = 2), P = I, K = 1.
///                 The whole space contracts; the deviation M = 1 - e^-alpha
///                 is the smallest any system with this rate can have, which
///                 makes the Holder regime M + r < alpha reachable.
/// params may also carry "window" ([lo, hi], default [-30, 30]) and
/// perturbation specs under "f" and "g" (default zero).
Scenario make_scenario(const std::string& name, const nlohmann::json& params);

/// Reference evaluation of the Green series on a window twice as wide
/// (coefficients, rates and forcing frozen at their edge values beyond the
/// original range), restricted back to the original state indices.
VecSeq oracle_bounded(const LinearSystem& sys, const DichotomyCertificate& cert,
                      const VecSeq& q, const Window& window);

struct ScalarFixedPointParams {
    std::function<double(double)> map;
    double guess = 0.0;
    double tol = 1e-14;
    double damping = 1.0;
    int cap = 100000;
};

/// Damped iteration z <- z + damping (map(z) - z) to machine-level tolerance.
double oracle_scalar_fixed_point(const ScalarFixedPointParams& params);

struct PerturbationQuotients {
    double max_bound_quotient = 0.0; // max |f(n,x)| / F_n
    double max_lip_quotient = 0.0;   // max |f(n,x)-f(n,y)| / (r_n |x-y|)
};

/// Statistical check of the declared metadata of a perturbation.
PerturbationQuotients validate_perturbation(const Perturbation& p, int dim, const Window& w,
                                            int samples, double radius, Sampler& sampler);

} // namespace dichoteq
