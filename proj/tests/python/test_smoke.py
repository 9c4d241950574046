#!/usr/bin/env python3
"""Smoke tests for the python module: the main operations drive end to end
and agree with the closed forms."""

import math
import sys

import dichoteq as dq

failures = []


def check(name, condition, detail=""):
    print(f"[{'ok' if condition else 'FAIL'}] {name} {detail}")
    if not condition:
        failures.append(name)


def main():
    ln2 = math.log(2.0)

    # diagonal family certifies sharply
    sc = dq.make_scenario("paper_diag", {"c": 1.0, "window": [-20, 20]})
    rep = dq.verify_gdd(sc.sys, sc.cert)
    check("paper_diag verifies", rep["passed"] and rep["max_violation"] <= 1e-12,
          f"violation {rep['max_violation']:.2e}")
    check("divergence consistent", rep["divergence_consistent"])

    rows = dq.alpha_rejection_scan(sc.cert, [0.5, 0.2], sc.sys.window)
    check("constant-rate claims rejected", all(r["found"] for r in rows))

    # scalar contraction: closed forms through a python-defined system
    w = dq.Window(-40, 40)
    sys1 = dq.LinearSystem(1, w, lambda n: [[0.5]])
    cert1 = dq.DichotomyCertificate.with_alpha([[1.0]], 1.0, ln2)
    check("transition product", abs(dq.transition(sys1, 3, 0)[0][0] - 0.125) < 1e-15)

    value, tail = dq.n_operator(cert1, 1.0, 0, w)
    check("N operator geometric value", abs(value - 1.5) < 1e-9, f"value {value:.12f}")

    sol = dq.bounded_linear(sys1, cert1, [[1.0]] * 81, -40)
    mid = sol["values"][50][0]  # index 10
    check("bounded solution closed form", abs(mid - 2.0) < 1e-10, f"value {mid:.12f}")
    check("bounded residual", sol["residual"] <= 1e-12)

    shifted = [[v[0] + 1.0] for v in sol["values"]]
    res = dq.solution_residual(sys1, dq.Perturbation.zero(1), shifted, sol["first_index"])
    check("residual detects a broken orbit", res >= 0.4, f"residual {res:.3f}")

    nl = dq.bounded_nonlinear(sys1, cert1, lambda n, z: [0.1 * math.sin(z[0]) + 1.0],
                              1.1, 0.1, 1e-10)
    target = 2.0
    for _ in range(200):  # independent plain-python fixed point of the same map
        target = 0.5 * target + 0.1 * math.sin(target) + 1.0
    check("picard scalar fixed point", abs(nl["values"][50][0] - target) < 1e-8,
          f"value {nl['values'][50][0]:.12f} vs {target:.12f}")

    # equal perturbations give the identity map
    params = {
        "c": 1.0,
        "window": [-15, 15],
        "f": {"family": "saturating", "c": {"mode": "reciprocal", "c": 0.2}},
        "g": {"family": "saturating", "c": {"mode": "reciprocal", "c": 0.2}},
    }
    eq = dq.make_scenario("paper_diag", params)
    engine_id = dq.ConjugacyEngine(eq.sys, eq.cert, eq.f, eq.f)
    xi = [0.4, -1.1]
    Hxi = engine_id.H(0, xi)
    check("f == g gives H == id", max(abs(a - b) for a, b in zip(Hxi, xi)) <= 1e-8)

    # distinct perturbations: round trip within the solver budget
    params["g"] = {"family": "saturating", "c": {"mode": "reciprocal", "c": 0.16}}
    sc2 = dq.make_scenario("paper_diag", params)
    engine = dq.ConjugacyEngine(sc2.sys, sc2.cert, sc2.f, sc2.g)
    check("theta certified", engine.theta < 0.5, f"theta {engine.theta:.3f}")
    back = engine.L(2, engine.H(2, xi))
    check("round trip", max(abs(a - b) for a, b in zip(back, xi)) <= 1e-6)

    report = dq.verify_equivalence(engine, seed=3, num_points=10, num_solutions=2)
    check("equivalence report passes", report["passed"],
          f"{report['summary']['checks_total']} checks")

    hp = dq.holder_params(1.0, 0.0, 0.0, ln2, 0.0, 0.2)
    check("holder theta arithmetic", abs(hp["theta"] - 0.6) < 1e-12)

    # error surfaces as python exceptions
    try:
        dq.make_scenario("mystery", {})
        check("unknown family raises", False)
    except dq.UnknownFamily:
        check("unknown family raises", True)
    except ValueError:
        check("unknown family raises", True)

    # certificate json round trip through plain dicts
    as_dict = sc.cert.to_json()
    back_cert = dq.DichotomyCertificate.from_json(as_dict)
    check("certificate json round trip",
          back_cert.K == sc.cert.K and back_cert.rate(3) == sc.cert.rate(3))

    print(f"{len(failures)} failures")
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
