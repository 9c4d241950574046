"""Certification of exponential dichotomies and topological-equivalence maps
for nonautonomous linear difference systems."""

try:
    from . import _dichoteq as _impl  # installed layout: extension inside the package
except ImportError:
    import _dichoteq as _impl  # in-tree builds put the extension on sys.path

__version__ = "0.1.0"

_EXPORTED = [
    "Window",
    "LinearSystem",
    "Perturbation",
    "DichotomyCertificate",
    "Scenario",
    "ConjugacyEngine",
    "make_scenario",
    "make_perturbation",
    "transition",
    "propagate",
    "solution_residual",
    "verify_gdd",
    "verify_ed",
    "green",
    "n_operator",
    "check_h2_h3",
    "stepanov_norm",
    "alpha_rejection_scan",
    "bounded_linear",
    "bounded_nonlinear",
    "oracle_bounded",
    "verify_equivalence",
    "verify_flow_identity",
    "gronwall_bound",
    "gamma",
    "holder_params",
    "continuity_modulus",
    "IndexOutOfWindow",
    "SingularCoefficient",
    "BackwardNotContractive",
    "NoConvergence",
    "NotAProjection",
    "CertificateRejected",
    "TailBudgetExceeded",
    "NotContractive",
    "IterationCapExceeded",
    "WindowTooNarrow",
    "UnknownFamily",
    "InvalidParams",
    "ConfigError",
]

for _name in _EXPORTED:
    globals()[_name] = getattr(_impl, _name)

__all__ = _EXPORTED
