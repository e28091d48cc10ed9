"""Measured versus predicted blow-up exponents.

The integrals are sampled at eta_k = eta*(1 - 2^-k) and a log-log slope is
fitted over k = 12..20.  Logarithmic divergences show up as log_flag.
"""
from hsrep.classifier import classify, compare_rates, fit_rates, predicted_rates
from hsrep.model import ProblemSpec, make_builtin

cases = [
    (-0.5, -1, [1.0]), (0.5, 1, [1.0]), (1.0, 1, [1.0]), (3.0, 1, [1.0]),
    (-3.0, 1, [0.0]), (1.0, 1, [0.0]), (2.0, 1, [0.0]),
]
for lam, kap, p in cases:
    spec = ProblemSpec(lam, kap, make_builtin("cos2pi", p))
    v = classify(spec, compute_time=False)
    cmp = compare_rates(fit_rates(spec, v.report, v), predicted_rates(spec, v))
    print(f"lambda={lam:+.2f} kappa={kap:+d} rho0={p[0]:g}  {v.multiplicity:6}  {v.regime.value}")
    for key, (m, pr, ok) in cmp.items():
        if key == "log_flag":
            print(f"    log quantities  measured {list(m)} predicted {list(pr)}")
        else:
            print(f"    {key:15} measured {m:+.4f} predicted {pr:+.4f}  {'ok' if ok else 'MISMATCH'}")
