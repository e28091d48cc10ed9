"""Walk through the four worked examples.

For each one: the regime and its tag, the terminal time, and a few samples of
u_x and rho along the blow-up characteristic as t approaches the limit.

    python demos/worked_examples.py
"""
import numpy as np

from hsrep import cases
from hsrep.classifier import classify
from hsrep.evaluator import eval_rho, eval_ux, steady_constants
from hsrep.quadrature import build_cache, eta_of_time

for k in (1, 2, 3, 4):
    spec = cases.worked_example(k)
    v = classify(spec)
    r = v.report
    print(f"\nexample {k}: lambda={spec.lam:g} kappa={spec.kappa:g}")
    print(f"  {v.regime.value} [{v.theorem_tag}]  multiplicity {v.multiplicity}")
    print(f"  eta* = {r.eta_star}  t_limit = {v.t_limit_value:.10f}")
    cache = build_cache(spec, r)
    label = r.alpha_bar[0] if r.alpha_bar else 0.0
    for frac in (0.25, 0.5, 0.9, 0.99):
        t = frac * v.t_limit_value
        eta = eta_of_time(spec, r, t, cache)
        print(f"    t = {t:8.5f}  u_x = {eval_ux(spec, r, label, eta):+12.5f}"
              f"  rho = {eval_rho(spec, r, label, eta):+12.5f}")

# example 4 approaches a steady profile instead of blowing up
spec = cases.worked_example(4)
st = steady_constants(spec)
a = np.linspace(0, 1, 5)
print("\nexample 4 limits:")
print("  rho_inf:", np.round(st.p_inf(a), 6))
print("  u_inf:  ", np.round(st.u_inf(a), 6))
