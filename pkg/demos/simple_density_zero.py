"""Blow-up driven by a simple zero of the density.

With lambda in (0, 1] and kappa < 0, the leading root of Q is double.  If rho0
vanishes only to first order at the leading label, the kappa rho0^2 term in Q
keeps the root from flattening out, pbar0 collapses like gap^(1 - 1/lambda),
and the time integral converges once lambda > 1/2.  The solution then blows up
in finite time.  The direct integrator follows the same growth.
"""
import numpy as np

from hsrep.classifier import classify, density_contact_order
from hsrep.evaluator import eval_ux
from hsrep.model import ProblemSpec, make_builtin
from hsrep.oracle import run_until
from hsrep.quadrature import eta_of_time

for lam in (0.4, 0.5, 0.6, 0.75, 0.9, 1.0):
    spec = ProblemSpec(lam, -1.0, make_builtin("sin2pi", [1.0]))
    v = classify(spec)
    order = density_contact_order(spec, v.blowup_locations[0])
    print(f"lambda={lam:.2f}: contact order {order:.2f}, {v.regime.value}, t_limit = {v.t_limit_value}")

spec = ProblemSpec(0.75, -1.0, make_builtin("sin2pi", [1.0]))
v = classify(spec)
r = v.report
times = [1.0, 1.5, 2.0, 2.1]
trace = run_until(spec, times[-1], n=512, dt_cfl=0.25, out_times=times)
print(f"\nlambda = 0.75, t_limit = {v.t_limit_value:.5f}")
for st in trace:
    ref = eval_ux(spec, r, r.alpha_bar[0], eta_of_time(spec, r, st.t))
    print(f"  t = {st.t:.2f}  formula {ref:12.6f}  direct {st.v[0]:12.6f}  max|u_x| {np.max(np.abs(st.v)):9.3f}")
