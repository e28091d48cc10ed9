"""Compare the characteristic formulas with a direct spectral integration.

At half the terminal time the two should agree closely, and doubling the
grid should shrink the gap by far more than the required factor of four.
"""
from hsrep import cases
from hsrep.oracle import compare
from hsrep.quadratic import root_report
from hsrep.quadrature import terminal_time

for k in (1, 2, 3):
    spec = cases.worked_example(k).with_tol(quad_abs=1e-13, quad_rel=1e-12)
    r = root_report(spec)
    t = 0.5 * terminal_time(spec, r).value
    e1 = compare(spec, t, n=256, dt_cfl=0.5, report=r)
    e2 = compare(spec, t, n=512, dt_cfl=0.25, report=r)
    print(f"example {k} at t = {t:.6f}: n=256 {e1['error']:.2e}  n=512 {e2['error']:.2e}"
          f"  ratio {e1['error'] / e2['error']:.0f}")
