"""Regime atlas over a (lambda, kappa) grid for cosine slope data.

Prints one row per parameter pair.  The same table is what
``hsrep sweep`` writes to atlas.csv.
"""
import sys

from hsrep.cli import run_sweep

family = sys.argv[1] if len(sys.argv) > 1 else "cos2pi"
lams = [-3, -2, -1.5, -1, -0.5, -0.25, 0.25, 0.5, 1, 1.5, 2, 3]
rows = run_sweep(lams, [-1, 1], family, [1.0])

print(f"{'lambda':>7} {'kappa':>6}  {'regime':26} {'tag':14} t_limit")
for row in rows:
    t = row["t_limit"]
    t = "inf" if t == "inf" else (f"{t:.6f}" if t is not None else "-")
    print(f"{row['lambda']:7g} {row['kappa']:6g}  {row['regime']:26} {row['theorem_tag']:14} {t}")
