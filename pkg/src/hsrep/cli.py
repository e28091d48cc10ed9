"""Command-line front end.

    hsrep analyze  --example 3
    hsrep solve    --lambda -0.5 --kappa -1 --family cos2pi --params 0.5 --time 0.2,0.5
    hsrep example  --example 4 --out out/ex4
    hsrep sweep    --lambda -1,-0.5,0.5,1 --kappa -1,1 --out atlas
    hsrep rates    --example 1
    hsrep oracle-check --example 2 --grid 256

Exit codes: 0 success, 1 validation failure, 2 unclassified, 3 numerical failure.
"""
import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import cases
from .classifier import Regime, classify, fit_rates, predicted_rates
from .errors import HSError, ValidationError
from .evaluator import eulerian_slice, slice_to_csv, steady_constants
from .model import ProblemSpec, checked, load_spec, make_builtin, spec_to_dict
from .quadratic import root_report
from .quadrature import build_cache, eta_of_time, moments

SCHEMA = 1
EXIT_OK, EXIT_VALIDATION, EXIT_UNCLASSIFIED, EXIT_NUMERICAL = 0, 1, 2, 3


def _floats(text):
    if text is None:
        return None
    return [float(x) for x in str(text).split(",") if x.strip()]


def _clean(obj):
    """Make an object JSON-safe: numpy scalars to float, non-finite to strings."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_clean(v) for v in obj.tolist()]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return float(f"{x:.17g}")
    return obj


def write_json(path, payload):
    payload = dict(payload)
    payload["schema"] = SCHEMA
    with open(path, "w") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (float, np.floating)):
        return f"{float(x):.17g}"
    return str(x)


def build_spec(args, lam=None, kappa=None):
    if args.config:
        return load_spec(args.config)
    if args.example:
        return cases.worked_example(int(args.example))
    lam = lam if lam is not None else (_floats(args.lam) or [None])[0]
    kappa = kappa if kappa is not None else (_floats(args.kappa) or [None])[0]
    if lam is None or kappa is None:
        raise ValidationError(["give --config, --example, or both --lambda and --kappa"])
    data = make_builtin(args.family, _floats(args.params) or [], args.bc)
    return ProblemSpec(float(lam), float(kappa), data)


def _out_dir(args):
    out = Path(args.out or ".")
    out.mkdir(parents=True, exist_ok=True)
    return out


# ------------------------------------------------------------------ commands

def cmd_analyze(args):
    spec = checked(build_spec(args))
    verdict = classify(spec)
    payload = {"spec": spec_to_dict(spec), "verdict": verdict.to_dict(),
               "root_report": verdict.report.to_dict() if verdict.report is not None else None}
    out = _out_dir(args)
    write_json(out / "verdict.json", payload)
    t = verdict.t_limit
    tl = "n/a" if t is None else (f"{t.value:.10g}" if t.finite else "infinite")
    print(f"{verdict.regime.value} [{verdict.theorem_tag}] t_limit={tl}")
    if verdict.explanation:
        print(f"note: {verdict.explanation}")
    return EXIT_UNCLASSIFIED if verdict.regime is Regime.UNCLASSIFIED else EXIT_OK


def _times_to_etas(spec, report, args, cache):
    if args.eta:
        return _floats(args.eta)
    if args.time:
        return [eta_of_time(spec, report, t, cache) for t in _floats(args.time)]
    raise ValidationError(["give --eta or --time"])


def cmd_solve(args):
    spec = checked(build_spec(args))
    report = root_report(spec)
    cache = build_cache(spec, report)
    out = _out_dir(args)
    cache.to_csv(out / "integrals.csv")
    files = ["integrals.csv"]
    for i, eta in enumerate(_times_to_etas(spec, report, args, cache)):
        sl = eulerian_slice(spec, report, eta, args.grid, cache)
        name = f"slice_{i:03d}.csv"
        slice_to_csv(sl, out / name)
        files.append(name)
    write_json(out / "manifest.json", {"command": "solve", "files": files, "spec": spec_to_dict(spec)})
    print(f"wrote {len(files)} files to {out}")
    return EXIT_OK


def _rates_payload(spec, verdict):
    pred = predicted_rates(spec, verdict)
    meas = fit_rates(spec, verdict.report, verdict, raise_unstable=False)
    return {"predicted": pred.to_dict(), "measured": meas.to_dict()}


def cmd_rates(args):
    spec = checked(build_spec(args))
    verdict = classify(spec, compute_time=False)
    if verdict.regime is Regime.UNCLASSIFIED:
        print(verdict.explanation)
        return EXIT_UNCLASSIFIED
    payload = _rates_payload(spec, verdict)
    write_json(_out_dir(args) / "rates.json", payload)
    for key in ("pbar0_exp", "i2_exp", "ux_at_abar_exp"):
        print(f"{key:16s} predicted {_fmt(payload['predicted'][key])}  measured {_fmt(payload['measured'][key])}")
    return EXIT_OK


# plotted time ranges for the four worked examples, as fractions of t_limit
_EXAMPLE_TIMES = {1: (0.0, 0.5, 0.9, 0.99), 2: (0.0, 0.5, 0.9, 0.99),
                  3: (0.0, 0.5, 0.9, 0.99), 4: (0.0, 0.25, 0.5, 0.9)}


def _example_checks(k, spec, report, verdict):
    checks = []
    t = verdict.t_limit
    if k == 1:
        etas = np.linspace(0.1, 1.1, 11)
        pb, iv, _ = moments(spec, report, etas)
        ok = bool(np.max(np.abs(pb - 1.0)) <= 1e-8 and np.max(np.abs(iv)) <= 1e-8)
        checks.append({"name": "pbar0 = 1 and i2 = 0", "pass": ok})
        target = 2 * math.sqrt(2) / (1 + math.sqrt(2))
        checks.append({"name": "eta* = 2 sqrt2/(1+sqrt2)", "value": report.eta_star,
                       "pass": abs(report.eta_star - target) <= 1e-9})
    elif k in (2, 3):
        target = {2: 0.86, 3: 0.4}[k]
        checks.append({"name": f"t* = {target} +- 0.02", "value": t.value,
                       "pass": bool(t.finite and abs(t.value - target) <= 0.02)})
    elif k == 4:
        target = 0.5 * math.pi * math.sqrt(12.0 / 7.0)
        checks.append({"name": "t_inf = (pi/2) sqrt(12/7)", "value": t.value,
                       "pass": abs(t.value - target) <= 1e-4})
        st = steady_constants(spec)
        a = np.linspace(0.0, 1.0, 64)
        exact = 7.0 / (3.0 * (4 * a * a - 4 * a + 3))
        err = float(np.max(np.abs(st.p_inf(a) - exact)))
        checks.append({"name": "rho_inf profile", "value": err, "pass": err <= 1e-6})
    return checks


def cmd_example(args):
    if not args.example:
        raise ValidationError(["example needs --example <1-4>"])
    k = int(args.example)
    spec = cases.worked_example(k)
    out = _out_dir(args)
    manifest = {"command": "example", "example": k, "files": [], "complete": False}
    try:
        report = root_report(spec)
        verdict = classify(spec)
        write_json(out / "verdict.json", {"verdict": verdict.to_dict(), "root_report": report.to_dict()})
        manifest["files"].append("verdict.json")
        cache = build_cache(spec, report)
        cache.to_csv(out / "integrals.csv")
        manifest["files"].append("integrals.csv")
        t_lim = verdict.t_limit.value
        for frac in _EXAMPLE_TIMES[k]:
            eta = eta_of_time(spec, report, frac * t_lim, cache)
            sl = eulerian_slice(spec, report, eta, args.grid, cache)
            name = f"slice_t{frac:.2f}.csv"
            slice_to_csv(sl, out / name)
            manifest["files"].append(name)
        write_json(out / "rates.json", _rates_payload(spec, verdict))
        manifest["files"].append("rates.json")
        checks = _example_checks(k, spec, report, verdict)
        write_json(out / "checks.json", {"checks": checks})
        manifest["files"].append("checks.json")
        manifest["complete"] = True
    finally:
        write_json(out / "manifest.json", manifest)
    for c in checks:
        print(f"[{'PASS' if c['pass'] else 'FAIL'}] {c['name']}" +
              (f"  (value {c['value']:.10g})" if "value" in c else ""))
    return EXIT_OK


def _sweep_cell(job):
    lam, kappa, family, params = job
    row = {"lambda": lam, "kappa": kappa, "family": family}
    try:
        spec = ProblemSpec(lam, kappa, make_builtin(family, params))
        v = classify(spec)
        t = v.t_limit
        row.update(regime=v.regime.value, theorem_tag=v.theorem_tag,
                   t_limit=("inf" if t is not None and not t.finite else (t.value if t else None)),
                   eta_star=v.eta_star, multiplicity=v.multiplicity, error="")
    except HSError as exc:
        row.update(regime="", theorem_tag="", t_limit=None, eta_star=None, multiplicity="",
                   error=f"{type(exc).__name__}: {exc}")
    return row


def workers():
    env = os.environ.get("HS_NUM_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


SWEEP_COLUMNS = ["lambda", "kappa", "family", "regime", "theorem_tag", "t_limit",
                 "eta_star", "multiplicity", "error"]


def run_sweep(lams, kappas, family, params, n_workers=1):
    jobs = [(float(l), float(k), family, list(params)) for l in lams for k in kappas]
    if n_workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_workers) as pool:
            return list(pool.map(_sweep_cell, jobs))   # map keeps input order
    return [_sweep_cell(j) for j in jobs]


def cmd_sweep(args):
    lams, kappas = _floats(args.lam), _floats(args.kappa)
    if not lams or not kappas:
        raise ValidationError(["sweep needs --lambda and --kappa lists"])
    rows = run_sweep(lams, kappas, args.family, _floats(args.params) or [], workers())
    out = _out_dir(args)
    with open(out / "atlas.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(SWEEP_COLUMNS)
        for r in rows:
            w.writerow([_fmt(r[c]) for c in SWEEP_COLUMNS])
    print(f"wrote {len(rows)} rows to {out / 'atlas.csv'}")
    return EXIT_OK


def cmd_oracle_check(args):
    from .oracle import compare
    spec = checked(build_spec(args))
    report = root_report(spec)
    verdict = classify(spec)
    t = verdict.t_limit
    if args.time:
        t_eval = _floats(args.time)[0]
    elif t is not None and t.finite:
        t_eval = 0.5 * t.value
    else:
        t_eval = 1.0
    res = [compare(spec, t_eval, n=n, report=report) for n in (args.grid, 2 * args.grid)]
    ratio = res[0]["error"] / res[1]["error"] if res[1]["error"] > 0 else math.inf
    payload = {"coarse": res[0], "fine": res[1], "ratio": ratio,
               "pass": res[0]["error"] <= 1e-3 and ratio >= 4.0}
    write_json(_out_dir(args) / "oracle.json", payload)
    print(f"t={t_eval:.6g}  error(n={args.grid})={res[0]['error']:.3e}  "
          f"error(n={2 * args.grid})={res[1]['error']:.3e}  ratio={ratio:.1f}")
    return EXIT_OK


COMMANDS = {"analyze": cmd_analyze, "solve": cmd_solve, "example": cmd_example,
            "sweep": cmd_sweep, "rates": cmd_rates, "oracle-check": cmd_oracle_check}


def parser():
    p = argparse.ArgumentParser(prog="hsrep", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="JSON problem file")
    p.add_argument("--out", help="output directory (default: current)")
    p.add_argument("--example", choices=["1", "2", "3", "4"])
    p.add_argument("--lambda", dest="lam", help="scalar or comma list")
    p.add_argument("--kappa", help="scalar or comma list")
    p.add_argument("--family", default="cos2pi",
                   choices=["cos2pi", "sin2pi", "const", "affine", "piecewise_c2"])
    p.add_argument("--params", help="comma list of family parameters")
    p.add_argument("--bc", choices=["periodic", "dirichlet"])
    p.add_argument("--grid", type=int, default=256, help="labels per slice / oracle grid size")
    p.add_argument("--eta", help="comma list of eta values")
    p.add_argument("--time", help="comma list of physical times")
    return p


def main(argv=None):
    args = parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ValidationError as exc:
        for d in exc.diagnostics:
            print(f"invalid: {d}", file=sys.stderr)
        return EXIT_VALIDATION
    except HSError as exc:
        print(f"numerical failure: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
