"""Invariant checks shared by the property tests and the acceptance suite.

Integrals over labels use scipy.integrate.quad, independent of the package's
own Gauss-Kronrod rule.
"""
import numpy as np
from scipy.integrate import quad

from hsrep import cases
from hsrep.evaluator import eval_rho, eval_ux, jacobian
from hsrep.quadratic import root_report
from hsrep.quadrature import build_cache, eta_of_time, time_of_eta

SPECS = {
    "example1": lambda: cases.worked_example(1),
    "example2": lambda: cases.worked_example(2),
    "example3": lambda: cases.worked_example(3),
    "example4": lambda: cases.worked_example(4),
    "swapped4": cases.swapped_example4,
    "piecewise": cases.piecewise_example,
}


def eta_range(report):
    return (0.0, 0.9 * report.eta_star) if report.eta_star is not None else (0.0, 50.0)


def random_etas(report, n=20, seed=0):
    lo, hi = eta_range(report)
    return np.sort(np.random.default_rng(seed).uniform(lo, hi, n))


def _label_integral(spec, f):
    edges = [0.0, *spec.data.breakpoints, 1.0]
    return sum(quad(f, a, b, epsabs=1e-12, epsrel=1e-11, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))


def check(spec, etas):
    """Worst violation of each invariant over ``etas``."""
    r = root_report(spec)
    cache = build_cache(spec, r)
    rho0 = lambda a: spec.data.rho(np.asarray(a, dtype=float))
    probe = np.linspace(0.0, 1.0, 97)
    out = dict(jac_mean=0.0, ux_mean=0.0, transport=0.0, sign=0, monotone=True, roundtrip=0.0)
    ts = []
    for eta in etas:
        out["jac_mean"] = max(out["jac_mean"], abs(_label_integral(spec, lambda a: jacobian(spec, r, a, eta)) - 1))
        # zero-mean u_x on the Eulerian side: int u_x dx = int u_x gamma_alpha dalpha
        m = _label_integral(spec, lambda a: eval_ux(spec, r, a, eta) * jacobian(spec, r, a, eta))
        out["ux_mean"] = max(out["ux_mean"], abs(m))
        jac = jacobian(spec, r, probe, eta)
        rho = eval_rho(spec, r, probe, eta)
        lhs = rho0(probe) * jac ** (2 * spec.lam)
        out["transport"] = max(out["transport"], float(np.max(np.abs(rho - lhs) / np.maximum(1, np.abs(lhs)))))
        out["sign"] += int(np.sum(np.sign(rho) != np.sign(rho0(probe))))
        t = time_of_eta(spec, r, eta, cache)
        ts.append(t)
        back = eta_of_time(spec, r, t, cache)
        out["roundtrip"] = max(out["roundtrip"], abs(back - eta) / max(1.0, eta))
    out["monotone"] = bool(np.all(np.diff(ts) > 0))
    return out


def ok(res, tol=1e-8):
    return (res["jac_mean"] <= tol and res["ux_mean"] <= tol and res["transport"] <= tol
            and res["sign"] == 0 and res["monotone"] and res["roundtrip"] <= tol)
