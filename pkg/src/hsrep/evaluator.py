"""Reconstruction of the solution along characteristics.

Given eta (the rescaled time), every field at label ``alpha`` is an explicit
expression in Q(alpha, eta), pbar0(eta) and i2(eta):

    jac  = Q^(-1/(2 lam)) / pbar0
    ux   = pbar0^(-2 lam) / lam * ((lam u0' - eta C) / Q - i2 / pbar0)
    rho  = rho0 / Q * pbar0^(-2 lam)
"""
import csv
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import gk
from .errors import BlowupProximity, HypothesisViolated, SpecialCase
from .model import BC
from .quadratic import c_of, q_parts, rho_zero_set
from .quadrature import (curly_m, gamma0, moments, p0_partial, scaled_q,
                         time_of_eta)


@dataclass
class SolutionSample:
    alpha: np.ndarray
    eta: float
    t: Optional[float]
    jac: np.ndarray
    ux: np.ndarray
    rho: np.ndarray
    gamma: Optional[np.ndarray] = None


def _guard(spec, report, eta, check=True):
    if spec.lam == 0.0:
        raise SpecialCase("lambda = 0: the representation formulas do not apply; "
                          "see the classifier verdict for this case")
    es = report.eta_star
    if check and es is not None and eta > (1.0 - spec.tol.eta_cutoff) * es:
        raise BlowupProximity(
            f"eta = {eta!r} is within the cutoff of eta* = {es!r}; "
            f"u_x at the blow-up labels diverges to {'+' if spec.lam > 0 else '-'}infinity",
            sign=1 if spec.lam > 0 else -1)


def _fields(spec, report, alpha, eta, check=True):
    _guard(spec, report, eta, check)
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    pb, iv, _ = moments(spec, report, [eta])
    pb, iv = float(pb[0]), float(iv[0])
    lam = spec.lam
    Q, num = q_parts(spec, a, eta)
    scale = pb ** (-2.0 * lam)
    jac = Q ** (-1.0 / (2.0 * lam)) / pb
    ux = scale / lam * (num / Q - iv / pb)
    rho = spec.data.rho(a) / Q * scale
    return a, jac, ux, rho, pb, iv


def _out(alpha, v):
    return float(v[0]) if np.ndim(alpha) == 0 else v


def jacobian(spec, report, alpha, eta):
    a, jac, *_ = _fields(spec, report, alpha, eta)
    return _out(alpha, jac)


def eval_ux(spec, report, alpha, eta, check=True):
    a, _, ux, *_ = _fields(spec, report, alpha, eta, check)
    return _out(alpha, ux)


def eval_rho(spec, report, alpha, eta, check=True):
    a, _, _, rho, *_ = _fields(spec, report, alpha, eta, check)
    return _out(alpha, rho)


def trajectory(spec, report, alpha, eta):
    """Position gamma(alpha) of the characteristic started at ``alpha``."""
    _guard(spec, report, eta)
    a = np.atleast_1d(np.asarray(alpha, dtype=float))
    pb, _, _ = moments(spec, report, [eta])
    g = p0_partial(spec, report, a, eta) / float(pb[0])
    if spec.data.bc_mode is BC.PERIODIC:
        g = g + gamma0(spec, report, eta)
    return _out(alpha, g)


def sample(spec, report, alpha, eta, cache=None, with_gamma=True, with_time=True):
    a, jac, ux, rho, pb, _ = _fields(spec, report, alpha, eta)
    t = time_of_eta(spec, report, eta, cache) if with_time else None
    g = np.atleast_1d(trajectory(spec, report, a, eta)) if with_gamma else None
    return SolutionSample(a, float(eta), t, jac, ux, rho, g)


def eulerian_slice(spec, report, eta, n, cache=None):
    """Trace ``n`` characteristics and return fields sorted by position x."""
    alpha = np.linspace(0.0, 1.0, n)
    s = sample(spec, report, alpha, eta, cache)
    order = np.argsort(s.gamma, kind="stable")
    return {
        "alpha": s.alpha[order], "x": s.gamma[order], "eta": np.full(n, s.eta),
        "t": np.full(n, s.t), "jac": s.jac[order], "ux": s.ux[order], "rho": s.rho[order],
    }


def slice_to_csv(sl, path):
    cols = ["alpha", "x", "eta", "t", "jac", "ux", "rho"]
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for row in zip(*(sl[c] for c in cols)):
            w.writerow([f"{v:.17g}" for v in row])


# ------------------------------------------------------------ steady states

@dataclass
class SteadyState:
    curly_m: float
    curly_n: float
    u_inf: Callable
    p_inf: Callable


def steady_constants(spec):
    """Large-time limits of u_x and rho along characteristics (lam kappa < 0)."""
    lam = spec.lam
    if lam == 0.0 or lam * spec.kappa >= 0:
        raise HypothesisViolated("steady states require lambda * kappa < 0")
    a = np.linspace(0.0, 1.0, 4 * spec.tol.grid_n + 1)
    if np.min(c_of(spec, a)) <= 0.0:
        raise HypothesisViolated("C must be positive on [0, 1]")
    zpts, zint = rho_zero_set(spec)
    lu = lam * spec.data.up(np.array(zpts)) if zpts else np.zeros(0)
    if zint or np.any(lu > 0):
        raise HypothesisViolated("rho0 vanishes where lambda u0' > 0; no steady state")
    m = curly_m(spec)
    edges = [0.0, *spec.data.breakpoints, 1.0]
    expo = -1.0 - 1.0 / (2.0 * lam)
    res = gk.integrate(lambda x: spec.data.up(x) * c_of(spec, x) ** expo, edges,
                       spec.tol.quad_abs, spec.tol.quad_rel)
    n = float(res.value[0])
    m2 = m ** (2.0 * lam)

    def p_inf(x):
        x = np.asarray(x, dtype=float)
        return spec.data.rho(x) / (c_of(spec, x) * m2)

    def u_inf(x):
        x = np.asarray(x, dtype=float)
        return -(n / (m * m2) + spec.data.up(x) / (c_of(spec, x) * m2))

    return SteadyState(m, n, u_inf, p_inf)
