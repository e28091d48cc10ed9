"""Integral objects of the representation: the mean of Q^(-1/(2 lam)), its
companion integral, partial integrals in the label, and the time map.

All label integrals run on a mesh whose panels never straddle zeros of C,
blow-up labels or data breakpoints.  Panels touching a blow-up label use the
substitution a = abar +- s^2 so that square-root type endpoint behaviour is
smoothed out.
"""
import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.optimize import brentq

from . import gk
from .errors import (NonIntegrable, OutOfRange, SpecialCase, TailUncertain,
                     ToleranceNotMet)
from .quadratic import q_parts

PLAIN, LEFT, RIGHT = 0, 1, 2


class _Mesh:
    """Piecewise change of variables tau -> alpha on [0, 1]."""

    def __init__(self, spec, report):
        data = spec.data
        pts = {0.0, 1.0, *data.breakpoints, *report.omega_set}
        sing = set()
        if report.eta_star is not None:
            if report.alpha_bar_interval:
                for lo, hi in report.alpha_bar_interval:
                    pts.update((lo, hi))
            for p in report.alpha_bar:
                if not any(lo <= p <= hi for lo, hi in report.alpha_bar_interval):
                    pts.add(p)
                    sing.add(p)
        edges = sorted(p for p in pts if 0.0 <= p <= 1.0)
        edges = [e for i, e in enumerate(edges) if i == 0 or e - edges[i - 1] > 1e-14]
        edges[0], edges[-1] = 0.0, 1.0
        lo_l, hi_l, mode_l = [], [], []
        for lo, hi in zip(edges[:-1], edges[1:]):
            sl = any(abs(lo - s) < 1e-14 for s in sing)
            sr = any(abs(hi - s) < 1e-14 for s in sing)
            if sl and sr:
                mid = 0.5 * (lo + hi)
                lo_l += [lo, mid]
                hi_l += [mid, hi]
                mode_l += [LEFT, RIGHT]
            else:
                lo_l.append(lo)
                hi_l.append(hi)
                mode_l.append(LEFT if sl else RIGHT if sr else PLAIN)
        self.lo = np.array(lo_l)
        self.hi = np.array(hi_l)
        self.mode = np.array(mode_l)
        length = np.where(self.mode == PLAIN, self.hi - self.lo, np.sqrt(self.hi - self.lo))
        self.span = length
        self.T = np.concatenate([[0.0], np.cumsum(length)])

    @property
    def tau_edges(self):
        return self.T.copy()

    def from_tau(self, tau):
        j = np.clip(np.searchsorted(self.T, tau, side="right") - 1, 0, len(self.lo) - 1)
        s = tau - self.T[j]
        lo, hi, mode, L = self.lo[j], self.hi[j], self.mode[j], self.span[j]
        r = L - s
        alpha = np.where(mode == PLAIN, lo + s, np.where(mode == LEFT, lo + s * s, hi - r * r))
        w = np.where(mode == PLAIN, 1.0, np.where(mode == LEFT, 2.0 * s, 2.0 * r))
        return np.clip(alpha, 0.0, 1.0), w

    def to_tau(self, alpha):
        alpha = np.asarray(alpha, dtype=float)
        j = np.clip(np.searchsorted(self.lo, alpha, side="right") - 1, 0, len(self.lo) - 1)
        lo, hi, mode, L = self.lo[j], self.hi[j], self.mode[j], self.span[j]
        d_lo = np.maximum(alpha - lo, 0.0)
        d_hi = np.maximum(hi - alpha, 0.0)
        return self.T[j] + np.where(mode == PLAIN, d_lo,
                                    np.where(mode == LEFT, np.sqrt(d_lo), L - np.sqrt(d_hi)))


def _check_eta(spec, report, etas):
    if spec.lam == 0.0:
        raise SpecialCase("lambda = 0: Q is identically one and the representation does not apply")
    etas = np.atleast_1d(np.asarray(etas, dtype=float))
    if np.any(etas < 0):
        raise OutOfRange("eta must be non-negative")
    if report.eta_star is not None and np.any(etas >= report.eta_star):
        raise OutOfRange(f"eta must stay below eta* = {report.eta_star!r}")
    return etas


def _integrand(spec, mesh, etas, with_h=True):
    inv = -1.0 / (2.0 * spec.lam)
    e = etas[:, None]

    def f(tau):
        alpha, w = mesh.from_tau(tau)
        Q, num = q_parts(spec, alpha[None, :], e)
        P0 = Q ** inv
        if not with_h:
            return P0 * w
        return np.vstack([P0 * w, num * P0 / Q * w])
    return f


def _run(spec, f, edges, per_segment=False, rel=None):
    tol = spec.tol
    rel = tol.quad_rel if rel is None else rel
    res = gk.integrate(f, edges, tol.quad_abs, rel, per_segment=per_segment)
    if not res.converged:
        val = res.value if res.value.ndim == 1 else res.value.sum(axis=1)
        err = res.error if res.error.ndim == 1 else res.error.sum(axis=1)
        allowed = 10 * np.maximum(tol.quad_abs, np.asarray(rel) * np.abs(val))
        if np.any(err > allowed):
            raise ToleranceNotMet(f"quadrature error bound {np.max(err):.3e} above tolerance",
                                  res.value, res.error)
    return res


CHUNK = 32
NOISE = 100 * np.finfo(float).eps


def noise_floor(spec, report, etas):
    """Relative accuracy attainable near eta*, where Q suffers cancellation."""
    rel = np.full(len(etas), spec.tol.quad_rel)
    if report.eta_star is not None:
        gap = np.maximum(1.0 - etas / report.eta_star, 1e-300)
        rel = np.maximum(rel, NOISE / gap)
    return rel


def moments(spec, report, etas):
    """Return (pbar0, i2, error bounds) at each eta.

    Values of eta are processed in small groups that share one adaptive mesh.
    """
    etas = _check_eta(spec, report, etas)
    mesh = _Mesh(spec, report)
    k = len(etas)
    pb, iv, er = np.empty(k), np.empty(k), np.empty(2 * k)
    for s in range(0, k, CHUNK):
        e = etas[s:s + CHUNK]
        m = len(e)
        rel = noise_floor(spec, report, e)
        res = _run(spec, _integrand(spec, mesh, e), mesh.tau_edges, rel=np.concatenate([rel, rel]))
        pb[s:s + m], iv[s:s + m] = res.value[:m], res.value[m:]
        er[s:s + m], er[k + s:k + s + m] = res.error[:m], res.error[m:]
    return pb, iv, er


def pbar0(spec, report, eta):
    """Mean over labels of Q(a, eta)^(-1/(2 lam))."""
    v, _, _ = moments(spec, report, eta)
    return float(v[0]) if np.ndim(eta) == 0 else v


def i2(spec, report, eta):
    """Integral of (lam u0' - eta C) Q^(-1 - 1/(2 lam)); equals lam times d pbar0/d eta."""
    _, v, _ = moments(spec, report, eta)
    return float(v[0]) if np.ndim(eta) == 0 else v


def p0_partial(spec, report, alpha, eta):
    """Integral of Q(., eta)^(-1/(2 lam)) from 0 to each ``alpha``."""
    etas = _check_eta(spec, report, eta)
    mesh = _Mesh(spec, report)
    al = np.atleast_1d(np.asarray(alpha, dtype=float))
    order = np.argsort(al)
    taus = mesh.to_tau(al[order])
    edges = np.unique(np.concatenate([mesh.tau_edges, taus]))
    res = _run(spec, _integrand(spec, mesh, etas, with_h=False), edges, per_segment=True,
               rel=noise_floor(spec, report, etas))
    cum = np.concatenate([np.zeros((len(etas), 1)), np.cumsum(res.value, axis=1)], axis=1)
    idx = np.searchsorted(edges, taus)
    out = np.empty((len(etas), len(al)))
    out[:, order] = cum[:, idx]
    if np.ndim(alpha) == 0 and np.ndim(eta) == 0:
        return float(out[0, 0])
    if np.ndim(eta) == 0:
        return out[0]
    return out


def gamma0_rate(spec, report, etas):
    """d gamma(0, .)/d eta for periodic data (mean-zero velocity gauge)."""
    etas = _check_eta(spec, report, etas)
    mesh = _Mesh(spec, report)
    out = np.empty(len(etas))
    for s in range(0, len(etas), CHUNK):
        out[s:s + CHUNK] = _gamma0_rate_chunk(spec, report, mesh, etas[s:s + CHUNK])
    return out


def _gamma0_rate_chunk(spec, report, mesh, etas):
    # d gamma0/d eta = -(i2 pbar/2 - int h P) / (lam pbar^2), P the running
    # integral of Q^(-1/(2 lam)); P is built panel by panel from the
    # interpolant through the Kronrod nodes.
    k = len(etas)
    f = _integrand(spec, mesh, etas)
    rel = noise_floor(spec, report, etas)
    res = _run(spec, f, mesh.tau_edges, rel=np.concatenate([rel, rel]))
    pbar, i2v = res.value[:k], res.value[k:]
    a, b = res.panels[:, 0], res.panels[:, 1]
    half = 0.5 * (b - a)
    x = 0.5 * (a + b)[:, None] + half[:, None] * gk.NODES[None, :]
    vals = f(x.ravel()).reshape(2 * k, len(a), 15)
    p0w, hw = vals[:k], vals[k:]
    inner = np.einsum("ij,kpj->kpi", gk.CUMULATIVE, p0w) * half[None, :, None]
    totals = np.einsum("kpj,j->kp", p0w, gk.WEIGHTS) * half[None, :]
    start = np.concatenate([np.zeros((k, 1)), np.cumsum(totals, axis=1)[:, :-1]], axis=1)
    P = start[:, :, None] + inner
    hp = (np.einsum("kpj,j->kp", hw * P, gk.WEIGHTS) * half[None, :]).sum(axis=1)
    return -(i2v * pbar / 2.0 - hp) / (spec.lam * pbar * pbar)


def gamma0(spec, report, eta):
    eta = float(eta)
    if eta == 0.0:
        return 0.0
    val, _ = gk.integrate_scalar(lambda s: gamma0_rate(spec, report, s), 0.0, eta,
                                 spec.tol.quad_abs, spec.tol.quad_rel)
    return val


# ------------------------------------------------------------------ time map

def _dt_deta(spec, report):
    two_lam = 2.0 * spec.lam

    def f(sig):
        p, _, _ = moments(spec, report, sig)
        return p ** two_lam
    return f


@dataclass
class IntegralCache:
    eta_knots: np.ndarray
    pbar_vals: np.ndarray
    i2_vals: np.ndarray
    t_vals: np.ndarray
    eta_star: Optional[float] = None
    extra: dict = field(default_factory=dict)

    def to_csv(self, path):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["eta", "pbar0", "i2", "t"])
            for row in zip(self.eta_knots, self.pbar_vals, self.i2_vals, self.t_vals):
                w.writerow([f"{v:.17g}" for v in row])


def default_knots(report, levels=27, uniform=8, far=1e4):
    if report.eta_star is not None:
        es = report.eta_star
        base = np.linspace(0.0, 0.5 * es, uniform + 1)
        geo = es * (1.0 - 0.5 ** np.arange(2, levels + 1))
        return np.concatenate([base, geo])
    base = np.linspace(0.0, 1.0, uniform + 1)
    geo = 2.0 ** np.arange(1, int(math.ceil(math.log2(far))) + 1)
    return np.concatenate([base, geo])


def build_cache(spec, report, knots=None):
    knots = default_knots(report) if knots is None else np.asarray(knots, dtype=float)
    if knots[0] != 0.0 or np.any(np.diff(knots) <= 0):
        raise ValueError("cache knots must start at 0 and increase strictly")
    pb, iv, _ = moments(spec, report, knots)
    res = _run(spec, _dt_deta(spec, report), knots, per_segment=True)
    t = np.concatenate([[0.0], np.cumsum(res.value[0])])
    return IntegralCache(knots, pb, iv, t, report.eta_star)


def time_of_eta(spec, report, eta, cache=None):
    """Physical time t(eta) = integral of pbar0^(2 lam) from 0 to eta."""
    etas = np.atleast_1d(np.asarray(eta, dtype=float))
    _check_eta(spec, report, etas)
    out = np.empty_like(etas)
    if cache is not None:
        j = np.clip(np.searchsorted(cache.eta_knots, etas, side="right") - 1, 0, len(cache.eta_knots) - 1)
        base_eta = cache.eta_knots[j]
        base_t = cache.t_vals[j]
    else:
        base_eta = np.zeros_like(etas)
        base_t = np.zeros_like(etas)
    f = _dt_deta(spec, report)
    for i, (e, b0, t0) in enumerate(zip(etas, base_eta, base_t)):
        if e == b0:
            out[i] = t0
        else:
            res = _run(spec, f, [b0, e])
            out[i] = t0 + float(res.value[0])
    return float(out[0]) if np.ndim(eta) == 0 else out


def eta_of_time(spec, report, t, cache=None, t_limit=None):
    """Invert the time map by bracketed root finding."""
    t = float(t)
    if t < 0:
        raise OutOfRange("time must be non-negative")
    if t == 0.0:
        return 0.0
    if t_limit is not None and t >= t_limit:
        raise OutOfRange(f"t = {t} is not below the terminal time {t_limit}")
    if cache is None:
        cache = build_cache(spec, report)
    j = int(np.searchsorted(cache.t_vals, t, side="right")) - 1
    if j < len(cache.t_vals) - 1:
        lo, hi = cache.eta_knots[j], cache.eta_knots[j + 1]
    else:
        lo = cache.eta_knots[-1]
        if report.eta_star is not None:
            hi = report.eta_star * (1.0 - 1e-13)
            if time_of_eta(spec, report, hi, cache) <= t:
                raise OutOfRange(f"t = {t} lies beyond the resolvable range before eta*")
        else:
            hi = 2.0 * lo
            while time_of_eta(spec, report, hi, cache) <= t:
                lo, hi = hi, 2.0 * hi
                if hi > 1e12:
                    raise OutOfRange(f"t = {t} is beyond the steady-state time limit")
    g = lambda e: time_of_eta(spec, report, e, cache) - t
    return brentq(g, lo, hi, xtol=spec.tol.root_tol, rtol=4 * np.finfo(float).eps)


# ------------------------------------------------------------- terminal time

@dataclass
class TerminalTime:
    finite: bool
    value: float            # inf when not finite
    lower: float
    upper: float
    method: str
    tail_exponent: Optional[float] = None

    def to_dict(self):
        return {"finite": self.finite, "value": self.value if self.finite else None,
                "lower": self.lower, "upper": self.upper if math.isfinite(self.upper) else None,
                "method": self.method, "tail_exponent": self.tail_exponent}


def scaled_q(spec, a, u):
    """u^2 Q(a, 1/u) = C - 2 lam u0' u + u^2, in factorized form."""
    lam, kap = spec.lam, spec.kappa
    lu = lam * spec.data.up(a)
    rho = spec.data.rho(a)
    lk = lam * kap
    if lk > 0:
        s = math.sqrt(lk) * np.abs(rho)
        return (u - lu - s) * (u - lu + s)
    return (u - lu) ** 2 - lk * rho * rho


def _steady_tail_integrand(spec):
    inv = -1.0 / (2.0 * spec.lam)
    edges = [0.0, *spec.data.breakpoints, 1.0]

    def R(us):
        def g(a):
            return scaled_q(spec, a[None, :], us[:, None]) ** inv
        res = gk.integrate(g, edges, spec.tol.quad_abs, spec.tol.quad_rel)
        return res.value

    return lambda us: R(us) ** (2.0 * spec.lam)


def curly_m(spec):
    inv = -1.0 / (2.0 * spec.lam)
    edges = [0.0, *spec.data.breakpoints, 1.0]
    res = gk.integrate(lambda a: scaled_q(spec, a, 0.0) ** inv, edges,
                       spec.tol.quad_abs, spec.tol.quad_rel)
    return float(res.value[0])


def _local_exponent(spec, report, eps_rel):
    es = report.eta_star
    etas = es * (1.0 - np.asarray(eps_rel))
    p, _, _ = moments(spec, report, etas)
    F = p ** (2.0 * spec.lam)
    slopes = np.diff(np.log(F)) / np.diff(np.log(eps_rel))
    return F, slopes


def terminal_time(spec, report, cache=None, near=1e-8, divergence_margin=0.02):
    """Limit of t(eta) as eta approaches eta* (or infinity when there is no eta*)."""
    if spec.lam == 0.0:
        raise SpecialCase("lambda = 0 has no time rescaling")
    if report.eta_star is None:
        return _steady_terminal_time(spec, report, cache)
    es = report.eta_star
    if cache is None:
        cache = build_cache(spec, report)
    eps = near * np.array([1.0, 2.0, 4.0, 8.0])
    F, slopes = _local_exponent(spec, report, eps)
    p = float(slopes[0])
    if p <= -1.0 + divergence_margin:
        # only a lower bound is needed; a moderate gap keeps this cheap
        tc = time_of_eta(spec, report, es * (1 - 1e-4), cache)
        return TerminalTime(False, math.inf, tc, math.inf, "tail-divergent", p)
    tc = time_of_eta(spec, report, es * (1 - near), cache)
    tail = F[0] * near * es / (p + 1.0)
    # Same extrapolation one octave further out, as a consistency check.
    p2 = float(slopes[1])
    tc2 = tc - float(_run(spec, _dt_deta(spec, report), [es * (1 - 2 * near), es * (1 - near)]).value[0])
    tail2 = F[1] * 2 * near * es / (p2 + 1.0)
    v1, v2 = tc + tail, tc2 + tail2
    lo, hi = min(v1, v2, tc), max(v1, v2)
    if abs(v1 - v2) > 0.01 * abs(v1):
        raise TailUncertain(f"tail extrapolations disagree: {v2} vs {v1}", lo, hi)
    return TerminalTime(True, v1, lo, hi, "quadrature+power-tail", p)


def _steady_terminal_time(spec, report, cache=None):
    lam = spec.lam
    t1 = time_of_eta(spec, report, 1.0, cache)
    f = _steady_tail_integrand(spec)
    res = gk.integrate(f, [0.0, 1.0], spec.tol.quad_abs, spec.tol.quad_rel)
    if not res.converged or not np.isfinite(res.value[0]):
        return TerminalTime(False, math.inf, t1, math.inf, "steady-tail-divergent")
    t_inf = t1 + float(res.value[0])
    m = curly_m(spec)
    big = 1e4
    t_big = time_of_eta(spec, report, big, cache)
    direct = t_big + m ** (2 * lam) / big
    lo, hi = min(t_big, t_inf), max(direct, t_inf)
    if abs(direct - t_inf) > 0.01 * abs(t_inf):
        raise TailUncertain(f"steady tail {t_inf} disagrees with direct estimate {direct}", lo, hi)
    return TerminalTime(True, t_inf, t_big, max(t_inf, direct), "steady-substitution")


def limit_integrability(spec, report, windows=(1e-3, 5e-4, 2.5e-4, 1.25e-4)):
    """Fit |Q(abar + d, eta*)| ~ c d^p and decide whether pbar0 stays finite at eta*."""
    if report.eta_star is None or not report.alpha_bar:
        return None
    ab = report.alpha_bar[0]
    d = np.asarray(windows)
    side = 1.0 if ab + d[0] <= 1.0 else -1.0
    Q = np.abs(q_parts(spec, ab + side * d, report.eta_star)[0])
    p = float(np.polyfit(np.log(d), np.log(Q), 1)[0])
    expo = -1.0 / (2.0 * spec.lam)
    return {"contact_power": p, "exponent": expo, "divergent": p * expo <= -1.0}


def pbar0_at_limit(spec, report):
    info = limit_integrability(spec, report)
    if info is not None and info["divergent"]:
        raise NonIntegrable(f"Q^(-1/(2 lam)) is not integrable at eta* (contact power {info['contact_power']:.3f})")
    return pbar0(spec, report, report.eta_star * (1 - 1e-14))
