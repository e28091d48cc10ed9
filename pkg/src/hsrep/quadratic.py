"""Analysis of the quadratic Q(a, eta) = C(a) eta^2 - 2 lam u0'(a) eta + 1.

Q is the only place where the initial data and the time variable eta meet, so
the earliest positive root of Q over all labels decides when (and where) the
solution can lose regularity.
"""
import math
from dataclasses import dataclass, field, asdict
from typing import Optional

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import OmegaFailure

MAX_OMEGA = 64
FD_STEP = 1e-6
EDGE_GAP = 1e-13


def c_of(spec, a):
    lam = spec.lam
    up = spec.data.up(a)
    rho = spec.data.rho(a)
    return lam * (lam * up * up - spec.kappa * rho * rho)


def g_pair(spec, a):
    """Root reciprocals g1 >= g2 (real only when lam*kappa >= 0)."""
    lk = spec.lam * spec.kappa
    s = math.sqrt(max(lk, 0.0))
    lu = spec.lam * spec.data.up(a)
    r = s * np.abs(spec.data.rho(a))
    return lu + r, lu - r


def q_parts(spec, a, eta):
    """Return (Q, lam u0' - eta C) with broadcasting over ``a`` and ``eta``.

    Factorized forms keep full relative accuracy close to a root.
    """
    a = np.asarray(a, dtype=float)
    eta = np.asarray(eta, dtype=float)
    lam, kap = spec.lam, spec.kappa
    up = spec.data.up(a)
    rho = spec.data.rho(a)
    lu = lam * up
    lk = lam * kap
    if lk > 0:
        s = math.sqrt(lk) * np.abs(rho)
        g1, g2 = lu + s, lu - s
        f1 = 1.0 - eta * g1
        f2 = 1.0 - eta * g2
        return f1 * f2, 0.5 * (g1 * f2 + g2 * f1)
    w = 1.0 - eta * lu
    r2 = -lk * rho * rho
    return w * w + eta * eta * r2, lu * w - eta * r2


def q_of(spec, a, eta):
    return q_parts(spec, a, eta)[0]


@dataclass
class PointAnalysis:
    alpha: float
    c_val: float
    disc: float
    g1: Optional[float]
    g2: Optional[float]
    roots: list  # (eta, multiplicity), ascending


def analyze_point(spec, alpha):
    a = np.array([float(alpha)])
    lam, kap = spec.lam, spec.kappa
    up = float(spec.data.up(a)[0])
    rho = float(spec.data.rho(a)[0])
    c = float(c_of(spec, a)[0])
    disc = 4.0 * lam * kap * rho * rho
    g1 = g2 = None
    roots = []
    if disc >= 0:
        s = math.sqrt(max(lam * kap, 0.0)) * abs(rho)
        g1, g2 = lam * up + s, lam * up - s
    if c == 0.0:
        if up != 0.0 and lam != 0.0:
            roots = [(1.0 / (2.0 * lam * up), 1)]
    elif disc == 0.0:
        roots = [(1.0 / (lam * up), 2)]
    elif disc > 0:
        roots = sorted((1.0 / g, 1) for g in (g1, g2) if g != 0.0)
    return PointAnalysis(float(alpha), c, disc, g1, g2, roots)


# ---------------------------------------------------------------- scanning

def _pieces(data):
    edges = [0.0, *data.breakpoints, 1.0]
    out = []
    for i in range(len(edges) - 1):
        lo = edges[i] + (EDGE_GAP if i > 0 else 0.0)
        hi = edges[i + 1] - (EDGE_GAP if i < len(edges) - 2 else 0.0)
        out.append((lo, hi))
    return out


def _grid(lo, hi, n):
    m = max(16, int(math.ceil(n * (hi - lo))))
    return np.linspace(lo, hi, m + 1)


def _fd(f, x, lo, hi):
    h = FD_STEP
    xp = min(x + h, hi)
    xm = max(x - h, lo)
    return (f(xp) - f(xm)) / (xp - xm)


def _scalar(fv):
    return lambda x: float(fv(np.array([x]))[0])


def _zeros(fv, pieces, n, zero_tol, root_tol):
    """Isolated zeros and zero intervals of a vectorized function."""
    f = _scalar(fv)
    pts, intervals = [], []
    for lo, hi in pieces:
        x = _grid(lo, hi, n)
        y = fv(x)
        if np.all(np.abs(y) <= zero_tol):
            intervals.append((lo, hi))
            continue
        for i in range(len(x)):
            if y[i] == 0.0:
                pts.append(x[i])
        sc = np.nonzero(y[:-1] * y[1:] < 0)[0]
        for i in sc:
            r = brentq(f, x[i], x[i + 1], xtol=root_tol, rtol=4 * np.finfo(float).eps)
            pts.append(r)
        ay = np.abs(y)
        for i in range(len(x)):
            if y[i] == 0.0:
                continue
            left = ay[i - 1] if i > 0 else np.inf
            right = ay[i + 1] if i < len(x) - 1 else np.inf
            if not (ay[i] <= left and ay[i] <= right):
                continue
            if i > 0 and y[i - 1] * y[i] < 0 or i < len(x) - 1 and y[i] * y[i + 1] < 0:
                continue
            if ay[i] == left or ay[i] == right:
                continue
            if i == 0 or i == len(x) - 1:
                if ay[i] <= zero_tol:
                    pts.append(x[i])
                    continue
            a0, b0 = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
            r = _refine_extremum(f, a0, b0, lo, hi, lambda v: abs(v))
            if abs(f(r)) <= zero_tol:
                pts.append(r)
    return _dedupe(pts), intervals


def _refine_extremum(f, a0, b0, lo, hi, key):
    """Locate a local minimum of key(f) in [a0, b0] via the root of f'."""
    d = lambda x: _fd(f, x, lo, hi)
    da, db = d(a0), d(b0)
    if da * db < 0:
        return brentq(d, a0, b0, xtol=1e-14, rtol=4 * np.finfo(float).eps)
    res = minimize_scalar(lambda x: key(f(x)), bounds=(a0, b0), method="bounded",
                          options={"xatol": 1e-13})
    cands = [a0, b0, float(res.x)]
    return min(cands, key=lambda x: key(f(x)))


def _dedupe(pts, gap=1e-9):
    pts = sorted(float(p) for p in pts)
    out = []
    for p in pts:
        if not out or p - out[-1] > gap:
            out.append(p)
    return out


@dataclass
class MaxResult:
    value: float
    points: list
    intervals: list
    local_maxima: list  # (alpha, value) of every refined local maximum


def _maximize(fv, pieces, n, rel_tol=1e-11):
    f = _scalar(fv)
    cands = []
    flat = []
    for lo, hi in pieces:
        x = _grid(lo, hi, n)
        y = fv(x)
        for i in range(len(x)):
            left = y[i - 1] if i > 0 else -np.inf
            right = y[i + 1] if i < len(x) - 1 else -np.inf
            if not (y[i] >= left and y[i] >= right):
                continue
            if i == 0 or i == len(x) - 1 or y[i] == left or y[i] == right:
                cands.append((x[i], y[i]))
                if y[i] == left or y[i] == right:
                    continue
            a0, b0 = x[max(i - 1, 0)], x[min(i + 1, len(x) - 1)]
            r = _refine_extremum(f, a0, b0, lo, hi, lambda v: -v)
            cands.append((r, f(r)))
        flat.append((lo, hi, x, y))
    vmax = max(v for _, v in cands)
    tol = rel_tol * max(1.0, abs(vmax))
    intervals = []
    for lo, hi, x, y in flat:
        close = np.abs(y - vmax) <= tol
        if np.count_nonzero(close) < 3:
            continue
        # maximal runs of consecutive attaining grid points
        idx = np.nonzero(close)[0]
        runs = np.split(idx, np.nonzero(np.diff(idx) > 1)[0] + 1)
        for run in runs:
            if len(run) >= 3:
                a0 = lo if run[0] == 0 else x[run[0]]
                b0 = hi if run[-1] == len(x) - 1 else x[run[-1]]
                intervals.append((float(a0), float(b0)))
    pts = [p for p, v in cands if abs(v - vmax) <= tol
           and not any(a0 <= p <= b0 for a0, b0 in intervals)]
    locs = sorted({round(p, 12): (p, v) for p, v in cands}.values())
    return MaxResult(float(vmax), _dedupe(pts), intervals, locs)


# ---------------------------------------------------------------- reports

def _zero_tol(spec, values):
    return spec.tol.root_tol * max(1.0, float(np.max(np.abs(values))))


def c_identically_zero(spec):
    a = np.linspace(0.0, 1.0, spec.tol.grid_n + 1)
    c = c_of(spec, a)
    up = np.abs(spec.lam * spec.data.up(a))
    return bool(np.max(np.abs(c)) <= spec.tol.root_tol * max(1.0, float(np.max(up)) ** 2))


def is_homogeneous(spec):
    """u0' vanishes and rho0 is constant: the data is a fixed point."""
    a = np.linspace(0.0, 1.0, spec.tol.grid_n + 1)
    r = spec.data.rho(a)
    tol = spec.tol.root_tol * max(1.0, float(np.max(np.abs(r))))
    return bool(np.max(np.abs(spec.data.up(a))) <= tol and np.ptp(r) <= tol)


def find_omega(spec):
    """Labels where C vanishes, as a sorted list."""
    pieces = _pieces(spec.data)
    a = np.linspace(0.0, 1.0, spec.tol.grid_n + 1)
    fv = lambda x: c_of(spec, x)
    pts, intervals = _zeros(fv, pieces, spec.tol.grid_n, _zero_tol(spec, fv(a)), spec.tol.root_tol)
    if intervals:
        raise OmegaFailure(f"C vanishes on whole intervals {intervals}; Omega is not finite")
    if len(pts) > MAX_OMEGA:
        raise OmegaFailure(f"found {len(pts)} zeros of C (limit {MAX_OMEGA})")
    return pts


def rho_zero_set(spec):
    pieces = _pieces(spec.data)
    a = np.linspace(0.0, 1.0, spec.tol.grid_n + 1)
    fv = spec.data.rho
    scale = max(1.0, float(np.max(np.abs(fv(a)))))
    return _zeros(fv, pieces, spec.tol.grid_n, spec.tol.root_tol * scale, spec.tol.root_tol)


@dataclass
class RootReport:
    omega_set: list
    M: Optional[float]
    N: Optional[float]
    N1: Optional[float]
    eta_star: Optional[float]
    multiplicity: str  # "Single" | "Double" | "None"
    alpha_bar: list
    alpha_bar_interval: list = field(default_factory=list)
    omega_everywhere: bool = False

    def __post_init__(self):
        f = lambda v: None if v is None else float(v)
        self.M, self.N, self.N1, self.eta_star = f(self.M), f(self.N), f(self.N1), f(self.eta_star)
        self.omega_set = [float(v) for v in self.omega_set]
        self.alpha_bar = [float(v) for v in self.alpha_bar]

    @property
    def interval_valued(self):
        return bool(self.alpha_bar_interval)

    def to_dict(self):
        d = asdict(self)
        d["alpha_bar_interval"] = [list(p) for p in self.alpha_bar_interval]
        d["interval_valued_alpha_bar"] = self.interval_valued
        return d


def _in_band(p, omega, band):
    return any(abs(p - w) <= band for w in omega)


def _sample_intervals(intervals, k=5):
    out = []
    for lo, hi in intervals:
        out.extend(np.linspace(lo, hi, k).tolist())
    return out


def root_report(spec):
    tol = spec.tol
    lam, kap = spec.lam, spec.kappa
    if lam == 0.0:
        return RootReport([], None, None, None, None, "None", [], [], True)
    data = spec.data
    pieces = _pieces(data)
    n = tol.grid_n
    band = max(2.0 * tol.root_tol, 1e-8)

    everywhere = c_identically_zero(spec)
    omega = [] if everywhere else find_omega(spec)
    two_lu = lambda x: 2.0 * lam * data.up(x)
    if everywhere:
        M = _maximize(two_lu, pieces, n).value
    elif omega:
        M = float(np.max(two_lu(np.array(omega))))
    else:
        M = None

    lu = lambda x: lam * data.up(x)
    lu_max = _maximize(lu, pieces, n)
    sigma_lu = [v for p, v in lu_max.local_maxima if not _in_band(p, omega, band)]
    N1 = max(sigma_lu) if sigma_lu and not everywhere else None

    N = None
    eta_star = None
    pts, intervals = [], []
    mult = "None"
    lk = lam * kap

    if lk > 0:
        g1 = lambda x: g_pair(spec, x)[0]
        gm = _maximize(g1, pieces, n)
        sig = [v for p, v in gm.local_maxima if not _in_band(p, omega, band)]
        if sig and not everywhere:
            N = max(sig)
        if gm.value > 0:
            eta_star = 1.0 / gm.value
            pts, intervals = gm.points, gm.intervals
    else:
        if kap == 0.0:
            zpts, zint = [], [(lo, hi) for lo, hi in pieces]
        else:
            zpts, zint = rho_zero_set(spec)
        best, bpts, bint = -np.inf, [], []
        if zpts:
            vals = lu(np.array(zpts))
            best = float(np.max(vals))
        if zint:
            zm = _maximize(lu, zint, n)
            best = max(best, zm.value)
        if best > 0:
            vt = 1e-11 * max(1.0, abs(best))
            if zpts:
                bpts = [p for p, v in zip(zpts, lu(np.array(zpts))) if abs(v - best) <= vt]
            if zint and abs(zm.value - best) <= vt:
                bpts += zm.points
                bint = zm.intervals
            eta_star = 1.0 / best
            pts, intervals = _dedupe(bpts), bint

    if eta_star is not None:
        probe = list(pts) + _sample_intervals(intervals)
        rho_at = np.abs(data.rho(np.array(probe))) if probe else np.zeros(0)
        if lk <= 0 or np.all(rho_at <= tol.root_tol):
            mult = "Double"
        else:
            mult = "Single"
    knots = [0.0, *data.breakpoints, 1.0]
    snap = lambda v: min(knots, key=lambda k: abs(k - v)) if min(abs(k - v) for k in knots) < 1e-11 else v
    intervals = [(snap(lo), snap(hi)) for lo, hi in intervals]
    alpha_bar = list(pts) + _sample_intervals(intervals)
    return RootReport(omega, M, N, N1, eta_star, mult, alpha_bar,
                      [tuple(iv) for iv in intervals], everywhere)
