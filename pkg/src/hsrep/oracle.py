"""Direct pseudo-spectral integrator for the periodic system.

Works with v = u_x and r = rho on a uniform grid:

    v_t = -u v_x + lam v^2 + kappa r^2 + I(t)
    r_t = -u r_x + 2 lam r v
    I   = -kappa <r^2> - (1 + lam) <v^2>

u is the zero-mean antiderivative of v.  Classic RK4 in time, derivatives
by FFT with the 2/3 rule.  Used only to cross-check the representation
formulas before blow-up.
"""
import csv
from dataclasses import dataclass

import numpy as np

from .errors import Overflow, StabilityViolation, ValidationError
from .evaluator import eval_rho, eval_ux, trajectory
from .model import BC
from .quadratic import root_report
from .quadrature import eta_of_time


@dataclass
class GridState:
    n: int
    t: float
    v: np.ndarray
    r: np.ndarray

    @property
    def x(self):
        return np.arange(self.n) / self.n


class _Spectral:
    def __init__(self, n):
        if n < 8 or n & (n - 1):
            raise ValidationError([f"grid size must be a power of two >= 8, got {n}"])
        self.n = n
        self.k = 2j * np.pi * np.fft.fftfreq(n, 1.0 / n)
        m = np.abs(np.fft.fftfreq(n, 1.0 / n))
        self.mask = (m < n / 3.0).astype(float)
        self.inv_k = np.zeros(n, dtype=complex)
        self.inv_k[1:] = 1.0 / self.k[1:]

    def velocity(self, vh):
        return np.fft.ifft(vh * self.inv_k).real

    def deriv(self, fh):
        return np.fft.ifft(fh * self.k).real


def nonlocal_term(spec, v, r):
    """I(t) by the trapezoid rule, which on a periodic grid is the mean."""
    return -spec.kappa * np.mean(r * r) - (1.0 + spec.lam) * np.mean(v * v)


def _rhs(spec, sp, v, r):
    vh = np.fft.fft(v) * sp.mask
    rh = np.fft.fft(r) * sp.mask
    u = sp.velocity(vh)
    v = np.fft.ifft(vh).real
    r = np.fft.ifft(rh).real
    vx, rx = sp.deriv(vh), sp.deriv(rh)
    lam = spec.lam
    fv = -u * vx + lam * v * v + spec.kappa * r * r + nonlocal_term(spec, v, r)
    fr = -u * rx + 2.0 * lam * r * v
    fvh = np.fft.fft(fv) * sp.mask
    # the nonlocal term is the projection that keeps <v> = 0; remove the
    # aliasing residue of the mean explicitly
    fvh[0] = 0.0
    return np.fft.ifft(fvh).real, np.fft.ifft(np.fft.fft(fr) * sp.mask).real


def stable_dt(spec, state, cfl=0.5):
    """Advective bound 0.5 dx / max|u| combined with the reaction time scale."""
    sp = _Spectral(state.n)
    u = sp.velocity(np.fft.fft(state.v))
    dx = 1.0 / state.n
    umax = float(np.max(np.abs(u)))
    rate = abs(spec.lam) * float(np.max(np.abs(state.v))) + \
        np.sqrt(abs(spec.kappa)) * float(np.max(np.abs(state.r))) + 1e-300
    adv = cfl * dx / umax if umax > 0 else np.inf
    return min(adv, cfl / rate)


def step(state, spec, dt, sp=None, ceiling=1e6):
    """One RK4 step of size dt."""
    if not dt > 0:
        raise StabilityViolation(f"time step must be positive, got {dt}")
    sp = sp or _Spectral(state.n)
    u = sp.velocity(np.fft.fft(state.v))
    umax = float(np.max(np.abs(u)))
    if umax > 0 and dt > 0.5 / state.n / umax * (1 + 1e-12):
        raise StabilityViolation(f"dt = {dt:.3e} exceeds the advective bound {0.5 / state.n / umax:.3e}")
    v, r = state.v, state.r
    k1 = _rhs(spec, sp, v, r)
    k2 = _rhs(spec, sp, v + 0.5 * dt * k1[0], r + 0.5 * dt * k1[1])
    k3 = _rhs(spec, sp, v + 0.5 * dt * k2[0], r + 0.5 * dt * k2[1])
    k4 = _rhs(spec, sp, v + dt * k3[0], r + dt * k3[1])
    v = v + dt / 6.0 * (k1[0] + 2 * k2[0] + 2 * k3[0] + k4[0])
    r = r + dt / 6.0 * (k1[1] + 2 * k2[1] + 2 * k3[1] + k4[1])
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(r))):
        raise Overflow(f"non-finite values at t = {state.t + dt:.6g}")
    peak = float(np.max(np.abs(v)))
    if peak > ceiling:
        raise Overflow(f"max|u_x| = {peak:.3e} exceeds the ceiling {ceiling:.1e} at t = {state.t + dt:.6g}")
    return GridState(state.n, state.t + dt, v, r)


def initial_state(spec, n):
    if spec.data.bc_mode is not BC.PERIODIC:
        raise ValidationError(["the direct integrator needs periodic data"])
    x = np.arange(n) / n
    v = spec.data.up(x)
    return GridState(n, 0.0, v - np.mean(v), spec.data.rho(x).astype(float))


def run_until(spec, t_end, n=256, dt_cfl=0.5, out_times=None, dt_max=None, ceiling=1e6):
    """Integrate to ``t_end`` and return the states at ``out_times`` (default [t_end])."""
    out_times = sorted(out_times) if out_times is not None else [t_end]
    sp = _Spectral(n)
    state = initial_state(spec, n)
    trace = []
    for target in out_times:
        while state.t < target:
            dt = stable_dt(spec, state, dt_cfl)
            if dt_max is not None:
                dt = min(dt, dt_max)
            dt = min(dt, target - state.t)
            if target - state.t - dt < 1e-12 * max(1.0, target):
                dt = target - state.t
            state = step(state, spec, dt, sp, ceiling)
            state.t = target if abs(state.t - target) < 1e-12 * max(1.0, target) else state.t
        trace.append(state)
    return trace


def interpolate(state, xs):
    """Evaluate the trigonometric interpolants of v and r at arbitrary points."""
    n = state.n
    xs = np.mod(np.asarray(xs, dtype=float), 1.0)
    freq = np.fft.fftfreq(n, 1.0 / n)
    out = []
    for f in (state.v, state.r):
        fh = np.fft.fft(f) / n
        if n % 2 == 0:
            fh[n // 2] *= 0.5   # split the Nyquist mode symmetrically
            fh = np.append(fh, fh[n // 2])
            fr = np.append(freq, -freq[n // 2])
        else:
            fr = freq
        phase = np.exp(2j * np.pi * np.outer(xs, fr))
        out.append((phase @ fh).real)
    return out[0], out[1]


def compare(spec, t, n=256, dt_cfl=0.5, dt_max=None, labels=257, report=None):
    """Sup-norm gap between the direct integrator and the representation formulas at time t."""
    report = report or root_report(spec)
    state = run_until(spec, t, n, dt_cfl, dt_max=dt_max)[-1]
    eta = eta_of_time(spec, report, t)
    alpha = np.linspace(0.0, 1.0, labels)
    x = trajectory(spec, report, alpha, eta)
    ux = eval_ux(spec, report, alpha, eta)
    rho = eval_rho(spec, report, alpha, eta)
    v, r = interpolate(state, x)
    return {
        "t": t, "eta": eta, "n": n,
        "ux_error": float(np.max(np.abs(v - ux))),
        "rho_error": float(np.max(np.abs(r - rho))),
        "error": float(max(np.max(np.abs(v - ux)), np.max(np.abs(r - rho)))),
        "mean_v": float(np.mean(state.v)),
    }


def trace_to_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "x", "ux", "rho"])
        for s in trace:
            for xi, vi, ri in zip(s.x, s.v, s.r):
                w.writerow([f"{s.t:.17g}", f"{xi:.17g}", f"{vi:.17g}", f"{ri:.17g}"])
