"""Problem description: initial data, parameters, tolerances and validation."""
import json
import math
from dataclasses import dataclass, field, replace, asdict
from enum import Enum
from typing import Callable, Optional

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import gk
from .errors import UnknownFamily, ValidationError


class BC(str, Enum):
    PERIODIC = "periodic"
    DIRICHLET = "dirichlet"


@dataclass(frozen=True)
class ToleranceSet:
    quad_abs: float = 1e-10
    quad_rel: float = 1e-9
    root_tol: float = 1e-12
    eta_cutoff: float = 1e-6
    grid_n: int = 512

    def problems(self):
        out = []
        for name in ("quad_abs", "quad_rel", "root_tol", "eta_cutoff"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                out.append(f"tolerance {name} must be positive, got {v}")
        if not self.eta_cutoff < 1:
            out.append("tolerance eta_cutoff must be < 1")
        if int(self.grid_n) != self.grid_n or self.grid_n < 16:
            out.append("tolerance grid_n must be an integer >= 16")
        return out


@dataclass(frozen=True, eq=False)
class InitialData:
    """Slope ``u0_prime`` and density ``rho0`` on [0, 1].

    Both handles take a numpy array of labels and return an array.
    ``breakpoints`` lists interior points where the profiles are allowed to
    jump; quadrature never integrates across them.
    """
    u0_prime: Callable
    rho0: Callable
    bc_mode: BC = BC.PERIODIC
    family_tag: str = "custom"
    u0: Optional[Callable] = None
    breakpoints: tuple = ()
    name: str = "custom"
    params: tuple = ()

    def up(self, a):
        return _eval(self.u0_prime, a)

    def rho(self, a):
        return _eval(self.rho0, a)

    @property
    def has_jumps(self):
        return len(self.breakpoints) > 0


def _eval(fn, a):
    arr = np.asarray(a, dtype=float)
    out = np.asarray(fn(arr), dtype=float)
    if out.shape != arr.shape:
        out = np.broadcast_to(out, arr.shape).copy()
    return out


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    lam: float
    kappa: float
    data: InitialData
    tol: ToleranceSet = field(default_factory=ToleranceSet)

    def with_tol(self, **kw):
        return replace(self, tol=replace(self.tol, **kw))


FAMILIES = ("cos2pi", "sin2pi", "const", "affine", "piecewise_c2")


def _params(name, params, defaults):
    params = tuple(float(p) for p in params)
    if len(params) > len(defaults):
        raise UnknownFamily(f"family {name} takes at most {len(defaults)} params, got {len(params)}")
    return params + tuple(defaults[len(params):])


def make_builtin(name, params=(), bc=None):
    """Build one of the named initial-data families.

    cos2pi [rho, amp, shift]:   u0' = amp cos 2pi(a - shift), rho0 = rho
    sin2pi [rho, amp, shift]:   u0' = amp cos 2pi(a - shift), rho0 = rho sin 2pi(a - shift)
    const [slope, rho]:         u0' = slope (must be 0), rho0 = rho
    affine [rho]:               u0' = 1 - 2a, u0 = a(1 - a), rho0 = rho (Dirichlet)
    piecewise_c2 []:            three-plateau step data with jumps at 1/4 and 3/4
    """
    if name not in FAMILIES:
        raise UnknownFamily(f"unknown family {name!r}; choose from {', '.join(FAMILIES)}")
    if bc is None:
        bc = BC.DIRICHLET if name == "affine" else BC.PERIODIC
    bc = BC(bc)
    two_pi = 2.0 * np.pi

    if name in ("cos2pi", "sin2pi"):
        rho_c, amp, shift = _params(name, params, (1.0, 1.0, 0.0))

        def up(a):
            return amp * np.cos(two_pi * (a - shift))

        def u0(a):
            return amp / two_pi * (np.sin(two_pi * (a - shift)) + np.sin(two_pi * shift))

        if name == "cos2pi":
            def rho(a):
                return np.full_like(a, rho_c, dtype=float)
        else:
            def rho(a):
                return rho_c * np.sin(two_pi * (a - shift))
        return InitialData(up, rho, bc, "trig", u0, (), name, (rho_c, amp, shift))

    if name == "const":
        slope, rho_c = _params(name, params, (0.0, 1.0))
        if slope != 0.0:
            raise ValidationError([f"const slope {slope} breaks periodicity (u0 must return to zero)"])

        def up(a):
            return np.zeros_like(a, dtype=float)

        def rho(a):
            return np.full_like(a, rho_c, dtype=float)
        return InitialData(up, rho, bc, "constant", lambda a: np.zeros_like(a, dtype=float),
                           (), name, (slope, rho_c))

    if name == "affine":
        (rho_c,) = _params(name, params, (1.0,))
        if bc is BC.PERIODIC:
            raise ValidationError(["affine slope 1-2a is not periodic (u0'(0)=1, u0'(1)=-1)"])

        def up(a):
            return 1.0 - 2.0 * a

        def rho(a):
            return np.full_like(a, rho_c, dtype=float)
        return InitialData(up, rho, bc, "affine", lambda a: a * (1.0 - a), (), name, (rho_c,))

    _params(name, params, ())

    def up(a):
        return np.where(a < 0.25, 0.5, np.where(a <= 0.75, 1.0, -2.5))

    def rho(a):
        return np.where((a >= 0.25) & (a <= 0.75), 0.0, -0.25)

    def u0(a):
        a = np.asarray(a, dtype=float)
        return np.where(a < 0.25, 0.5 * a,
                        np.where(a <= 0.75, 0.125 + (a - 0.25), 0.625 - 2.5 * (a - 0.75)))
    return InitialData(up, rho, bc, "piecewise-constant", u0, (0.25, 0.75), name, ())


def from_samples(alpha, u0_prime, rho0, bc=BC.PERIODIC):
    """Initial data from sampled profiles, interpolated by monotone cubics."""
    alpha = np.asarray(alpha, dtype=float)
    pu = PchipInterpolator(alpha, np.asarray(u0_prime, dtype=float), extrapolate=True)
    pr = PchipInterpolator(alpha, np.asarray(rho0, dtype=float), extrapolate=True)
    anti = pu.antiderivative()
    base = float(anti(0.0))
    return InitialData(lambda a: pu(a), lambda a: pr(a), BC(bc), "custom-samples",
                       lambda a: anti(a) - base, (), "samples", ())


def mean_slope(data, tol=None):
    tol = tol or ToleranceSet()
    edges = [0.0, *data.breakpoints, 1.0]
    res = gk.integrate(data.up, edges, tol.quad_abs, tol.quad_rel)
    return float(res.value[0])


def validate(spec):
    """Return the list of violated invariants (empty when ``spec`` is valid)."""
    diags = []
    for name, v in (("lambda", spec.lam), ("kappa", spec.kappa)):
        if not math.isfinite(v):
            diags.append(f"{name} must be finite, got {v}")
    diags.extend(spec.tol.problems())
    d = spec.data
    a = np.linspace(0.0, 1.0, 10001)
    try:
        up, rho = d.up(a), d.rho(a)
    except Exception as exc:  # user handles may fail arbitrarily
        return diags + [f"profile evaluation failed: {exc}"]
    if not (np.all(np.isfinite(up)) and np.all(np.isfinite(rho))):
        diags.append("profiles must be finite and bounded on [0,1]")
        return diags

    if d.bc_mode is BC.PERIODIC:
        if not d.has_jumps:
            if abs(up[0] - up[-1]) > 1e-12:
                diags.append(f"periodicity violated: u0'(0)-u0'(1) = {up[0] - up[-1]:.3e}")
            if abs(rho[0] - rho[-1]) > 1e-12:
                diags.append(f"periodicity violated: rho0(0)-rho0(1) = {rho[0] - rho[-1]:.3e}")
        m = mean_slope(d, spec.tol)
        if abs(m) > 100 * spec.tol.quad_abs:
            diags.append(f"mean-zero violated: integral of u0' = {m:.3e}")
    elif d.u0 is not None:
        ends = d.u0(np.array([0.0, 1.0]))
        for lbl, v in zip(("u0(0)", "u0(1)"), ends):
            if abs(v) > 1e-12:
                diags.append(f"Dirichlet condition violated: {lbl} = {v:.3e}")
    return diags


def checked(spec):
    diags = validate(spec)
    if diags:
        raise ValidationError(diags)
    return spec


def spec_from_dict(d):
    data = d.get("data", {})
    tol = ToleranceSet(**{k: (int(v) if k == "grid_n" else float(v))
                          for k, v in d.get("tol", {}).items()})
    idata = make_builtin(data.get("family", "cos2pi"), data.get("params", []), data.get("bc"))
    return ProblemSpec(float(d["lambda"]), float(d["kappa"]), idata, tol)


def spec_to_dict(spec):
    return {
        "lambda": spec.lam,
        "kappa": spec.kappa,
        "data": {"family": spec.data.name, "params": list(spec.data.params),
                 "bc": spec.data.bc_mode.value},
        "tol": asdict(spec.tol),
    }


def load_spec(path):
    with open(path) as fh:
        return spec_from_dict(json.load(fh))
