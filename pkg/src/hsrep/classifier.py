"""Regime classification and blow-up rate exponents.

``classify`` walks a fixed decision tree over (lam, kappa) and the root
structure of Q; ``predicted_rates`` returns the asymptotic exponents expected
in each branch and ``fit_rates`` measures them from the integrals.
"""
import math
from dataclasses import dataclass, field, asdict
from enum import Enum
from typing import Optional

import numpy as np

from .errors import FitUnstable, HSError, HypothesisViolated, TailUncertain
from .evaluator import steady_constants
from .quadratic import c_identically_zero, is_homogeneous, q_parts, root_report
from .quadrature import TerminalTime, moments, terminal_time


class Regime(str, Enum):
    STEADY = "SteadyStateFiniteTime"
    GLOBAL_DECAY = "GlobalDecay"
    GLOBAL_STEADY = "GlobalNontrivialSteady"
    ONE_SIDED = "OneSidedBlowup"
    TWO_SIDED = "TwoSidedEverywhereBlowup"
    INVERTED = "InvertedTwoSided"
    RHO_BLOWUP = "RhoBlowup"
    TRIVIAL = "Trivial"
    GIPJ = "GiPJReduction"
    LAMBDA_ZERO = "SpecialLambdaZero"
    UNCLASSIFIED = "Unclassified"


class RhoFate(str, Enum):
    BOUNDED = "Bounded"
    PLUS = "BlowsUpPlus"
    MINUS = "BlowsUpMinus"
    VANISHES = "VanishesAtTstar"
    CONVERGES = "ConvergesNontrivial"
    ZERO_AT_POINTS = "IdenticallyZeroAtPoints"


# Theorem tags reported with each branch of the tree.
TAG_STEADY = "Thm 4.1"
TAG_DOUBLE_NEG = "Thm 4.2({})"
TAG_SINGLE_NEG = "Thm 4.3(1-2)"
TAG_SINGLE_POS = "Thm 4.4"
TAG_COR_NEG = "Cor C.1(1)"
TAG_COR_POS = "Cor C.2(1)"
TAG_KAPPA0 = "App A.1"
TAG_KAPPA0_TRIVIAL = "App A.2"
TAG_C_ZERO = "App A.3"
TAG_LAMBDA0 = "App A.4"


@dataclass
class RateTable:
    pbar0_exp: Optional[float]
    i2_exp: Optional[float]
    ux_at_abar_exp: float
    log_flag: bool
    log_quantities: tuple = ()
    variable: str = "gap"       # "gap": powers of eta*-eta; "eta": powers of eta
    residuals: dict = field(default_factory=dict)
    source: str = "theorem"     # or "simple-density-zero", see density_contact_order

    def to_dict(self):
        d = asdict(self)
        d["log_quantities"] = list(self.log_quantities)
        return d


@dataclass
class RegimeVerdict:
    regime: Regime
    theorem_tag: str
    t_limit: Optional[TerminalTime]
    blowup_locations: list
    rho_fate: RhoFate
    predicted_exponents: dict
    rho_fate_elsewhere: Optional[RhoFate] = None
    multiplicity: str = "None"
    eta_star: Optional[float] = None
    explanation: str = ""
    report: object = None
    steady: object = None

    @property
    def t_limit_value(self):
        if self.t_limit is None:
            return None
        return self.t_limit.value

    def to_dict(self):
        t = self.t_limit
        if t is None:
            tl = None
        elif t.finite:
            tl = {"kind": "Finite", "value": t.value, "lower": t.lower, "upper": t.upper}
        else:
            tl = {"kind": "Infinite"}
        d = {
            "regime": self.regime.value,
            "theorem_tag": self.theorem_tag,
            "t_limit": tl,
            "blowup_locations": [float(a) for a in self.blowup_locations],
            "rho_fate": self.rho_fate.value,
            "rho_fate_elsewhere": self.rho_fate_elsewhere.value if self.rho_fate_elsewhere else None,
            "predicted_exponents": self.predicted_exponents,
            "multiplicity": self.multiplicity,
            "eta_star": self.eta_star,
            "explanation": self.explanation,
        }
        if self.steady is not None:
            d["steady"] = {"curly_m": self.steady.curly_m, "curly_n": self.steady.curly_n}
        return d


INFINITE = TerminalTime(False, math.inf, 0.0, math.inf, "global")


def _time(spec, report):
    try:
        return terminal_time(spec, report), ""
    except TailUncertain as exc:
        mid = 0.5 * (exc.lower + exc.upper)
        return TerminalTime(True, mid, exc.lower, exc.upper, "uncertain-tail"), str(exc)
    except HSError as exc:
        return None, f"terminal time unavailable: {exc}"


def _verdict(regime, tag, spec, report, fate, elsewhere=None, t_limit=None,
             note="", steady=None, compute_time=True):
    if t_limit is None and compute_time and report is not None:
        t_limit, msg = _time(spec, report)
        note = "; ".join(x for x in (note, msg) if x)
    v = RegimeVerdict(regime, tag, t_limit,
                      list(report.alpha_bar) if report is not None else [],
                      fate, {}, elsewhere,
                      report.multiplicity if report is not None else "None",
                      report.eta_star if report is not None else None,
                      note, report, steady)
    if regime not in (Regime.UNCLASSIFIED, Regime.LAMBDA_ZERO, Regime.TRIVIAL):
        v.predicted_exponents = predicted_rates(spec, v).to_dict()
    return v


def density_contact_order(spec, alpha, h=1e-3):
    """Order p of the zero of rho0 at ``alpha`` (|rho0| ~ d^p), from two offsets."""
    side = 1.0 if alpha + 2 * h <= 1.0 else -1.0
    r = np.abs(spec.data.rho(np.array([alpha + side * h, alpha + 2 * side * h])))
    if r[0] == 0.0 or r[1] == 0.0:
        return math.inf
    return float(math.log(r[1] / r[0]) / math.log(2.0))


def _simple_density_zero(spec, report):
    """True when lam kappa < 0 and rho0 has a simple zero at the leading label."""
    if spec.lam * spec.kappa >= 0 or report.eta_star is None or not report.alpha_bar:
        return False
    return density_contact_order(spec, report.alpha_bar[0]) < 1.5


def classify(spec, compute_time=True):
    """Decision tree over the parameter plane and the root structure of Q."""
    lam, kap = spec.lam, spec.kappa
    kw = {"compute_time": compute_time}
    if lam == 0.0:
        return _verdict(Regime.LAMBDA_ZERO, TAG_LAMBDA0, spec, None, RhoFate.BOUNDED,
                        t_limit=INFINITE, note="lambda = 0: solutions are global in time")
    try:
        report = root_report(spec)
    except HSError as exc:
        return _verdict(Regime.UNCLASSIFIED, "", spec, None, RhoFate.BOUNDED,
                        note=f"hypothesis gap: {exc}")
    if lam * kap > 0 and is_homogeneous(spec):
        return _verdict(Regime.TRIVIAL, "", spec, report, RhoFate.BOUNDED, t_limit=INFINITE,
                        note="spatially constant data is a fixed point: u_x = 0, rho = rho0; "
                             "Q vanishes on all of [0, 1] at eta* but t(eta) diverges there")
    if kap == 0.0:
        if c_identically_zero(spec):
            return _verdict(Regime.TRIVIAL, TAG_KAPPA0_TRIVIAL, spec, report, RhoFate.BOUNDED,
                            t_limit=INFINITE, note="u0' vanishes: (u_x, rho) = (0, rho0) for all time")
        return _verdict(Regime.GIPJ, TAG_KAPPA0, spec, report, RhoFate.BOUNDED, **kw)
    if c_identically_zero(spec):
        if lam * kap > 0:
            return _verdict(Regime.GIPJ, TAG_C_ZERO, spec, report, RhoFate.BOUNDED, **kw)
        return _verdict(Regime.TRIVIAL, TAG_C_ZERO, spec, report, RhoFate.BOUNDED,
                        t_limit=INFINITE, note="C = 0 with lambda kappa < 0 forces zero data")

    if lam * kap < 0:
        if report.eta_star is None:
            try:
                steady = steady_constants(spec)
                note = ""
            except HypothesisViolated as exc:
                steady, note = None, f"steady constants unavailable: {exc}"
            return _verdict(Regime.STEADY, TAG_STEADY, spec, report, RhoFate.CONVERGES,
                            steady=steady, note=note, **kw)
        if -2.0 < lam < 0.0:
            regime, item = Regime.ONE_SIDED, 1
        elif lam <= -2.0:
            regime, item = Regime.TWO_SIDED, 2
        elif lam > 1.0:
            regime, item = Regime.INVERTED, 3
        elif lam < 1.0:
            regime, item = Regime.GLOBAL_DECAY, 4
        else:
            regime, item = Regime.GLOBAL_STEADY, 4
        note = ""
        if item == 4 and _simple_density_zero(spec, report):
            # Q ~ (eta*-eta)^2 + c (alpha-alpha1)^2 near the leading label, so
            # pbar0 ~ gap^(1 - 1/lam) and the time integral converges for lam > 1/2
            if lam > 0.5:
                regime = Regime.INVERTED
            elif lam == 0.5:
                regime = Regime.GLOBAL_STEADY
            else:
                regime = Regime.GLOBAL_DECAY
            note = ("rho0 has a simple zero at the leading label; the global-existence "
                    "conclusion needs a zero of order >= 2 and holds here only for lambda <= 1/2")
        return _verdict(regime, TAG_DOUBLE_NEG.format(item), spec, report, RhoFate.BOUNDED,
                        note=note, **kw)

    if report.eta_star is None:
        return _verdict(Regime.UNCLASSIFIED, "", spec, report, RhoFate.BOUNDED,
                        note="hypothesis gap: Q has no positive root but lambda kappa > 0")

    if report.multiplicity == "Single":
        rho_bar = float(spec.data.rho(np.array(report.alpha_bar[:1]))[0])
        fate = RhoFate.PLUS if rho_bar > 0 else RhoFate.MINUS
        if lam < 0:
            regime = Regime.ONE_SIDED if lam > -1.0 else Regime.TWO_SIDED
            return _verdict(regime, TAG_SINGLE_NEG, spec, report, fate, RhoFate.BOUNDED, **kw)
        elsewhere = RhoFate.VANISHES if lam <= 1.0 else RhoFate.CONVERGES
        return _verdict(Regime.INVERTED, TAG_SINGLE_POS, spec, report, fate, elsewhere, **kw)

    if lam < 0:
        regime = Regime.ONE_SIDED if lam > -2.0 else Regime.TWO_SIDED
        return _verdict(regime, TAG_COR_NEG, spec, report, RhoFate.BOUNDED, RhoFate.BOUNDED, **kw)
    if lam < 1.0:
        regime = Regime.GLOBAL_DECAY
    elif lam == 1.0:
        regime = Regime.GLOBAL_STEADY
    else:
        regime = Regime.INVERTED
    elsewhere = RhoFate.CONVERGES if lam > 2.0 else RhoFate.VANISHES
    return _verdict(regime, TAG_COR_POS, spec, report, RhoFate.ZERO_AT_POINTS, elsewhere, **kw)


# ------------------------------------------------------------------ rates

def _single_rates(lam):
    logs = []
    if lam < 0:
        pb = 0.0
        if lam < -1.0:
            i2 = -(1.0 + 1.0 / lam) / 2.0
        else:
            i2 = 0.0
            if lam == -1.0:
                logs.append("i2")
        ux = -1.0
    else:
        if lam < 1.0:
            pb, ux = 0.5 - 0.5 / lam, -lam
        else:
            pb, ux = 0.0, -1.0
            if lam == 1.0:
                logs.append("pbar0")
        i2 = -(1.0 + 1.0 / lam) / 2.0
    return pb, i2, ux, logs


def _double_rates(lam):
    logs = []
    if lam < 0:
        pb, ux = 0.0, -1.0
        if lam < -2.0:
            i2 = -0.5 - 1.0 / lam
        else:
            i2 = 0.0
            if lam == -2.0:
                logs.append("i2")
    else:
        i2 = -0.5 - 1.0 / lam
        if lam < 2.0:
            pb, ux = 0.5 - 1.0 / lam, 1.0 - lam
        else:
            pb, ux = 0.0, -1.0
            if lam == 2.0:
                logs.append("pbar0")
    return pb, i2, ux, logs


def _simple_zero_rates(lam):
    # Q ~ gap^2 + c x^2: the pbar0 integral scales as gap^(1 - 1/lam), i2 as gap^(-1/lam)
    logs = []
    if lam < 0:
        return 0.0, 0.0, -1.0, logs
    if lam < 1.0:
        pb, ux = 1.0 - 1.0 / lam, 1.0 - 2.0 * lam
    else:
        pb, ux = 0.0, -1.0
        if lam == 1.0:
            logs.append("pbar0")
    return pb, -1.0 / lam, ux, logs


def predicted_rates(spec, verdict):
    """Exponents of pbar0, i2 and u_x at the blow-up label.

    Powers refer to (eta* - eta) when eta* exists and to eta itself in the
    steady-state regime.  A quantity listed in ``log_quantities`` diverges
    logarithmically; its exponent is reported as 0 and, when it is pbar0, the
    u_x exponent refers to u_x * pbar0^(2 lam).
    """
    lam = spec.lam
    if verdict.regime in (Regime.UNCLASSIFIED, Regime.LAMBDA_ZERO, Regime.TRIVIAL):
        raise HypothesisViolated(f"no rate table for regime {verdict.regime.value}")
    if verdict.eta_star is None:
        return RateTable(-1.0 / lam, -1.0 - 1.0 / lam, 0.0, False, (), "eta")
    if verdict.multiplicity == "Single":
        pb, i2, ux, logs = _single_rates(lam)
    elif verdict.report is not None and _simple_density_zero(spec, verdict.report):
        pb, i2, ux, logs = _simple_zero_rates(lam)
        return RateTable(pb, i2, ux, bool(logs), tuple(logs), "gap", source="simple-density-zero")
    else:
        pb, i2, ux, logs = _double_rates(lam)
    return RateTable(pb, i2, ux, bool(logs), tuple(logs), "gap")


def _slope(x, y):
    A = np.vstack([x, np.ones_like(x)]).T
    coef, *_ = np.linalg.lstsq(A, y, rcond=None)
    res = y - A @ coef
    return float(coef[0]), float(np.sqrt(np.mean(res * res)))


def _is_log(vals):
    """|v_k| grows by a constant step per halving of the gap."""
    v = np.abs(vals)
    d = np.diff(v)
    if np.any(d <= 0):
        return False
    r = d[1:] / d[:-1]
    tail = r[-4:]
    return bool(np.all(np.abs(tail - 1.0) < 0.1) and v[-1] > 2.0 * abs(d[-1]))


def _is_convergent(vals):
    """Increments shrink geometrically: the sequence has a finite limit."""
    d = np.abs(np.diff(vals))
    if np.any(d == 0):
        return True
    r = d[1:] / d[:-1]
    return bool(np.all(r < 0.95))


def fit_rates(spec, report=None, verdict=None, k_min=4, k_max=20, window=(12, 20),
              raise_unstable=True):
    """Measure the exponents on the sequence eta_k = eta*(1 - 2^-k)."""
    report = report or root_report(spec)
    lam = spec.lam
    if report.eta_star is None:
        etas = np.geomspace(1e2, 1e4, 9)
        pb, iv, _ = moments(spec, report, etas)
        probe = np.linspace(0.0, 1.0, 33)
        ux_far = _ux_at(spec, probe, etas[-1], pb[-1], iv[-1])
        a0 = probe[int(np.argmax(np.abs(ux_far)))]
        ux = np.array([_ux_at(spec, np.array([a0]), e, p, i)[0] for e, p, i in zip(etas, pb, iv)])
        x = np.log(etas)
        s_pb, r_pb = _slope(x, np.log(np.abs(pb)))
        s_i2, r_i2 = _slope(x, np.log(np.abs(iv)))
        if np.max(np.abs(ux_far)) <= 1e-9 * np.max(np.abs(iv * etas / pb)):
            # u_x vanishes identically (homogeneous data): bounded, exponent 0
            s_ux, r_ux = 0.0, 0.0
        else:
            s_ux, r_ux = _slope(x, np.log(np.abs(ux)))
        table = RateTable(s_pb, s_i2, s_ux, False, (), "eta",
                          {"pbar0": r_pb, "i2": r_i2, "ux": r_ux})
        return _finish(table, raise_unstable)

    es = report.eta_star
    ks = np.arange(k_min, k_max + 1)
    gaps = es * 0.5 ** ks
    etas = es - gaps
    pb, iv, _ = moments(spec, report, etas)
    abar = np.array(report.alpha_bar[:1])
    ux = np.array([_ux_at(spec, abar, e, p, i)[0] for e, p, i in zip(etas, pb, iv)])
    sel = (ks >= window[0]) & (ks <= window[1])
    x = np.log(gaps[sel])
    logs = []
    exps = {}
    res = {}
    for name, v in (("pbar0", pb), ("i2", iv)):
        if np.max(np.abs(v[sel])) <= 1e-12 * np.max(np.abs(pb[sel])):
            # vanishes identically up to roundoff: bounded
            exps[name], res[name] = 0.0, 0.0
            continue
        s, r = _slope(x, np.log(np.abs(v[sel])))
        if abs(s) < 0.25 and _is_log(v[sel]):
            logs.append(name)
            s = 0.0
        elif abs(s) < 0.25 and _is_convergent(v[sel]):
            s = 0.0
        exps[name], res[name] = s, r
    # a factor converging to a finite nonzero limit does not change the
    # exponent, and dividing it out removes its slow drift
    uxv = ux * pb ** (2.0 * lam) if exps["pbar0"] == 0.0 else ux
    exps["ux"], res["ux"] = _slope(x, np.log(np.abs(uxv[sel])))
    table = RateTable(exps["pbar0"], exps["i2"], exps["ux"], bool(logs), tuple(logs), "gap", res)
    return _finish(table, raise_unstable)


def _finish(table, raise_unstable):
    worst = max(table.residuals.values())
    if raise_unstable and worst > 0.05:
        raise FitUnstable(f"log-log fit residual {worst:.3f} exceeds 0.05", table)
    return table


def _ux_at(spec, alpha, eta, pb, iv):
    Q, num = q_parts(spec, alpha, eta)
    return pb ** (-2.0 * spec.lam) / spec.lam * (num / Q - iv / pb)


def compare_rates(measured, predicted, tol=0.05):
    """Per-quantity agreement report between two rate tables."""
    out = {}
    for name in ("pbar0_exp", "i2_exp", "ux_at_abar_exp"):
        m, p = getattr(measured, name), getattr(predicted, name)
        out[name] = (m, p, m is not None and p is not None and abs(m - p) <= tol)
    out["log_flag"] = (measured.log_quantities, predicted.log_quantities,
                       set(measured.log_quantities) == set(predicted.log_quantities))
    return out
