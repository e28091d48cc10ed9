"""Semi-analytic solutions of a two-component Hunter-Saxton type system.

Solutions are reconstructed along characteristics from explicit
representation formulas; the package also classifies the long-time
behaviour (blow-up, decay, steady states) and checks it against a direct
pseudo-spectral integrator.
"""
from .model import BC, InitialData, ProblemSpec, ToleranceSet, make_builtin, validate
from .quadratic import RootReport, root_report
from .quadrature import build_cache, eta_of_time, i2, pbar0, terminal_time, time_of_eta
from .evaluator import eulerian_slice, eval_rho, eval_ux, jacobian, steady_constants, trajectory
from .classifier import Regime, classify, fit_rates, predicted_rates

__version__ = "0.1.0"
