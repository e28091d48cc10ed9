"""Reference problems used throughout the tests, demos and the CLI."""
from .model import BC, ProblemSpec, ToleranceSet, make_builtin


def worked_example(k, tol=None):
    """The four worked examples (1-4) of the representation formulas."""
    tol = tol or ToleranceSet()
    if k == 1:
        return ProblemSpec(-0.5, -1.0, make_builtin("cos2pi", [0.5]), tol)
    if k == 2:
        return ProblemSpec(-1.0, 1.0, make_builtin("sin2pi", [1.0]), tol)
    if k == 3:
        return ProblemSpec(1.0, 1.0, make_builtin("cos2pi", [1.0]), tol)
    if k == 4:
        return ProblemSpec(-0.5, 1.0, make_builtin("affine", [1.0], BC.DIRICHLET), tol)
    raise ValueError(f"example id must be 1-4, got {k}")


def swapped_example4(tol=None):
    return ProblemSpec(0.5, -1.0, make_builtin("affine", [1.0], BC.DIRICHLET), tol or ToleranceSet())


def taxonomy_example(k, tol=None):
    """Root-structure examples: constant density 1 (k=1) or 1/2 (k=2), lambda=kappa=1."""
    rho = {1: 1.0, 2: 0.5}[k]
    return ProblemSpec(1.0, 1.0, make_builtin("cos2pi", [rho]), tol or ToleranceSet())


def piecewise_example(tol=None):
    return ProblemSpec(1.0, 1.0, make_builtin("piecewise_c2"), tol or ToleranceSet())
