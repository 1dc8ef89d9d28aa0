"""Spectral solver for the Dirichlet problem of a product of mixed-type operators

    prod_j (a_j^2 d_xx + sgn(y) d_yy) u = 0   on (0, 1) x (-1, 1),

with small-denominator diagnostics for the per-mode linear systems.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CapExceeded,
    CoefficientError,
    DegenerateModeError,
    DegenerateUnsolvable,
    LBMixError,
    NotDegenerate,
    QuadratureError,
)
from .model import (  # noqa: E402
    BoundaryData,
    Coefficients,
    ProblemSpec,
    Regime,
    Tolerances,
    make_coefficients,
)
from .series import SeriesSolution, evaluate, evaluate_derivative, evaluate_grid, solve_dirichlet  # noqa: E402

__all__ = [
    "__version__",
    "BoundaryData",
    "CapExceeded",
    "CoefficientError",
    "Coefficients",
    "DegenerateModeError",
    "DegenerateUnsolvable",
    "LBMixError",
    "NotDegenerate",
    "ProblemSpec",
    "QuadratureError",
    "Regime",
    "SeriesSolution",
    "Tolerances",
    "evaluate",
    "evaluate_derivative",
    "evaluate_grid",
    "make_coefficients",
    "solve_dirichlet",
]
