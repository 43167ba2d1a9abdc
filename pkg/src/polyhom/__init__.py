"""Polyhomogeneous expansions for singular boundary problems.

Exact log-power series arithmetic, a resonant Euler-type ODE solver, two
independent expansion routes (order-by-order matching and Picard iteration
with majorant diagnostics), numerical validation, and explicit composition
bounds for factorial growth.
"""

from .errors import ConfigError, MathDomainError, PolyhomError, ValidationFailure
from .expansion import match_coefficients, run_iteration
from .problems import ProblemSpec
from .series import LogSeries, series_from_json, series_to_json
from .singular_ode import SingularProblem
from .tangential import TangentialPoly

__all__ = [
    "ConfigError", "LogSeries", "MathDomainError", "PolyhomError", "ProblemSpec", "SingularProblem",
    "TangentialPoly", "ValidationFailure", "match_coefficients", "run_iteration",
    "series_from_json", "series_to_json",
]
__version__ = "0.1.0"
