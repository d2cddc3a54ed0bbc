"""Exception hierarchy shared across the package.

CLI exit-code convention: input/domain problems map to 2, numeric
failures to 3, simulation budget overruns to 4.
"""

from __future__ import annotations


class LevySmileError(Exception):
    """Base class for all package errors."""


class InvalidMeasureError(LevySmileError):
    """A jump measure violates its admissibility conditions."""

    def __init__(self, violations: list[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


class StripError(LevySmileError):
    """A transform argument lies outside the strip of analyticity."""


class ArbitrageBoundsError(LevySmileError):
    """An option price sits outside its static no-arbitrage interval."""


class QuadratureError(LevySmileError):
    """Contour quadrature failed its convergence or sanity checks."""


class IVConvergenceError(LevySmileError):
    """Implied-volatility root search did not converge in [1e-4, 5]."""


class BudgetError(LevySmileError):
    """A Monte Carlo run would exceed the configured path-step budget."""


class SimulationError(LevySmileError):
    """A Monte Carlo path produced non-finite values."""


class SurfaceFormatError(LevySmileError):
    """A quote surface file is malformed or violates surface invariants."""
