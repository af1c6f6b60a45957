"""Exception taxonomy shared across the package.

Numerical failures (as opposed to bad arguments) derive from FracsumError so
the CLI can map them to a dedicated exit code.  Argument/shape problems use
ValueError subclasses and surface as configuration errors.
"""

from __future__ import annotations


class FracsumError(Exception):
    """Base class for numerical failures raised by this package."""


class NonConvergence(FracsumError):
    """An iterative evaluator exhausted its budget before reaching tolerance."""


class InvalidBounds(FracsumError):
    """Quadrature truncation window is empty (upper bound <= lower bound)."""


class PronyFitError(FracsumError):
    """Base class for a rejected exponential-fit candidate.

    These are signals to the surrounding (K, L_p) search, not hard failures:
    the search responds by shrinking the fitted block or changing K.
    """


class SingularHankel(PronyFitError):
    """Moment Hankel system too ill-conditioned to trust (cond > 1e14)."""


class ComplexRoots(PronyFitError):
    """Characteristic polynomial has roots with non-negligible imaginary part."""


class PositiveRoot(PronyFitError):
    """A recovered exponent is >= 0, i.e. not a decaying mode."""


class SearchExhausted(FracsumError):
    """The (K, L_p) reduction search ran out of candidates.

    search_reduction itself degrades gracefully (returns the unreduced sum
    with accepted=False); this is raised where a reduction was the whole
    point, e.g. the `prony` CLI command.
    """


class ImplicitDivergence(FracsumError):
    """Implicit step iteration failed to converge within max_iter."""

    def __init__(self, step: int, message: str = ""):
        self.step = step
        super().__init__(message or f"implicit iteration diverged at step n={step}")


class GridSpacingError(FracsumError):
    """A time grid step is smaller than the kernel's validity lower end."""


class ArityError(ValueError):
    """Requested fit order is incompatible with the number of input terms."""


class ShapeError(ValueError):
    """Tabulated input does not have the required structure (e.g. h not halving)."""
