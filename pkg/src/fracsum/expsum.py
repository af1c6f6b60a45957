"""Trapezoidal sum-of-exponentials approximation of t^(alpha-1) on [delta, T].

The weakly singular kernel has the Laplace-type representation

    t^(alpha-1) = 1/Gamma(1-alpha) * int_0^inf exp(-p t) p^(-alpha) dp,

and the substitution p = e^w turns the integrand into
g(w) = exp((1-alpha) w) * exp(-t e^w), which decays double-exponentially to
the right and exponentially to the left.  Truncating to [l_min, l_max] and
applying the L-point trapezoidal rule yields

    t^(alpha-1) ~= 1/Gamma(1-alpha) * sum_l w_l exp(b_l t),

with nodes w_l on a uniform lattice, weights h*exp((1-alpha) w_l) (halved at
both ends) and exponents b_l = -exp(w_l) < 0.  The 1/Gamma(1-alpha)
prefactor is applied at evaluation time and never folded into the stored
weights, so weights stay directly comparable across alpha.

Truncation bounds (absolute tail error <= epsilon on t in [delta, T]):

    l_min = min( ln(epsilon/T), ln(epsilon*(1-alpha)) / (1-alpha) )
    l_max = ln( ln(1/epsilon) / delta )
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import InvalidBounds
from .specfun import gamma

__all__ = [
    "KernelSpec", "TruncationBounds", "ExpSum", "EvalGrid", "ErrorReport",
    "truncation_bounds", "build_trapezoidal_expsum", "eval_expsum",
    "eval_expsum_checked", "geometric_grid", "uniform_grid", "kernel_error",
    "rescale",
]


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class KernelSpec:
    """Parameters of one kernel-approximation problem.

    alpha in (0,1): kernel exponent; [delta, T]: validity window (0 < delta < T);
    L >= 2: number of quadrature nodes; epsilon in (0,1): target absolute
    accuracy of the truncated integral.
    """

    alpha: float
    delta: float
    T: float
    L: int
    epsilon: float

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if not 0.0 < self.delta < self.T:
            raise ValueError(f"need 0 < delta < T, got delta={self.delta!r}, T={self.T!r}")
        if not (isinstance(self.L, (int, np.integer)) and self.L >= 2):
            raise ValueError(f"L must be an integer >= 2, got {self.L!r}")
        if not 0.0 < self.epsilon < 1.0:
            raise ValueError(f"epsilon must be in (0, 1), got {self.epsilon!r}")


@dataclass(frozen=True)
class TruncationBounds:
    """Integration window [l_min, l_max] and lattice spacing h_quad."""

    l_min: float
    l_max: float
    h_quad: float


def truncation_bounds(spec: KernelSpec) -> TruncationBounds:
    """Truncation window for the log-substituted integrand.

    Raises InvalidBounds when the window is empty (l_max <= l_min), which
    happens for very large delta / undemanding epsilon combinations.
    """
    alpha, eps = spec.alpha, spec.epsilon
    l_min = min(math.log(eps / spec.T), math.log(eps * (1.0 - alpha)) / (1.0 - alpha))
    l_max = math.log(math.log(1.0 / eps) / spec.delta)
    if not l_max > l_min:
        raise InvalidBounds(
            f"empty quadrature window: l_min={l_min:.6g}, l_max={l_max:.6g} "
            f"(delta={spec.delta:g} too large for epsilon={spec.epsilon:g}?)"
        )
    return TruncationBounds(l_min, l_max, (l_max - l_min) / (spec.L - 1))


@dataclass(frozen=True)
class ExpSum:
    """A sum-of-exponentials surrogate for t^(alpha-1) on [delta, T].

    eval_expsum applies the 1/Gamma(1-alpha) prefactor; `weights` are the raw
    quadrature (or Prony) weights.  `nodes` is the uniform lattice of the
    trapezoidal construction; reduced sums produced by the Prony search carry
    nodes=None since their exponents no longer live on a lattice.
    """

    weights: np.ndarray
    exponents: np.ndarray
    nodes: np.ndarray | None
    alpha: float
    delta: float
    T: float

    def __post_init__(self) -> None:
        object.__setattr__(self, "weights", _readonly(self.weights))
        object.__setattr__(self, "exponents", _readonly(self.exponents))
        if self.nodes is not None:
            object.__setattr__(self, "nodes", _readonly(self.nodes))
        if self.weights.ndim != 1 or self.weights.shape != self.exponents.shape:
            raise ValueError("weights and exponents must be 1-d arrays of equal length")
        if not np.all(np.isfinite(self.weights)) or not np.all(np.isfinite(self.exponents)):
            raise ValueError("weights/exponents must be finite")
        if not np.all(self.exponents < 0.0):
            raise ValueError("all exponents must be negative (decaying modes)")
        if self.nodes is not None:
            d = np.diff(self.nodes)
            if len(self.nodes) != len(self.weights) or np.any(d <= 0):
                raise ValueError("nodes must be strictly increasing, one per term")
            if len(d) > 1 and not np.allclose(d, d[0], rtol=1e-8, atol=1e-12):
                raise ValueError("nodes of a trapezoidal sum must be uniformly spaced")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if not 0.0 < self.delta < self.T:
            raise ValueError("need 0 < delta < T")

    @property
    def L(self) -> int:
        return len(self.weights)

    @property
    def prefactor(self) -> float:
        return 1.0 / gamma(1.0 - self.alpha)

    def contains(self, t) -> bool:
        t = np.asarray(t, dtype=float)
        return bool(np.all((t >= self.delta) & (t <= self.T)))


def build_trapezoidal_expsum(spec: KernelSpec) -> ExpSum:
    """Trapezoidal-rule exponential sum for spec (see module docstring)."""
    tb = truncation_bounds(spec)
    nodes = tb.l_min + tb.h_quad * np.arange(spec.L, dtype=float)
    weights = tb.h_quad * np.exp((1.0 - spec.alpha) * nodes)
    weights[0] *= 0.5
    weights[-1] *= 0.5
    exponents = -np.exp(nodes)
    return ExpSum(weights, exponents, nodes, spec.alpha, spec.delta, spec.T)


def eval_expsum(es: ExpSum, t):
    """1/Gamma(1-alpha) * sum_l w_l exp(b_l t), compensated over terms.

    Accepts a scalar or an ndarray of evaluation times; out-of-window times
    are evaluated as-is (use eval_expsum_checked to detect extrapolation).
    All trapezoidal terms are positive, so there is no cancellation; Kahan
    compensation merely keeps the rounding of long sums at the few-ulp level.
    """
    t_arr = np.asarray(t, dtype=float)
    total = np.zeros(t_arr.shape)
    comp = np.zeros(t_arr.shape)
    for w, b in zip(es.weights, es.exponents):
        term = w * np.exp(b * t_arr)
        y = term - comp
        snew = total + y
        comp = (snew - total) - y
        total = snew
    total *= es.prefactor
    if np.isscalar(t) or t_arr.ndim == 0:
        return float(total)
    return total


def eval_expsum_checked(es: ExpSum, t):
    """Like eval_expsum but also reports whether any t lies outside [delta, T]."""
    return eval_expsum(es, t), not es.contains(t)


@dataclass(frozen=True)
class EvalGrid:
    """Strictly increasing evaluation times plus the generator kind."""

    points: np.ndarray
    kind: str

    def __post_init__(self) -> None:
        object.__setattr__(self, "points", _readonly(self.points))
        if self.points.ndim != 1 or len(self.points) < 2:
            raise ValueError("grid needs at least two points")
        if np.any(np.diff(self.points) <= 0):
            raise ValueError("grid points must be strictly increasing")
        if self.kind not in ("uniform", "geometric"):
            raise ValueError(f"unknown grid kind {self.kind!r}")

    @property
    def N(self) -> int:
        return len(self.points)


def geometric_grid(delta: float, T: float, n: int) -> EvalGrid:
    """n geometrically spaced points t_j = delta*(T/delta)^((j-1)/(n-1)).

    Both endpoints are pinned exactly to delta and T (the power-form
    evaluation is then overwritten, so no floating drift at the ends).
    """
    if not 0.0 < delta < T:
        raise ValueError("need 0 < delta < T")
    if n < 2:
        raise ValueError("need at least two grid points")
    pts = delta * (T / delta) ** (np.arange(n, dtype=float) / (n - 1))
    pts[0] = delta
    pts[-1] = T
    return EvalGrid(pts, "geometric")


def uniform_grid(delta: float, T: float, n: int) -> EvalGrid:
    """n equally spaced points from delta to T inclusive."""
    if not delta < T:
        raise ValueError("need delta < T")
    if n < 2:
        raise ValueError("need at least two grid points")
    pts = np.linspace(delta, T, n)
    pts[0] = delta
    pts[-1] = T
    return EvalGrid(pts, "uniform")


@dataclass(frozen=True)
class ErrorReport:
    """Signed pointwise kernel error e(t_j) = t_j^(alpha-1) - eval(t_j)."""

    grid: EvalGrid
    pointwise: np.ndarray
    max_abs: float


def kernel_error(es: ExpSum, grid: EvalGrid) -> ErrorReport:
    """Pointwise and max-abs deviation of the sum from t^(alpha-1) on grid."""
    t = grid.points
    approx = eval_expsum(es, t)
    pointwise = t ** (es.alpha - 1.0) - approx
    return ErrorReport(grid, _readonly(pointwise), float(np.max(np.abs(pointwise))))


def rescale(es: ExpSum, T_new: float) -> ExpSum:
    """Move an exponential sum to a scaled window.

    If es approximates t^(alpha-1) on [delta, T], the returned sum
    approximates it on [delta*s, T_new] with s = T_new/T:

        w -> s^(alpha-1) * w,   b -> b / s.

    Applying it with T_new=1 maps a [delta, T] sum to the normalized window
    [delta/T, 1]; applying it again with T_new=T maps back (round trip exact
    up to rounding).  T_new <= 0 is a domain error.
    """
    if not T_new > 0.0:
        raise ValueError(f"T_new must be positive, got {T_new!r}")
    s = T_new / es.T
    nodes = None if es.nodes is None else es.nodes - math.log(s)
    return ExpSum(
        es.weights * s ** (es.alpha - 1.0),
        es.exponents / s,
        nodes,
        es.alpha,
        es.delta * s,
        T_new,
    )
