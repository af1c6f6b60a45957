"""Time steppers for scalar Caputo fractional ODEs D^alpha y = f(t, y).

Both schemes integrate the equivalent Volterra form

    y(t) = y(0) + 1/Gamma(alpha) * int_0^t (t-s)^(alpha-1) f(s, y(s)) ds,

splitting the integral at t_{n-1}.  The local part (over [t_{n-1}, t_n]) is
quadrature with the exact power-law kernel; only the history part (over
[0, t_{n-1}], where t_n - s >= h_n >= delta) sees the exponential-sum
surrogate, which is what makes every step O(L) instead of O(n):

* constant-interpolation scheme (solve_ci, first order): local term
  h_n^alpha/Gamma(alpha+1) * f_n; history = sum_l Phi_l^n with the one-step
  recursion Phi_l^n = K_{l,n} f_{n-1} + e^{b_l h_n} Phi_l^{n-1} and the
  cancellation-safe transition weight implemented in transition_weight.

* auxiliary-ODE schemes (solve_ode_aux, up to order 1+alpha): local term
  h_n^alpha/Gamma(alpha+2) * (alpha f_{n-1} + f_n); per-exponent history
  states mu_l(t_n) satisfy mu' = b mu + e^{bh} f(t-h, y(t-h)) and are
  advanced by backward Euler (L-stable) or the trapezoidal rule (A-stable)
  — see aux_ode_step.  Explicit updates would be useless here: the fastest
  surrogate modes make the auxiliary ODEs arbitrarily stiff.

Each step closes with a scalar implicit solve (Newton by default, plain
fixed-point iteration as a derivative-free alternative).  Note the first
trapezoidal history update happens at n=2 and consumes f_1 and f_0, both
available by then, so no special startup step is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .errors import GridSpacingError, ImplicitDivergence
from .expsum import ExpSum
from .specfun import gamma, reflection_coefficient

__all__ = [
    "FodeProblem", "TimeGrid", "HistoryState", "SolverOptions", "Solution",
    "expm1_ratio", "transition_weight", "transition_weight_quadrature",
    "history_advance_ci", "aux_ode_step", "solve_ci", "solve_ode_aux",
]

_SCHEMES = ("ci", "ode_be", "ode_tr")
_ZERO_DERIV_TOL = 1e-14


@dataclass
class FodeProblem:
    """D^alpha y = rhs(t, y), y(0) = y0, on [0, T].

    rhs_dy is d(rhs)/dy; without it only fixed-point stepping is available.
    """

    rhs: Callable[[float, float], float]
    y0: float
    alpha: float
    T: float
    rhs_dy: Optional[Callable[[float, float], float]] = None

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha < 1.0:
            raise ValueError(f"alpha must be in (0, 1), got {self.alpha!r}")
        if not self.T > 0.0:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class TimeGrid:
    """Strictly increasing solution times t_0 = 0 < t_1 < ... < t_N."""

    t: np.ndarray

    def __post_init__(self) -> None:
        t = np.array(self.t, dtype=float, copy=True)
        t.flags.writeable = False
        object.__setattr__(self, "t", t)
        if t.ndim != 1 or len(t) < 2:
            raise ValueError("grid needs t_0 and at least one step")
        if t[0] != 0.0:
            raise ValueError(f"grid must start at t_0 = 0, got {t[0]!r}")
        if np.any(np.diff(t) <= 0.0):
            raise ValueError("grid times must be strictly increasing")

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.t)

    @property
    def N(self) -> int:
        return len(self.t) - 1

    @classmethod
    def uniform(cls, T: float, n_steps: int) -> "TimeGrid":
        return cls(np.linspace(0.0, T, n_steps + 1))

    @classmethod
    def from_steps(cls, steps) -> "TimeGrid":
        return cls(np.concatenate(([0.0], np.cumsum(np.asarray(steps, dtype=float)))))


@dataclass
class HistoryState:
    """Per-exponent compressed history (Phi for CI, mu for the ODE schemes)."""

    values: np.ndarray

    @classmethod
    def zeros(cls, n_terms: int) -> "HistoryState":
        return cls(np.zeros(n_terms))


@dataclass
class SolverOptions:
    scheme: str = "ode_tr"
    implicit: str = "newton"
    tol: float = 1e-10
    max_iter: int = 50
    quadrature_transition: bool = False

    def __post_init__(self) -> None:
        if self.scheme not in _SCHEMES:
            raise ValueError(f"scheme must be one of {_SCHEMES}, got {self.scheme!r}")
        if self.implicit not in ("newton", "fixed_point"):
            raise ValueError(f"implicit must be 'newton' or 'fixed_point', got {self.implicit!r}")
        if not self.tol > 0.0 or self.max_iter < 1:
            raise ValueError("need tol > 0 and max_iter >= 1")


@dataclass
class Solution:
    grid: TimeGrid
    y: np.ndarray
    iterations: np.ndarray


def expm1_ratio(x):
    """(e^x - 1)/x, continuously extended to 1 at x = 0; scalar or array."""
    if np.isscalar(x):
        return math.expm1(x) / x if x != 0.0 else 1.0
    x = np.asarray(x, dtype=float)
    out = np.ones_like(x)
    nz = x != 0.0
    out[nz] = np.expm1(x[nz]) / x[nz]
    return out


def transition_weight(w, b, t_n: float, t_n1: float, t_n2: float, c_alpha: float):
    """Coupling weight of f_{n-1} into the CI history recursion.

    Equals c_alpha * w * (e^{b (t_n - t_n2)} - e^{b (t_n - t_n1)}) / b, but is
    computed as c_alpha * w * h_prev * e^{b (t_n - t_n1)} * expm1_ratio(b h_prev)
    with h_prev = t_n1 - t_n2, which survives b -> 0- (rescaled wide-window
    sums have |b| down to ~1e-110) without subtractive cancellation.
    """
    h_prev = t_n1 - t_n2
    return c_alpha * w * h_prev * np.exp(b * (t_n - t_n1)) * expm1_ratio(b * h_prev)


def transition_weight_quadrature(w, b, t_n: float, t_n1: float, t_n2: float, c_alpha: float):
    """3-point Gauss-Legendre version of transition_weight (ablation aid)."""
    mid = 0.5 * (t_n1 + t_n2)
    half = 0.5 * (t_n1 - t_n2)
    x = math.sqrt(0.6)
    acc = 0.0
    for xi, gw in ((-x, 5.0 / 9.0), (0.0, 8.0 / 9.0), (x, 5.0 / 9.0)):
        acc = acc + gw * np.exp(b * (t_n - (mid + half * xi)))
    return c_alpha * w * half * acc


def history_advance_ci(state: HistoryState, es: ExpSum, f_prev: float,
                       t_n: float, t_n1: float, t_n2: float,
                       c_alpha: float, quadrature: bool = False) -> HistoryState:
    """One recursion step Phi_l <- K_l f_{n-1} + e^{b_l h_n} Phi_l, vectorized."""
    tw = transition_weight_quadrature if quadrature else transition_weight
    kvec = tw(es.weights, es.exponents, t_n, t_n1, t_n2, c_alpha)
    return HistoryState(kvec * f_prev + np.exp(es.exponents * (t_n - t_n1)) * state.values)


def aux_ode_step(mu_prev, b, h_n: float, h_n1: float, f_n1: float, f_n2: float, scheme: str):
    """Advance the auxiliary history ODE mu' = b mu + e^{bh} f(t-h, y(t-h)).

    scheme='ode_be' (backward Euler, L-stable):
        mu_n = (mu_{n-1} + h_n e^{b h_n} f_{n-1}) / (1 - h_n b)
    scheme='ode_tr' (trapezoidal, A-stable):
        mu_n = (mu_{n-1} (1 + h_n b/2)
                + h_n/2 (e^{b h_n} f_{n-1} + e^{b h_{n-1}} f_{n-2})) / (1 - h_n b/2)

    Works elementwise on arrays of exponents b.
    """
    if scheme == "ode_be":
        return (mu_prev + h_n * np.exp(b * h_n) * f_n1) / (1.0 - h_n * b)
    if scheme == "ode_tr":
        num = mu_prev * (1.0 + 0.5 * h_n * b) + 0.5 * h_n * (
            np.exp(b * h_n) * f_n1 + np.exp(b * h_n1) * f_n2
        )
        return num / (1.0 - 0.5 * h_n * b)
    raise ValueError(f"aux_ode_step got scheme {scheme!r}")


def _implicit_solve(const: float, coeff: float, t_n: float, y_start: float,
                    problem: FodeProblem, options: SolverOptions, step: int):
    """Solve y = const + coeff * f(t_n, y); returns (y, iterations used)."""
    y = y_start
    if options.implicit == "newton":
        for it in range(1, options.max_iter + 1):
            fval = problem.rhs(t_n, y)
            gp = 1.0 - coeff * problem.rhs_dy(t_n, y)
            if abs(gp) < _ZERO_DERIV_TOL:
                y_new = const + coeff * fval  # derivative vanished: one fixed-point step
            else:
                y_new = y - (y - const - coeff * fval) / gp
            if abs(y_new - y) < options.tol:
                return y_new, it
            y = y_new
    else:
        for it in range(1, options.max_iter + 1):
            y_new = const + coeff * problem.rhs(t_n, y)
            if abs(y_new - y) < options.tol:
                return y_new, it
            y = y_new
    raise ImplicitDivergence(step)


def _check_grid(problem: FodeProblem, grid: TimeGrid, es: ExpSum, options: SolverOptions) -> None:
    if not math.isclose(problem.alpha, es.alpha, rel_tol=1e-12, abs_tol=0.0):
        raise ValueError(f"problem alpha {problem.alpha} != kernel alpha {es.alpha}")
    h_min = float(np.min(grid.h))
    if h_min < es.delta:
        raise GridSpacingError(
            f"smallest step {h_min:g} undercuts the kernel validity lower end "
            f"delta={es.delta:g}; rebuild the kernel with smaller delta"
        )
    if options.implicit == "newton" and problem.rhs_dy is None:
        raise ValueError("newton stepping needs rhs_dy; use implicit='fixed_point'")


def solve_ci(problem: FodeProblem, grid: TimeGrid, es: ExpSum,
             options: SolverOptions | None = None) -> Solution:
    """First-order constant-interpolation scheme, O(L) work per step."""
    options = options or SolverOptions(scheme="ci")
    _check_grid(problem, grid, es, options)
    t = grid.t
    n_steps = grid.N
    c_a = reflection_coefficient(problem.alpha)
    inv_gamma1 = 1.0 / gamma(problem.alpha + 1.0)
    w, b = es.weights, es.exponents

    y = np.empty(n_steps + 1)
    iters = np.zeros(n_steps + 1, dtype=int)
    y[0] = problem.y0
    f_prev = 0.0  # f_{n-1}; set after each accepted step
    phi = np.zeros(es.L)
    cache_key = None
    decay = kvec = None

    for n in range(1, n_steps + 1):
        h_n = t[n] - t[n - 1]
        if n >= 2:
            h_prev = t[n - 1] - t[n - 2]
            if (h_n, h_prev) != cache_key:  # uniform grids hit this once
                decay = np.exp(b * h_n)
                if options.quadrature_transition:
                    kvec = transition_weight_quadrature(w, b, t[n], t[n - 1], t[n - 2], c_a)
                else:
                    kvec = c_a * w * h_prev * decay * expm1_ratio(b * h_prev)
                cache_key = (h_n, h_prev)
            phi = kvec * f_prev + decay * phi
        const = problem.y0 + float(np.sum(phi))
        coeff = h_n**problem.alpha * inv_gamma1
        y[n], iters[n] = _implicit_solve(const, coeff, t[n], y[n - 1], problem, options, n)
        f_prev = problem.rhs(t[n], y[n])
    return Solution(grid, y, iters)


def solve_ode_aux(problem: FodeProblem, grid: TimeGrid, es: ExpSum,
                  options: SolverOptions | None = None) -> Solution:
    """Auxiliary-ODE scheme (backward Euler or trapezoidal history update).

    The mu states start at mu(t_1) = 0 by definition, so the first update is
    at n=2; the trapezoidal variant then consumes f_1 and f_0, which are both
    known — no synthetic f_{-1} ever enters.
    """
    options = options or SolverOptions(scheme="ode_tr")
    if options.scheme not in ("ode_be", "ode_tr"):
        raise ValueError(f"solve_ode_aux needs scheme 'ode_be' or 'ode_tr', got {options.scheme!r}")
    _check_grid(problem, grid, es, options)
    t = grid.t
    n_steps = grid.N
    c_a = reflection_coefficient(problem.alpha)
    inv_gamma2 = 1.0 / gamma(problem.alpha + 2.0)
    w, b = es.weights, es.exponents

    y = np.empty(n_steps + 1)
    iters = np.zeros(n_steps + 1, dtype=int)
    y[0] = problem.y0
    f_nm1 = problem.rhs(0.0, problem.y0)  # f_0
    f_nm2 = f_nm1
    mu = np.zeros(es.L)
    cache_key = None
    step_parts = None

    for n in range(1, n_steps + 1):
        h_n = t[n] - t[n - 1]
        if n >= 2:
            h_prev = t[n - 1] - t[n - 2]
            if (h_n, h_prev) != cache_key:
                if options.scheme == "ode_be":
                    step_parts = (h_n * np.exp(b * h_n), 1.0 / (1.0 - h_n * b))
                else:
                    step_parts = (
                        (1.0 + 0.5 * h_n * b),
                        0.5 * h_n * np.exp(b * h_n),
                        0.5 * h_n * np.exp(b * h_prev),
                        1.0 / (1.0 - 0.5 * h_n * b),
                    )
                cache_key = (h_n, h_prev)
            if options.scheme == "ode_be":
                mu = (mu + step_parts[0] * f_nm1) * step_parts[1]
            else:
                mu = (step_parts[0] * mu + step_parts[1] * f_nm1 + step_parts[2] * f_nm2) * step_parts[3]
        hist = c_a * float(np.dot(w, mu))
        amount = h_n**problem.alpha * inv_gamma2
        const = problem.y0 + amount * problem.alpha * f_nm1 + hist
        y[n], iters[n] = _implicit_solve(const, amount, t[n], y[n - 1], problem, options, n)
        f_nm2 = f_nm1
        f_nm1 = problem.rhs(t[n], y[n])
    return Solution(grid, y, iters)
