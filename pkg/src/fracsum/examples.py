"""The three benchmark initial-value problems and their exact references.

Example 1 is a nonlinear equation manufactured so that the exact solution is
the polynomial-like y(t) = t^8 - 3 t^(4+alpha/2) + (9/4) t^alpha on [0, 1];
its right-hand side contains a y^(3/2) term that is only defined for y >= 0,
so the benchmark rhs clamps negative iterates at zero and counts how often
that happens (a healthy run never clamps).

Example 2 is the linear relaxation equation D^alpha y = lambda*y, y(0) = 1
on [0, 10], whose exact solution is the one-parameter Mittag-Leffler function
E_alpha(lambda * t^alpha).

Example 3 is a massless fractional Kelvin-Voigt element under a unit step
load, c * D^alpha y + k * y = 1, y(0) = 0, solved on a geometric mesh that
spans thirteen decades of time (first step 1e-4, growth factor 1.005, 5000
steps); the creep response is y(t) = (1/k) * (1 - E_alpha(-(k/c) t^alpha)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from .fode import FodeProblem, TimeGrid
from .specfun import MLParams, gamma, mittag_leffler

__all__ = [
    "BenchmarkProblem", "PowerLawRhs", "make_example", "kelvin_voigt_grid",
    "KV_FIRST_STEP", "KV_RATIO", "KV_STEPS",
]

KV_FIRST_STEP = 1e-4
KV_RATIO = 1.005
KV_STEPS = 5000


class PowerLawRhs:
    """Right-hand side of example 1 (callable; tracks y < 0 clamps).

    f(t, y) = 40320/Gamma(9-a) t^(8-a) - 3 Gamma(5+a/2)/Gamma(5-a/2) t^(4-a/2)
              + (9/4) Gamma(a+1) + ((3/2) t^(a/2) - t^4)^3 - y^(3/2)

    with y replaced by max(y, 0) inside the 3/2-power; clamp_count records
    how many evaluations actually hit the clamp.
    """

    def __init__(self, alpha: float):
        self.alpha = alpha
        self._c_high = 40320.0 / gamma(9.0 - alpha)
        self._c_mid = 3.0 * gamma(5.0 + alpha / 2.0) / gamma(5.0 - alpha / 2.0)
        self._c_const = 2.25 * gamma(alpha + 1.0)
        self.clamp_count = 0

    def __call__(self, t: float, y: float) -> float:
        if y < 0.0:
            self.clamp_count += 1
            y = 0.0
        a = self.alpha
        cube = 1.5 * t ** (a / 2.0) - t**4
        return (
            self._c_high * t ** (8.0 - a)
            - self._c_mid * t ** (4.0 - a / 2.0)
            + self._c_const
            + cube**3
            - y**1.5
        )

    def d_dy(self, t: float, y: float) -> float:
        if y <= 0.0:
            return 0.0
        return -1.5 * math.sqrt(y)


@dataclass
class BenchmarkProblem:
    """A benchmark equation bundled with its closed-form reference."""

    example_id: int
    problem: FodeProblem
    reference: Callable[[float], float]
    label: str

    @property
    def clamp_count(self) -> int:
        return getattr(self.problem.rhs, "clamp_count", 0)


def kelvin_voigt_grid(
    first_step: float = KV_FIRST_STEP,
    ratio: float = KV_RATIO,
    n_steps: int = KV_STEPS,
) -> TimeGrid:
    """Geometric mesh t_0 = 0, h_1 = first_step, h_j = ratio * h_{j-1}."""
    if not (first_step > 0.0 and ratio > 1.0 and n_steps >= 1):
        raise ValueError("need first_step > 0, ratio > 1, n_steps >= 1")
    steps = [first_step * ratio**j for j in range(n_steps)]
    return TimeGrid.from_steps(steps)


def make_example(
    example_id: int,
    alpha: float,
    *,
    T: float | None = None,
    lam: float = -1.0,
    c: float = 100.0,
    k: float = 10.0,
) -> BenchmarkProblem:
    """Problem + reference for benchmark `example_id` in {1, 2, 3}.

    T defaults to 1 (example 1), 10 (example 2), or the end of the default
    Kelvin-Voigt mesh (example 3).  lam is the relaxation rate of example 2
    (must be <= 0 so the Mittag-Leffler reference applies); c and k are the
    damper and spring constants of example 3.
    """
    if example_id == 1:
        rhs = PowerLawRhs(alpha)

        def exact1(t: float, a: float = alpha) -> float:
            return t**8 - 3.0 * t ** (4.0 + a / 2.0) + 2.25 * t**a

        problem = FodeProblem(rhs=rhs, y0=0.0, alpha=alpha, T=T if T is not None else 1.0,
                              rhs_dy=rhs.d_dy)
        return BenchmarkProblem(1, problem, exact1, "nonlinear-power-law")

    if example_id == 2:
        if lam > 0.0:
            raise ValueError(f"example 2 needs lambda <= 0, got {lam!r}")

        def exact2(t: float, a: float = alpha, lm: float = lam) -> float:
            return mittag_leffler(MLParams(alpha=a, z=lm * t**a))

        problem = FodeProblem(rhs=lambda t, y: lam * y, y0=1.0, alpha=alpha,
                              T=T if T is not None else 10.0,
                              rhs_dy=lambda t, y: lam)
        return BenchmarkProblem(2, problem, exact2, "linear-relaxation")

    if example_id == 3:
        if not (c > 0.0 and k > 0.0):
            raise ValueError(f"example 3 needs c > 0 and k > 0, got c={c!r}, k={k!r}")
        if T is None:
            T = float(kelvin_voigt_grid().t[-1])
        rate = k / c

        def exact3(t: float, a: float = alpha, kk: float = k, r: float = rate) -> float:
            return (1.0 - mittag_leffler(MLParams(alpha=a, z=-r * t**a))) / kk

        problem = FodeProblem(rhs=lambda t, y: (1.0 - k * y) / c, y0=0.0, alpha=alpha,
                              T=T, rhs_dy=lambda t, y: -k / c)
        return BenchmarkProblem(3, problem, exact3, "kelvin-voigt-creep")

    raise ValueError(f"example_id must be 1, 2 or 3, got {example_id!r}")
