"""Special functions needed by the kernel compression and the FODE solvers.

Three entry points:

* ``gamma(x)`` — Euler gamma for x > 0, Lanczos approximation with fixed
  in-source coefficients (relative error well below 1e-14 on [1e-3, 10]).
* ``reflection_coefficient(alpha)`` — sin(pi*alpha)/pi, the constant
  1/(Gamma(alpha)*Gamma(1-alpha)) that multiplies every compressed history
  term.
* ``mittag_leffler(MLParams)`` — one-parameter Mittag-Leffler function
  E_alpha(z) on the closed negative half line, used as the reference
  solution of the linear benchmark problems.

E_alpha(-s) is evaluated by three methods glued along alpha-dependent
seams:

1. Taylor series for s <= 1 (mild cancellation, compensated summation).
2. For 1 < s < 34**alpha, trapezoidal quadrature of the exact spectral
   (Titchmarsh) representation

       E_alpha(-s) = int_0^inf  K_alpha(r) exp(-r s) dr,
       K_alpha(r)  = sin(alpha*pi)/pi * r^(alpha-1)
                     / (r^(2 alpha) + 2 r^alpha cos(alpha*pi) + 1),

   after the substitution r = e^u.  The integrand decays like e^(-alpha|u|)
   to the left and super-exponentially to the right, and is analytic in a
   strip of width min(pi*(1-alpha)/alpha, pi/2), so the trapezoidal rule
   converges geometrically in the step size.
3. For s >= 34**alpha, the divergent algebraic asymptotic series

       E_alpha(-s) ~ sum_{k>=1} (-1)^(k+1) s^(-k) / Gamma(1 - alpha k),

   truncated at its smallest term.  The cutoff 34**alpha keeps the
   optimal-truncation remainder ~e^-34, far below the accuracy contract;
   a fixed cutoff would fail for alpha near 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonConvergence

__all__ = ["gamma", "reflection_coefficient", "MLParams", "mittag_leffler"]


# Lanczos coefficients, g = 7, n = 9 (classic double-precision set).
_LANCZOS_G = 7.0
_LANCZOS_C = (
    0.99999999999980993,
    676.5203681218851,
    -1259.1392167224028,
    771.32342877765313,
    -176.61502916214059,
    12.507343278686905,
    -0.13857109526572012,
    9.9843695780195716e-6,
    1.5056327351493116e-7,
)

_SQRT_TWO_PI = math.sqrt(2.0 * math.pi)


def gamma(x: float) -> float:
    """Euler gamma function for real x > 0.

    Raises ValueError for x <= 0 (poles and the reflection region are not
    needed by any caller; negative arguments are reached only through the
    entire function 1/Gamma, see _recip_gamma).
    """
    x = float(x)
    if not x > 0.0:
        raise ValueError(f"gamma requires x > 0, got {x!r}")
    if x > 171.6:
        # would overflow double precision anyway; keep the failure explicit
        raise OverflowError(f"gamma({x}) overflows double precision")
    return _gamma_unchecked(x)


def _gamma_unchecked(x: float) -> float:
    if x < 0.5:
        # reflection onto [0.5, inf) where the Lanczos sum is accurate
        return math.pi / (math.sin(math.pi * x) * _gamma_unchecked(1.0 - x))
    z = x - 1.0
    acc = _LANCZOS_C[0]
    for i, c in enumerate(_LANCZOS_C[1:], start=1):
        acc += c / (z + i)
    t = z + _LANCZOS_G + 0.5
    if z < 100.0:
        return _SQRT_TWO_PI * t ** (z + 0.5) * math.exp(-t) * acc
    # t**(z+0.5) alone overflows long before Gamma(x) does; combine the
    # factors in log space so the full double range (x <= 171.6) is usable
    return _SQRT_TWO_PI * math.exp((z + 0.5) * math.log(t) - t) * acc


def _recip_gamma(x: float) -> float:
    """1/Gamma(x) for any real x (entire; zero at the poles of Gamma)."""
    if x > 0.0:
        return 1.0 / _gamma_unchecked(x)
    # 1/Gamma(x) = sin(pi x) * Gamma(1-x) / pi, and 1-x >= 1 here
    return math.sin(math.pi * x) * _gamma_unchecked(1.0 - x) / math.pi


def reflection_coefficient(alpha: float) -> float:
    """sin(pi*alpha)/pi == 1/(Gamma(alpha)*Gamma(1-alpha)) for alpha in (0,1)."""
    alpha = float(alpha)
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"reflection_coefficient requires 0 < alpha < 1, got {alpha!r}")
    return math.sin(math.pi * alpha) / math.pi


@dataclass(frozen=True)
class MLParams:
    """Evaluation request for E_alpha(z).

    alpha in (0, 1]; z <= 0 (the only range the solvers' reference solutions
    need); target_abs_tol > 0 is the requested absolute accuracy.  The
    evaluator never returns worse than ~1e-10 absolute regardless of the
    requested tolerance.
    """

    alpha: float
    z: float
    target_abs_tol: float = 1e-12

    def __post_init__(self) -> None:
        if not 0.0 < self.alpha <= 1.0:
            raise ValueError(f"MLParams.alpha must be in (0, 1], got {self.alpha!r}")
        if not self.z <= 0.0:
            raise ValueError(f"MLParams.z must be <= 0, got {self.z!r}")
        if not self.target_abs_tol > 0.0:
            raise ValueError("MLParams.target_abs_tol must be positive")


def mittag_leffler(params: MLParams) -> float:
    """E_alpha(z) for z <= 0, 0 < alpha <= 1.

    Absolute error <= max(target_abs_tol, 1e-10).  Raises NonConvergence if
    the internal point/term budget cannot reach that tolerance (only
    possible for alpha extremely close to, but not equal to, 1).
    """
    alpha, z = params.alpha, params.z
    if z == 0.0:
        return 1.0
    if alpha == 1.0:
        return math.exp(z)
    s = -z
    if s <= 1.0:
        return _ml_taylor(alpha, z)
    if s >= 34.0**alpha:
        return _ml_asymptotic(alpha, s)
    return _ml_spectral(alpha, s)


_TAYLOR_MAX_TERMS = 200_000


def _ml_taylor(alpha: float, z: float) -> float:
    # sum z^k / Gamma(alpha k + 1); |z| <= 1 so terms are bounded by
    # 1/Gamma(alpha k + 1) and the summation is only mildly alternating.
    terms = [1.0]
    zk = 1.0
    for k in range(1, _TAYLOR_MAX_TERMS):
        zk *= z
        term = zk * _recip_gamma(alpha * k + 1.0)
        terms.append(term)
        if abs(term) < 1e-17:
            return math.fsum(terms)
    raise NonConvergence(
        f"Taylor series for E_{alpha}({z}) did not reach 1e-17 within "
        f"{_TAYLOR_MAX_TERMS} terms"
    )


def _ml_asymptotic(alpha: float, s: float) -> float:
    # E_alpha(-s) ~ sum_{k>=1} (-1)^(k+1) s^-k / Gamma(1 - alpha k), summed to
    # the smallest term.  1/Gamma(1 - alpha k) = sin(pi alpha k) Gamma(alpha k)
    # / pi passes through zeros at integer alpha k, so raw term magnitudes
    # oscillate; optimal truncation must track the smooth envelope
    # s^-k Gamma(alpha k) / pi instead.  Caller guarantees s >= 34**alpha,
    # which puts the envelope minimum at ~exp(-s^(1/alpha)) <= e^-34.
    log_s = math.log(s)
    log_tiny = math.log(1e-17)
    terms = []
    prev_env = math.inf
    k = 1
    while True:
        x = alpha * k
        log_env = -k * log_s + math.lgamma(x) - math.log(math.pi)
        if log_env >= prev_env:
            break  # envelope minimum passed: optimal truncation point
        m = round(x)
        sign = 1.0 if (k + 1 + m) % 2 == 0 else -1.0
        # sin(pi x) computed from the reduced argument to keep full precision
        terms.append(sign * math.sin(math.pi * (x - m)) * math.exp(log_env))
        if log_env < log_tiny:
            break
        prev_env = log_env
        k += 1
    return math.fsum(terms)


_SPECTRAL_MAX_POINTS = 400_000


def _ml_spectral(alpha: float, s: float) -> float:
    # E_alpha(-t^alpha) = int_0^inf K_alpha(r) e^(-r t) dr (complete
    # monotonicity in t), so E_alpha(-s) takes t = s^(1/alpha).  Trapezoidal
    # rule on r = e^u over the real line, truncated where the integrand falls
    # below ~1e-15.
    sin_api = math.sin(math.pi * alpha)
    cos_api = math.cos(math.pi * alpha)
    t_arg = s ** (1.0 / alpha)
    # analyticity strip: poles of the density at |Im u| = pi(1-alpha)/alpha,
    # rotation of exp(-t e^u) limits use beyond |Im u| = pi/2
    strip = min(math.pi * (1.0 - alpha) / alpha, 0.5 * math.pi)
    d_eff = 0.7 * strip
    h = 2.0 * math.pi * d_eff / 35.0
    # left tail behaves like (sin a pi / pi) e^(alpha u)
    u_min = (math.log(1e-15) + math.log(alpha * math.pi / sin_api)) / alpha
    # right tail is killed by exp(-t e^u); t < 34 on this band
    u_max = math.log(45.0 / t_arg)
    n = int(math.ceil((u_max - u_min) / h)) + 1
    if n > _SPECTRAL_MAX_POINTS:
        raise NonConvergence(
            f"spectral quadrature for E_{alpha}(-{s}) needs {n} points "
            f"(> {_SPECTRAL_MAX_POINTS}); alpha too close to 1 for this band"
        )
    u = u_min + h * np.arange(n)
    e_au = np.exp(alpha * u)
    dens = (sin_api / math.pi) * e_au / (e_au * e_au + 2.0 * cos_api * e_au + 1.0)
    f = dens * np.exp(-t_arg * np.exp(u))
    total = float(np.sum(f)) - 0.5 * (float(f[0]) + float(f[-1]))
    return h * total
