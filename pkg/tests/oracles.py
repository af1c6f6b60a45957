"""Independent reference computations used to freeze expected test values.

Everything here is deliberately built on *different* algorithms than the
package: mpmath arbitrary-precision series / tanh-sinh quadrature and
scipy adaptive quadrature.  Slow is fine; these run at test time only.
"""

from __future__ import annotations

import math

import mpmath as mp


def ml_reference(alpha: float, z: float, dps_pad: int = 30) -> float:
    """E_alpha(z) for z <= 0, 0 < alpha <= 1, via the defining power series.

    The series sum_k z^k / Gamma(alpha k + 1) suffers catastrophic
    cancellation for z << 0: partial sums peak near exp(s^(1/alpha)) with
    s = -z, so the working precision is raised until the lost digits are
    covered.  Practical up to s^(1/alpha) ~ 700 or so; beyond that use
    ml_reference_quad.
    """
    if z == 0.0:
        return 1.0
    s = -float(z)
    if s < 0:
        raise ValueError("ml_reference wants z <= 0")
    # number of decimal digits cancelled ~ peak/ln(10), peak ~ s**(1/alpha)
    peak = s ** (1.0 / alpha)
    dps = dps_pad + int(peak / math.log(10.0)) + 1
    with mp.workdps(dps):
        zz = mp.mpf(z)
        a = mp.mpf(alpha)
        thresh = mp.mpf(10) ** (-dps)
        total = mp.mpf(0)
        prev_small = False
        k = 0
        while k < 2_000_000:
            term = zz**k / mp.gamma(a * k + 1)
            total += term
            small = abs(term) < thresh
            if k > 8 and small and prev_small:
                return float(total)
            prev_small = small
            k += 1
        raise RuntimeError(f"series not converged: alpha={alpha}, z={z}")


def ml_reference_quad(alpha: float, z: float) -> float:
    """E_alpha(-s) via tanh-sinh quadrature of its complete-monotonicity density.

    For 0 < alpha < 1 and t > 0:
        E_alpha(-t^alpha) = int_0^inf K(r) exp(-r t) dr,
        K(r) = (sin(alpha pi)/pi) * r^(alpha-1) / (r^(2alpha) + 2 r^alpha cos(alpha pi) + 1),
    so E_alpha(-s) is the integral at t = s^(1/alpha).  Independent of the
    series path; used to cross-check large-s values.
    """
    s = -float(z)
    if not 0.0 < alpha < 1.0:
        raise ValueError("quad oracle needs 0 < alpha < 1")
    if s <= 0:
        raise ValueError("quad oracle wants z < 0")
    with mp.workdps(40):
        a = mp.mpf(alpha)
        ss = mp.mpf(s)
        sinpa = mp.sin(mp.pi * a)
        cospa = mp.cos(mp.pi * a)

        # substitute x = (r t)^alpha, which removes the r^(alpha-1) endpoint
        # singularity exactly (tanh-sinh loses digits on it as alpha -> 0)
        # and turns the e^(-rt) factor into e^(-x^(1/alpha)); note t^alpha = s:
        #   E_alpha(-s) = sin(pi a)/(pi a s) *
        #                 int_0^inf e^(-x^(1/a)) / ((x/s)^2 + 2(x/s)cos(pi a) + 1) dx
        def integrand(x):
            u = x / ss
            return mp.exp(-(x ** (1 / a))) / (u * u + 2 * u * cospa + 1)

        val = mp.quad(integrand, [0, mp.mpf("0.5"), 1, 2, 8, mp.inf])
        return float(sinpa / (mp.pi * a * ss) * val)


def kernel_quad_reference(alpha: float, t: float, l_min: float, l_max: float) -> float:
    """(1/Gamma(1-alpha)) * int_{l_min}^{l_max} e^{(1-alpha)w - t e^w} dw via mpmath."""
    with mp.workdps(30):
        a = mp.mpf(alpha)
        tt = mp.mpf(t)
        val = mp.quad(lambda w: mp.e ** ((1 - a) * w - tt * mp.e**w), [l_min, l_max])
        return float(val / mp.gamma(1 - a))
