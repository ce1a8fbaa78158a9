"""Complete elliptic integrals, torus area and the extremal functional values.

All interfaces take the modulus k, never the parameter k**2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .geometry import TorusParams

_EPS = 2.220446049250313e-16


@dataclass(frozen=True)
class EllipticPair:
    k: float
    K: float
    E: float


def agm_KE(k: float) -> EllipticPair:
    """K(k) and E(k) by the arithmetic-geometric mean.

    K = pi / (2 a_inf) and E = K (1 - sum_j 2^(j-1) c_j^2) with c_0 = k,
    c_j = (a_{j-1} - b_{j-1}) / 2.
    """
    k = float(k)
    if not (0.0 <= k < 1.0):
        raise ValueError(f"modulus must satisfy 0 <= k < 1, got {k}")
    a, b = 1.0, math.sqrt((1.0 - k) * (1.0 + k))
    total = 0.5 * k * k
    power = 0.5
    while abs(a - b) >= 4 * _EPS * a:
        c = 0.5 * (a - b)
        a, b = 0.5 * (a + b), math.sqrt(a * b)
        power *= 2.0
        total += power * c * c
    K = math.pi / (2.0 * a)
    return EllipticPair(k=k, K=K, E=K * (1.0 - total))


def modulus(params: TorusParams) -> float:
    m, n = params.m, params.n
    return math.sqrt((m * m - n * n) / (m * m + 2 * m * n))


def _closed_bracket(params: TorusParams) -> float:
    """sqrt(m^2+2mn) E(k) - mn / sqrt(m^2+2mn) K(k)."""
    m, n = params.m, params.n
    s = math.sqrt(m * m + 2 * m * n)
    ke = agm_KE(modulus(params))
    return s * ke.E - m * n / s * ke.K


def area(params: TorusParams) -> float:
    """Area of M_{m,n}; the parametrization double covers when mn is odd."""
    a = 8.0 * math.pi * _closed_bracket(params)
    return a / 2.0 if params.odd else a


def adaptive_simpson(f, a: float, b: float, tol: float, max_depth: int = 50) -> tuple[float, float]:
    """Adaptive Simpson with interval bisection; returns (value, error estimate)."""

    def simpson(fa, fm, fb, h):
        return h / 6.0 * (fa + 4.0 * fm + fb)

    fa, fb, fm = f(a), f(b), f(0.5 * (a + b))
    whole = simpson(fa, fm, fb, b - a)
    total = 0.0
    err_total = 0.0
    stack = [(a, b, fa, fm, fb, whole, tol, 0)]
    while stack:
        lo, hi, flo, fmid, fhi, s, eps, depth = stack.pop()
        mid = 0.5 * (lo + hi)
        fl, fr = f(0.5 * (lo + mid)), f(0.5 * (mid + hi))
        left = simpson(flo, fl, fmid, mid - lo)
        right = simpson(fmid, fr, fhi, hi - mid)
        delta = left + right - s
        if depth >= max_depth:
            raise ArithmeticError(f"adaptive Simpson did not converge on [{lo}, {hi}]")
        if depth >= 2 and abs(delta) <= 15.0 * eps:
            total += left + right + delta / 15.0
            err_total += abs(delta) / 15.0
        else:
            stack.append((mid, hi, fmid, fr, fhi, right, 0.5 * eps, depth + 1))
            stack.append((lo, mid, flo, fl, fmid, left, 0.5 * eps, depth + 1))
    return total, err_total


def quadrature_area(params: TorusParams, tol: float = 1e-12, half_period: bool = False) -> float:
    """Area from the defining integral (2 pi / sqrt 2) * int_0^{2 pi} rho / sigma dx.

    ``half_period`` integrates over [0, pi] and doubles, using the pi-periodicity
    of the integrand.
    """
    if tol < 1e-12:
        raise ValueError("tol must be >= 1e-12")
    m, n = params.m, params.n
    a2 = m * m + 2 * m * n + n * n
    b2 = m * m + 4 * m * n + n * n
    d = m * m - n * n

    def integrand(x):
        c = math.cos(2.0 * x)
        return (a2 - d * c) / math.sqrt(b2 - d * c)

    scale = 2.0 * math.pi / math.sqrt(2.0)
    if half_period:
        value, _ = adaptive_simpson(integrand, 0.0, math.pi, tol / (2 * scale))
        value *= 2.0
    else:
        value, _ = adaptive_simpson(integrand, 0.0, 2 * math.pi, tol / scale)
    total = scale * value
    return total / 2.0 if params.odd else total


def ek_gap(k: float) -> float:
    """K(k) - 2 E(k) / (2 - k^2), nonnegative on [0, 1)."""
    ke = agm_KE(k)
    return ke.K - 2.0 * ke.E / (2.0 - k * k)


@dataclass(frozen=True)
class FunctionalReport:
    params: TorusParams
    index: int
    k: float
    K: float
    E: float
    area: float
    lambda_closed: float
    lambda_numeric: float
    rel_err: float
    nonmax_margin: float


def functional_value(params: TorusParams, quad_tol: float = 1e-12) -> FunctionalReport:
    """Lambda_index = 2 * area, with a quadrature cross-check and the gap to 8 pi * index."""
    k = modulus(params)
    ke = agm_KE(k)
    a = area(params)
    closed = 2.0 * a
    numeric = 2.0 * quadrature_area(params, quad_tol)
    idx = params.index
    return FunctionalReport(
        params=params, index=idx, k=k, K=ke.K, E=ke.E, area=a,
        lambda_closed=closed, lambda_numeric=numeric,
        rel_err=abs(closed - numeric) / abs(closed),
        nonmax_margin=8.0 * math.pi * idx - closed,
    )
