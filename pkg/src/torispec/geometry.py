"""Immersion of the tori M_{m,n} into the unit 5-sphere and the induced metric.

The sphere is viewed as the unit vectors of C^3; complex coordinates are
carried as interleaved real pairs ``(re1, im1, re2, im2, re3, im3)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class TorusParams:
    """Coprime pair ``m >= n >= 1`` indexing the family."""

    m: int
    n: int
    parity: int = field(init=False)

    def __post_init__(self):
        if not (isinstance(self.m, (int, np.integer)) and isinstance(self.n, (int, np.integer))):
            raise TypeError("m and n must be integers")
        if self.n < 1 or self.m < self.n:
            raise ValueError(f"need m >= n >= 1, got m={self.m}, n={self.n}")
        if math.gcd(self.m, self.n) != 1:
            raise ValueError(f"m and n must be coprime, got gcd({self.m},{self.n})={math.gcd(self.m, self.n)}")
        object.__setattr__(self, "parity", (self.m * self.n) % 2)

    @property
    def odd(self) -> bool:
        return self.parity == 1

    @property
    def index(self) -> int:
        """Index i of the functional Lambda_i for which the metric is extremal."""
        s = self.m + self.n
        return 2 * s - 3 if self.odd else 4 * s - 3


def coprime_pairs(sum_max: int) -> list[TorusParams]:
    """All admissible pairs with ``m + n <= sum_max``, ordered by (m+n, n)."""
    out = []
    for s in range(2, sum_max + 1):
        for n in range(1, s // 2 + 1):
            m = s - n
            if math.gcd(m, n) == 1:
                out.append(TorusParams(m, n))
    return out


@dataclass(frozen=True)
class ImmersionPoint:
    """Point(s) of C^3 stored as six reals along the last axis."""

    coords: np.ndarray

    @property
    def c1(self):
        return self.coords[..., 0] + 1j * self.coords[..., 1]

    @property
    def c2(self):
        return self.coords[..., 2] + 1j * self.coords[..., 3]

    @property
    def c3(self):
        return self.coords[..., 4] + 1j * self.coords[..., 5]

    def norm2(self) -> np.ndarray:
        return np.sum(self.coords**2, axis=-1)


def _reduce(angle):
    return np.mod(np.asarray(angle, dtype=float), TWO_PI)


def third_profile(params: TorusParams, x):
    m, n = params.m, params.n
    c, s = np.cos(x), np.sin(x)
    return np.sqrt(n * c * c / (m + 2 * n) + m * s * s / (2 * m + n))


def _immerse_turns(params: TorusParams, u, v) -> ImmersionPoint:
    # angles given in turns (x = 2 pi u); for dyadic u, v the products m*v and
    # their fractional parts are exact, so half-period shifts are reproduced exactly
    m, n = params.m, params.n
    u, v = np.broadcast_arrays(np.asarray(u, dtype=float), np.asarray(v, dtype=float))
    x = TWO_PI * np.mod(u, 1.0)
    a1 = math.sqrt((m + n) / (2 * m + n)) * np.sin(x)
    a2 = math.sqrt((m + n) / (m + 2 * n)) * np.cos(x)
    a3 = third_profile(params, x)
    t1, t2, t3 = (TWO_PI * np.mod(f * v, 1.0) for f in (m, n, -(m + n)))
    coords = np.stack(
        [a1 * np.cos(t1), a1 * np.sin(t1),
         a2 * np.cos(t2), a2 * np.sin(t2),
         a3 * np.cos(t3), a3 * np.sin(t3)],
        axis=-1,
    )
    return ImmersionPoint(coords)


def immerse(params: TorusParams, x, y) -> ImmersionPoint:
    """Evaluate phi_{m,n}(x, y); accepts scalars or broadcastable arrays."""
    return _immerse_turns(params, _reduce(x) / TWO_PI, _reduce(y) / TWO_PI)


def sigma(params: TorusParams, x):
    m, n = params.m, params.n
    return np.sqrt(m * m + 4 * m * n + n * n - (m * m - n * n) * np.cos(2 * np.asarray(x, dtype=float)))


def rho(params: TorusParams, x):
    m, n = params.m, params.n
    return (m + n) * (m + n - (m - n) * np.cos(2 * np.asarray(x, dtype=float)))


@dataclass(frozen=True)
class CoefficientField:
    sigma: np.ndarray
    rho: np.ndarray
    g_xx: np.ndarray
    g_yy: np.ndarray

    @property
    def area_density(self):
        return np.sqrt(self.g_xx * self.g_yy)


def metric_coeffs(params: TorusParams, x) -> CoefficientField:
    """Induced metric g = g_xx dx^2 + g_yy dy^2 with g_xx = rho/sigma^2, g_yy = rho/2."""
    x = _reduce(x)
    s = sigma(params, x)
    r = rho(params, x)
    return CoefficientField(sigma=s, rho=r, g_xx=r / (s * s), g_yy=r / 2.0)


def coefficient_bounds(params: TorusParams) -> dict[str, tuple[float, float]]:
    m, n = params.m, params.n
    return {
        "sigma": (math.sqrt(2 * n * (2 * m + n)), math.sqrt(2 * m * (m + 2 * n))),
        "rho": (2.0 * n * (m + n), 2.0 * m * (m + n)),
    }


@dataclass(frozen=True)
class SymmetryReport:
    is_double_cover: bool
    max_deviation: float
    candidate_deviation: float


def symmetry_check(params: TorusParams, sample_count: int = 64) -> SymmetryReport:
    """Test the shift (x, y) -> (x + pi, y + pi) on a sample grid.

    ``max_deviation`` is the largest |phi(x,y) - phi(x+pi, y+pi)|. When mn is even,
    ``candidate_deviation`` is the smallest (over shifts y -> y + 2*pi*j/(m+n), with
    and without x -> x + pi) of the largest deviation, and must stay away from 0.
    For odd mn it equals ``max_deviation``.
    """
    if sample_count < 16 or sample_count & (sample_count - 1):
        raise ValueError("sample_count must be a power of two >= 16")
    # sampled in turns on a dyadic grid; the offset avoids the special points x = 0, pi/2
    g = (np.arange(sample_count) + 0.375) / sample_count
    X, Y = np.meshgrid(g, g, indexing="ij")
    base = _immerse_turns(params, X, Y).coords

    def deviation(dx, dy):
        moved = _immerse_turns(params, X + dx / TWO_PI, Y + dy / TWO_PI).coords
        return float(np.max(np.linalg.norm(moved - base, axis=-1)))

    dev = deviation(math.pi, math.pi)
    is_double = dev < 1e-12
    if is_double:
        cand = dev
    else:
        s = params.m + params.n
        shifts = [(dx, TWO_PI * j / s) for j in range(1, s) for dx in (0.0, math.pi)]
        shifts.append((math.pi, 0.0))
        cand = min(deviation(dx, dy) for dx, dy in shifts)
    return SymmetryReport(is_double_cover=is_double, max_deviation=dev, candidate_deviation=cand)


def coordinate_profiles(params: TorusParams) -> list[tuple[Callable[[np.ndarray], np.ndarray], int]]:
    """Radial profiles of the three complex coordinates with their y-frequencies."""
    m, n = params.m, params.n
    c1 = math.sqrt((m + n) / (2 * m + n))
    c2 = math.sqrt((m + n) / (m + 2 * n))
    return [
        (lambda x: c1 * np.sin(x), m),
        (lambda x: c2 * np.cos(x), n),
        (lambda x: third_profile(params, x), m + n),
    ]
