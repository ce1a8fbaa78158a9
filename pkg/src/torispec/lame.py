"""Lame-equation side: parameter map, nu = 1 spectrum, and the h3 certificate.

The trigonometric Lame equation with nu = 1 is solved in self-adjoint form

    -(P phi')' + (2 k^2 cos^2 y / P) phi = h phi / P,   P = sqrt(1 - k^2 cos^2 y),

on period pi in both flavors. Its coefficients are even in y, so every
eigenfunction can be chosen even or odd under y -> -y (for pi-periodic
functions this is the same as phi(pi - y) = -phi(y)). The class used for the
h3 bound is the pi-periodic odd one, spanned by sin(2 j y); see
``h3_certificate``.

The reflection y -> pi/2 - y is *not* a symmetry of the equation (it swaps
cos y and sin y), so the class of functions antisymmetric about pi/4 is only
handled as a Rayleigh-quotient infimum via a Galerkin basis
(``literal_class_basis``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import sl
from .geometry import TorusParams
from .sl import ANTIPERIODIC, PERIODIC


@dataclass(frozen=True)
class LameParams:
    k2: float
    h: float
    nu: float


def to_lame(params: TorusParams, l: int, lam: float) -> LameParams:
    if lam < 0:
        raise ValueError("lam must be nonnegative")
    m, n = params.m, params.n
    denom = m * m + 2 * m * n
    return LameParams(
        k2=(m * m - n * n) / denom,
        h=((m * m + m * n) * lam - l * l) / denom,
        nu=(-1.0 + math.sqrt(1.0 + 4.0 * lam)) / 2.0,
    )


def _check_modulus(k):
    if not (0.0 <= k < 1.0):
        raise ValueError(f"modulus must satisfy 0 <= k < 1, got {k}")


def lame_problem(k: float, bc: str = PERIODIC, grid_size: int = 1024) -> sl.SLProblem:
    _check_modulus(k)
    k2 = k * k

    def P(y):
        c = np.cos(y)
        return np.sqrt(1.0 - k2 * c * c)

    return sl.SLProblem(
        p=P,
        q=lambda y: 2.0 * k2 * np.cos(y) ** 2 / P(y),
        r=lambda y: 1.0 / P(y),
        period=math.pi, bc=bc, grid_size=grid_size,
    )


def aux_problem(k: float, bc: str = PERIODIC, grid_size: int = 1024) -> sl.SLProblem:
    """-(P phi')' + P phi = lam P phi; h = 2 in the Lame form <=> lam = 3 here."""
    _check_modulus(k)
    k2 = k * k

    def P(y):
        c = np.cos(y)
        return np.sqrt(1.0 - k2 * c * c)

    return sl.SLProblem(p=P, q=P, r=P, period=math.pi, bc=bc, grid_size=grid_size)


# -- reflections of grid functions on [0, pi) -----------------------------------

def _reflect(v: np.ndarray, bc: str, offset: int) -> np.ndarray:
    """Values of phi(offset*dx - y) on the grid, using phi(y + pi) = +-phi(y)."""
    N = v.shape[0]
    s = sl.BC_SIGN[bc]
    j = offset - np.arange(N)
    wrapped = np.where(j < 0, s, 1.0)
    wrapped = np.where(j >= N, s, wrapped)
    out = v[j % N]
    return out * (wrapped[:, None] if v.ndim == 2 else wrapped)


def reflect_origin(v, bc):
    """phi(-y)."""
    return _reflect(v, bc, 0)


def reflect_quarter(v, bc):
    """phi(pi/2 - y); requires an even grid size."""
    return _reflect(v, bc, v.shape[0] // 2)


def reflection_correlation(vec, weight, bc, reflect=reflect_origin) -> float:
    rv = reflect(vec, bc)
    return float(np.sum(weight * vec * rv) / np.sum(weight * vec * vec))


@dataclass
class ClassifiedSpectrum:
    values: np.ndarray
    parity: list[int]  # +1 even, -1 odd under y -> -y
    quarter_corr: list[float]
    vectors: np.ndarray
    weight: np.ndarray
    bc: str


def _classify(spec: sl.SLSpectrum) -> ClassifiedSpectrum:
    """Split a spectrum into even/odd parts under y -> -y.

    Inside a cluster the eigenvectors are rotated to diagonalize the reflection,
    which is an exact symmetry of the discrete pencil. The topmost cluster gets
    parity 0 (unclassified).
    """
    V = spec.eigenvectors.copy()
    w = spec.weight
    vals = spec.eigenvalues
    parity = [0] * len(vals)
    for group in sl.clusters(list(vals)):
        if group[-1] == len(vals) - 1:
            # may be cut mid-cluster; its eigenspace is incomplete, leave unlabelled
            continue
        G = V[:, group]
        RG = reflect_origin(G, spec.bc)
        S = (G.T * w) @ RG
        S = 0.5 * (S + S.T)
        mu, C = scipy.linalg.eigh(S, (G.T * w) @ G)
        V[:, group] = G @ C
        for i, val in zip(group, mu):
            if abs(abs(val) - 1.0) > 1e-6:
                raise sl.SolverError(f"reflection parity ambiguous ({val:.6f}) near eigenvalue {vals[group[0]]:.6g}")
            parity[i] = 1 if val > 0 else -1
    qc = [reflection_correlation(V[:, i], w, spec.bc, reflect_quarter) for i in range(len(vals))]
    return ClassifiedSpectrum(values=np.asarray(vals), parity=parity, quarter_corr=qc,
                              vectors=V, weight=w, bc=spec.bc)


def classified_values(problem: sl.SLProblem, count: int, parity: int, target_tol: float = 1e-9,
                      needed: int = 1):
    """Extrapolated eigenvalues of one parity class, with error estimates.

    Each grid level is classified before extrapolating, so near-degenerate
    pairs of opposite parity cannot be mismatched across levels. Only the
    first ``needed`` values are held to ``target_tol``.
    """
    N = problem.grid_size
    per_level = []
    for n in (N // 2, N, 2 * N):
        c = _classify(sl.solve(problem.with_grid(n), count + 2))
        per_level.append(np.array([v for v, s in zip(c.values, c.parity) if s == parity]))
    size = min(len(x) for x in per_level)
    if size == 0:
        raise sl.SolverError(f"no eigenfunctions of parity {parity:+d} among the lowest {count}")
    best, err = sl.extrapolate_levels(*(x[:size] for x in per_level))
    worst = float(np.max(err[:needed]))
    if worst > target_tol:
        raise sl.RefinementError(f"class-wise extrapolation error {worst:.2e} > {target_tol}", worst)
    return best, err


@dataclass
class LameLevel:
    h: float
    error: float
    flavor: str
    parity: str
    quarter_corr: float


def lame_spectrum(k: float, levels: int = 6, grid_size: int = 1024) -> list[LameLevel]:
    """Lowest ``levels`` eigenvalues h of the nu = 1 trigonometric Lame equation.

    Both pi-flavors are merged. Each level is labelled even/odd under y -> -y
    and carries its correlation with the reflection about pi/4 (informational).
    """
    _check_modulus(k)
    if levels < 1 or levels > 12:
        raise ValueError("levels must be in [1, 12]")
    count = levels // 2 + 2
    out = []
    for bc in (PERIODIC, ANTIPERIODIC):
        problem = lame_problem(k, bc, grid_size)
        fine = _classify(sl.solve(problem.with_grid(2 * grid_size), count + 2))
        for par in (1, -1):
            try:
                vals, errs = classified_values(problem, count, par, target_tol=1e-6)
            except sl.SolverError:
                continue
            idx = [i for i, s in enumerate(fine.parity) if s == par]
            for j, (v, e) in enumerate(zip(vals, errs)):
                out.append(LameLevel(h=float(v), error=float(e), flavor=bc,
                                     parity="even" if par > 0 else "odd",
                                     quarter_corr=fine.quarter_corr[idx[j]]))
    out.sort(key=lambda lv: (lv.h, lv.flavor, lv.parity))
    return out[:levels]


# -- Galerkin oracle --------------------------------------------------------------

def odd_class_basis(size: int):
    """sin(2 j y), j = 1..size: pi-periodic and odd, i.e. phi(pi - y) = -phi(y)."""
    js = np.arange(1, size + 1)
    return [(lambda y, j=j: np.sin(2 * j * y), lambda y, j=j: 2 * j * np.cos(2 * j * y)) for j in js]


def literal_class_basis(size: int):
    """cos(2 j y) for odd j and sin(2 j y) for even j >= 2.

    Each element is pi-periodic and satisfies phi(y) = -phi(pi/2 - y).
    """
    out = []
    j = 1
    while len(out) < size:
        if j % 2:
            out.append((lambda y, j=j: np.cos(2 * j * y), lambda y, j=j: -2 * j * np.sin(2 * j * y)))
        else:
            out.append((lambda y, j=j: np.sin(2 * j * y), lambda y, j=j: 2 * j * np.cos(2 * j * y)))
        j += 1
    return out


def galerkin_lowest(problem: sl.SLProblem, basis, quad_points: int = 4096) -> float:
    """Smallest Rayleigh quotient over the span of ``basis`` (periodic trapezoid rule)."""
    y = np.arange(quad_points) * (problem.period / quad_points)
    wq = problem.period / quad_points
    F = np.column_stack([f(y) for f, _ in basis])
    D = np.column_stack([d(y) for _, d in basis])
    p, q, r = problem.p(y), problem.q(y), problem.r(y)
    S = (D.T * p) @ D * wq + (F.T * q) @ F * wq
    M = (F.T * r) @ F * wq
    return float(scipy.linalg.eigh(S, M, eigvals_only=True, subset_by_index=[0, 0])[0])


# -- certificates -----------------------------------------------------------------

@dataclass
class H3Entry:
    k: float
    h3: float
    error: float
    merged_h3: float
    galerkin_h3: float
    margin: float


@dataclass
class H3Report:
    entries: list[H3Entry]

    @property
    def min_margin(self) -> float:
        return min(e.margin for e in self.entries)

    @property
    def ok(self) -> bool:
        return all(e.margin > 0 for e in self.entries)


def h3_value(k: float, grid_size: int = 1024) -> tuple[float, float]:
    """Lowest pi-periodic, odd eigenvalue h of the nu = 1 Lame equation, with error estimate."""
    vals, errs = classified_values(lame_problem(k, PERIODIC, grid_size), 6, -1)
    return float(vals[0]), float(errs[0])


def h3_certificate(k_grid, grid_size: int = 1024, galerkin_size: int = 48) -> H3Report:
    entries = []
    for k in k_grid:
        if not (0.0 <= k < 1.0):
            raise ValueError(f"k must lie in [0, 1), got {k}")
        h3, err = h3_value(k, grid_size)
        merged = lame_spectrum(k, 5, grid_size)[3].h
        gal = galerkin_lowest(lame_problem(k, PERIODIC), odd_class_basis(galerkin_size))
        entries.append(H3Entry(k=float(k), h3=h3, error=err, merged_h3=merged, galerkin_h3=gal, margin=h3 - 2.0))
    return H3Report(entries)


@dataclass
class AuxEntry:
    k: float
    lam0: float
    galerkin_lam0: float
    literal_class_inf: float
    margin: float


def aux_lambda_check(k_grid, grid_size: int = 1024, galerkin_size: int = 48) -> list[AuxEntry]:
    """Lowest eigenvalue of the auxiliary problem on the odd pi-periodic class.

    A value above 3 rules out an h = 2 eigenfunction in that class.
    """
    out = []
    for k in k_grid:
        if not (0.0 <= k < 1.0):
            raise ValueError(f"k must lie in [0, 1), got {k}")
        prob = aux_problem(k, PERIODIC, grid_size)
        vals, _ = classified_values(prob, 6, -1)
        gal = galerkin_lowest(aux_problem(k), odd_class_basis(galerkin_size))
        lit = galerkin_lowest(aux_problem(k), literal_class_basis(galerkin_size))
        out.append(AuxEntry(k=float(k), lam0=float(vals[0]), galerkin_lam0=gal,
                            literal_class_inf=lit, margin=float(vals[0]) - 3.0))
    return out


def aux_rayleigh(k: float, f, df, points: int = 8192) -> float:
    """R_k[f] = int_0^pi P (f'^2 + f^2) / int_0^pi P f^2 for k in [0, 1]."""
    if not (0.0 <= k <= 1.0):
        raise ValueError("k must lie in [0, 1]")
    # midpoint rule: P may vanish at the ends when k = 1
    y = (np.arange(points) + 0.5) * (math.pi / points)
    P = np.sqrt(np.clip(1.0 - (k * np.cos(y)) ** 2, 0.0, None))
    fv, dv = f(y), df(y)
    return float(np.sum(P * (dv * dv + fv * fv)) / np.sum(P * fv * fv))


# -- k = 1 limit through Legendre polynomials ------------------------------------

def legendre_table(max_degree: int, t: np.ndarray):
    """P_0..P_max and their derivatives at ``t`` via the three-term recurrences."""
    t = np.asarray(t, dtype=float)
    P = np.zeros((max_degree + 1,) + t.shape)
    dP = np.zeros_like(P)
    P[0] = 1.0
    if max_degree >= 1:
        P[1] = t
        dP[1] = 1.0
    for n in range(1, max_degree):
        P[n + 1] = ((2 * n + 1) * t * P[n] - n * P[n - 1]) / (n + 1)
        dP[n + 1] = dP[n - 1] + (2 * n + 1) * P[n]
    return P, dP


@dataclass
class LegendreLimit:
    degrees: list[int]
    minimum: float
    coefficients: np.ndarray  # in the orthonormal Legendre basis, unit length
    quotients: dict[int, float]

    @property
    def off_p1(self) -> float:
        return float(np.max(np.abs(self.coefficients[1:]))) if len(self.coefficients) > 1 else 0.0


def legendre_limit_check(max_degree: int = 9) -> LegendreLimit:
    """Minimize R_1[g] = int (1-t^2) g'^2 + g^2 / int g^2 over odd polynomials of degree <= max_degree."""
    if max_degree < 3 or max_degree % 2 == 0:
        raise ValueError("max_degree must be odd and >= 3")
    degrees = list(range(1, max_degree + 1, 2))
    # Gauss rule with max_degree + 1 nodes integrates degree 2*max_degree + 1 exactly
    nodes, weights = np.polynomial.legendre.leggauss(max_degree + 1)
    P, dP = legendre_table(max_degree, nodes)
    norm = np.array([math.sqrt((2 * d + 1) / 2.0) for d in degrees])
    F = (P[degrees] * norm[:, None]).T
    D = (dP[degrees] * norm[:, None]).T
    S = (D.T * (weights * (1 - nodes**2))) @ D + (F.T * weights) @ F
    M = (F.T * weights) @ F
    if np.linalg.cond(M) > 1e8:
        raise ArithmeticError("degenerate quadrature for the Legendre mass matrix")
    vals, vecs = scipy.linalg.eigh(S, M)
    c = vecs[:, 0] / np.linalg.norm(vecs[:, 0])
    c = c if c[0] > 0 else -c
    quotients = {d: float(S[i, i] / M[i, i]) for i, d in enumerate(degrees)}
    return LegendreLimit(degrees=degrees, minimum=float(vals[0]), coefficients=c, quotients=quotients)
