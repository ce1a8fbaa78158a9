"""Periodic / antiperiodic Sturm-Liouville eigensolver.

Solves ``-(p h')' + q h = lam r h`` on one period ``[0, T)`` with
``h(x + T) = +h(x)`` (periodic) or ``-h(x)`` (antiperiodic).

The operator is discretized with the conservative second-order flux stencil on
a uniform grid, giving a symmetric cyclic-tridiagonal pencil (A, diag(r)). Low
eigenpairs come from shifted block subspace iteration with a sparse LU of
``A - shift*B``; Ritz values are formed from the discrete energy
``sum p_{i+1/2} (dh)^2 / dx^2 + sum q h^2``, whose terms are all of one sign, so
they carry relative (not ``eps * ||A||``) rounding error. That matters: at
N=2048 the matrix norm is ~1e7 and a plain dense solve loses ~1e-8 absolute,
which Richardson extrapolation cannot tolerate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.integrate import solve_ivp
from scipy.optimize import brentq, minimize_scalar

PERIODIC = "periodic"
ANTIPERIODIC = "antiperiodic"
BC_SIGN = {PERIODIC: 1.0, ANTIPERIODIC: -1.0}

CLUSTER_TOL = 1e-6
ZERO_NOISE = 1e-8


class SolverError(RuntimeError):
    """The discrete eigensolve failed or did not converge."""


class RefinementError(SolverError):
    """Grid refinement did not reach the requested tolerance."""

    def __init__(self, message: str, achieved: float):
        super().__init__(message)
        self.achieved = achieved


class FloquetError(RuntimeError):
    """Shooting integration failed."""


Coefficient = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True)
class SLProblem:
    p: Coefficient
    q: Coefficient
    r: Coefficient
    period: float
    bc: str = PERIODIC
    grid_size: int = 1024

    def __post_init__(self):
        if self.bc not in BC_SIGN:
            raise ValueError(f"bc must be 'periodic' or 'antiperiodic', got {self.bc!r}")
        if not self.period > 0:
            raise ValueError("period must be positive")

    @property
    def sign(self) -> float:
        return BC_SIGN[self.bc]

    def with_grid(self, grid_size: int) -> "SLProblem":
        return SLProblem(self.p, self.q, self.r, self.period, self.bc, grid_size)

    def with_bc(self, bc: str) -> "SLProblem":
        return SLProblem(self.p, self.q, self.r, self.period, bc, self.grid_size)


@dataclass
class Pencil:
    """Discrete pencil (A, diag(r)) plus the pieces needed for energy forms."""

    x: np.ndarray
    dx: float
    p_half: np.ndarray
    q: np.ndarray
    r: np.ndarray
    sign: float
    A: sp.csc_matrix

    @property
    def size(self) -> int:
        return self.x.size

    def forward_diff(self, v: np.ndarray) -> np.ndarray:
        """h_{i+1} - h_i along axis 0, wrapping with the boundary sign."""
        nxt = np.roll(v, -1, axis=0)
        nxt[-1] *= self.sign
        return nxt - v

    def energy(self, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
        Y = X if Y is None else Y
        DX = self.forward_diff(X)
        DY = DX if Y is X else self.forward_diff(Y)
        return (DX.T * self.p_half) @ DY / self.dx**2 + (X.T * self.q) @ Y

    def mass(self, X: np.ndarray, Y: np.ndarray | None = None) -> np.ndarray:
        Y = X if Y is None else Y
        return (X.T * self.r) @ Y


def assemble(problem: SLProblem) -> Pencil:
    N = problem.grid_size
    if N < 32 or N % 2:
        raise ValueError(f"grid_size must be even and >= 32, got {N}")
    T = float(problem.period)
    for name in ("p", "q", "r"):
        f = getattr(problem, name)
        ends = np.asarray(f(np.array([0.0, T])), dtype=float)
        if abs(ends[0] - ends[1]) >= 1e-13 * max(1.0, abs(ends[0])):
            raise ValueError(f"coefficient {name} is not {T}-periodic: f(0)={ends[0]!r}, f(T)={ends[1]!r}")
    dx = T / N
    x = np.arange(N) * dx
    p_half = np.broadcast_to(np.asarray(problem.p(x + 0.5 * dx), dtype=float), (N,)).copy()
    q = np.broadcast_to(np.asarray(problem.q(x), dtype=float), (N,)).copy()
    r = np.broadcast_to(np.asarray(problem.r(x), dtype=float), (N,)).copy()
    if np.any(p_half <= 0):
        raise ValueError("p must be strictly positive on the grid")
    if np.any(r <= 0):
        raise ValueError("r must be strictly positive on the grid")
    sign = problem.sign
    w = p_half / dx**2
    diag = w + np.roll(w, 1) + q
    i = np.arange(N)
    j = (i + 1) % N
    off = -w.copy()
    off[-1] *= sign
    rows = np.concatenate([i, i, j])
    cols = np.concatenate([i, j, i])
    vals = np.concatenate([diag, off, off])
    A = sp.csc_matrix((vals, (rows, cols)), shape=(N, N))
    return Pencil(x=x, dx=dx, p_half=p_half, q=q, r=r, sign=sign, A=A)


def _start_basis(pencil: Pencil, b: int, seed: int = 20240917) -> np.ndarray:
    N = pencil.size
    theta = 2 * np.pi * np.arange(N) / N
    cols = []
    if pencil.sign > 0:
        cols.append(np.ones(N))
        k = 1
        while len(cols) < b:
            cols += [np.cos(k * theta), np.sin(k * theta)]
            k += 1
    else:
        k = 0
        while len(cols) < b:
            cols += [np.cos((k + 0.5) * theta), np.sin((k + 0.5) * theta)]
            k += 1
    X = np.column_stack(cols[:b])
    rng = np.random.default_rng(seed)
    return X + 1e-2 * rng.standard_normal(X.shape)


def _ritz(pencil: Pencil, X: np.ndarray):
    K = pencil.energy(X)
    M = pencil.mass(X)
    K = 0.5 * (K + K.T)
    M = 0.5 * (M + M.T)
    try:
        theta, C = scipy.linalg.eigh(K, M)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"Rayleigh-Ritz step failed: {exc}") from exc
    return theta, X @ C


def eigenpairs(pencil: Pencil, count: int, rtol: float = 1e-14, max_iter: int = 400):
    """Lowest ``count`` eigenpairs of the pencil, vectors r-orthonormal (unweighted by dx)."""
    N = pencil.size
    b = min(N, count + max(count, 8))
    shift = float(np.min(pencil.q / pencil.r)) - 1.0
    M = (pencil.A - shift * sp.diags(pencil.r)).tocsc()
    try:
        lu = spla.splu(M)
    except RuntimeError as exc:
        raise SolverError(f"factorization of shifted pencil failed: {exc}") from exc
    theta, X = _ritz(pencil, _start_basis(pencil, b))
    prev = theta[:count]
    for it in range(1, max_iter + 1):
        Y = lu.solve(pencil.r[:, None] * X)
        theta, X = _ritz(pencil, Y)
        cur = theta[:count]
        if it >= 3 and np.all(np.abs(cur - prev) <= rtol * np.maximum(1.0, np.abs(cur))):
            return cur.copy(), X[:, :count].copy()
        prev = cur
    raise SolverError(f"subspace iteration did not converge in {max_iter} steps (count={count}, N={N})")


def zero_count(vector: np.ndarray, bc: str = PERIODIC, eps: float = ZERO_NOISE) -> int:
    """Sign changes of a grid function over one period, wrap-around pair included.

    Entries below ``eps * max|v|`` take the sign of the nearest significant
    neighbour (circular distance, earlier neighbour on ties).
    """
    v = np.asarray(vector, dtype=float)
    scale = np.max(np.abs(v)) if v.size else 0.0
    if not scale > 0:
        raise ValueError("cannot count zeros of an all-zero vector")
    N = v.size
    signs = np.sign(v)
    significant = np.abs(v) >= eps * scale
    if not significant.all():
        sig_idx = np.flatnonzero(significant)
        for i in np.flatnonzero(~significant):
            d = np.abs(sig_idx - i)
            d = np.minimum(d, N - d)
            best = np.flatnonzero(d == d.min())
            # earlier neighbour: the candidate reached by stepping backwards
            back = [(i - sig_idx[k]) % N for k in best]
            signs[i] = signs[sig_idx[best[int(np.argmin(back))]]]
    wrapped = np.append(signs, BC_SIGN[bc] * signs[0])
    return int(np.count_nonzero(wrapped[1:] != wrapped[:-1]))


def _normalize(pencil: Pencil, V: np.ndarray) -> np.ndarray:
    V = V / np.sqrt(np.sum(pencil.r[:, None] * V * V, axis=0) * pencil.dx)
    for k in range(V.shape[1]):
        col = V[:, k]
        first = np.flatnonzero(np.abs(col) >= 1e-6 * np.max(np.abs(col)))[0]
        if col[first] < 0:
            V[:, k] = -col
    return V


@dataclass
class SLSpectrum:
    """Low spectrum of one problem.

    ``eigenvectors`` holds grid functions as columns, normalized so that
    ``sum(r * v**2) * dx == 1``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    zero_counts: list[int]
    grid_size: int
    bc: str
    grid: np.ndarray
    weight: np.ndarray
    extrapolated: bool = False
    errors: np.ndarray | None = None
    levels: dict[int, np.ndarray] = field(default_factory=dict)

    def inner(self, f_values: np.ndarray, k: int) -> float:
        dx = self.grid[1] - self.grid[0]
        return float(np.sum(self.weight * self.eigenvectors[:, k] * f_values) * dx)


def solve(problem: SLProblem, count: int) -> SLSpectrum:
    if count < 1 or count > problem.grid_size // 4:
        raise ValueError(f"count must be in [1, N/4] = [1, {problem.grid_size // 4}], got {count}")
    pencil = assemble(problem)
    vals, vecs = eigenpairs(pencil, count)
    vecs = _normalize(pencil, vecs)
    zeros = [zero_count(vecs[:, k], problem.bc) for k in range(count)]
    return SLSpectrum(
        eigenvalues=vals,
        eigenvectors=vecs,
        zero_counts=zeros,
        grid_size=problem.grid_size,
        bc=problem.bc,
        grid=pencil.x,
        weight=pencil.r,
        levels={problem.grid_size: vals},
    )


def richardson(coarse: np.ndarray, fine: np.ndarray) -> np.ndarray:
    """Remove the h^2 term from values computed at grid steps 2h and h."""
    return (4.0 * np.asarray(fine) - np.asarray(coarse)) / 3.0


def extrapolate_levels(lam_half: np.ndarray, lam: np.ndarray, lam_double: np.ndarray):
    """Richardson value from (N, 2N) and its error estimate.

    The estimate compares against the (N/2, N) extrapolant; both carry an h^4
    leading error differing by a factor 16, hence the division by 15.
    """
    best = richardson(lam, lam_double)
    err = np.abs(best - richardson(lam_half, lam)) / 15.0
    return best, err


def refine(problem: SLProblem, count: int, target_tol: float = 1e-8, max_doublings: int = 4) -> SLSpectrum:
    """Extrapolated low spectrum.

    Solves at N and 2N (plus N/2 for the error estimate), extrapolates each
    eigenvalue, and doubles N until every error estimate is below ``target_tol``.
    Eigenvectors and zero counts are those of the finest grid.
    """
    if target_tol < 1e-10:
        raise ValueError("target_tol must be >= 1e-10")
    N = problem.grid_size
    if count > N // 8:
        raise ValueError(f"count must be <= N/8 = {N // 8} for refinement")
    cache: dict[int, SLSpectrum] = {}

    def level(n):
        if n not in cache:
            cache[n] = solve(problem.with_grid(n), count)
        return cache[n]

    err = np.inf
    for _ in range(max_doublings + 1):
        half, mid, fine = level(N // 2), level(N), level(2 * N)
        best, err_vec = extrapolate_levels(half.eigenvalues, mid.eigenvalues, fine.eigenvalues)
        err = float(np.max(err_vec))
        if err <= target_tol:
            return SLSpectrum(
                eigenvalues=best,
                eigenvectors=fine.eigenvectors,
                zero_counts=fine.zero_counts,
                grid_size=fine.grid_size,
                bc=problem.bc,
                grid=fine.grid,
                weight=fine.weight,
                extrapolated=True,
                errors=err_vec,
                levels={n: s.eigenvalues for n, s in sorted(cache.items())},
            )
        N *= 2
    raise RefinementError(
        f"extrapolated error estimate {err:.3e} exceeds target {target_tol:.1e} at N={N // 2}", achieved=err
    )


def clusters(values, tol: float = CLUSTER_TOL) -> list[list[int]]:
    """Group indices of ascending values whose neighbours differ by less than ``tol``."""
    groups: list[list[int]] = []
    for i, v in enumerate(values):
        if groups and v - values[groups[-1][-1]] < tol:
            groups[-1].append(i)
        else:
            groups.append([i])
    return groups


def check_interlacing(values, bc: str = PERIODIC, tol: float = CLUSTER_TOL) -> list[str]:
    """Violations of the oscillation-theorem ordering.

    Periodic: lam0 < lam1 <= lam2 < lam3 <= lam4 < ...
    Antiperiodic: lam0 <= lam1 < lam2 <= lam3 < ...
    Strict gaps must exceed ``tol``; a returned empty list means the pattern holds.
    """
    problems = []
    for i in range(len(values) - 1):
        gap = values[i + 1] - values[i]
        strict = (i % 2 == 0) if bc == PERIODIC else (i % 2 == 1)
        if strict and gap <= tol:
            problems.append(f"expected lam{i} < lam{i + 1} with margin > {tol}, gap {gap:.3e}")
        elif not strict and gap < -tol:
            problems.append(f"expected lam{i} <= lam{i + 1}, gap {gap:.3e}")
    return problems


def expected_zero_counts(count: int, bc: str = PERIODIC) -> list[int]:
    """Zero counts on one period dictated by the oscillation theorem."""
    if bc == PERIODIC:
        return [0] + [2 * ((i + 1) // 2) for i in range(1, count)]
    return [2 * (i // 2) + 1 for i in range(count)]


def floquet_oracle(problem: SLProblem, lam: float, rtol: float = 1e-12, atol: float = 1e-12) -> float:
    """Trace of the monodromy matrix of ``-(p h')' + q h = lam r h`` over one period.

    Uses the first-order system (h, p h') and DOP853. The value is 2 at periodic
    and -2 at antiperiodic eigenvalues.
    """
    p, q, r = problem.p, problem.q, problem.r

    def rhs(t, y):
        pt = float(p(t))
        c = float(q(t)) - lam * float(r(t))
        return [y[1] / pt, c * y[0], y[3] / pt, c * y[2]]

    sol = solve_ivp(rhs, (0.0, float(problem.period)), [1.0, 0.0, 0.0, 1.0],
                    method="DOP853", rtol=rtol, atol=atol)
    if not sol.success:
        raise FloquetError(f"shooting failed at t={sol.t[-1]:.6g}: {sol.message}")
    y = sol.y[:, -1]
    return float(y[0] + y[3])


def floquet_eigenvalue(problem: SLProblem, guess: float, width: float | None = None) -> float:
    """Locate the eigenvalue near ``guess`` from the discriminant alone.

    Simple eigenvalues are bracketed roots of D - (+-2); a double eigenvalue
    (tangency, no sign change) is located as the minimizer of |D -+ 2|.
    """
    target = 2.0 * problem.sign
    if width is None:
        width = 1e-5 * max(1.0, abs(guess))

    def g(lam):
        return floquet_oracle(problem, lam) - target

    lo, hi = guess - width, guess + width
    glo, ghi = g(lo), g(hi)
    if glo * ghi < 0:
        return float(brentq(g, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps))
    res = minimize_scalar(lambda lam: abs(g(lam)), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-13})
    return float(res.x)


def constant_problem(period: float = 2 * math.pi, bc: str = PERIODIC, grid_size: int = 1024,
                     p: float = 1.0, q: float = 0.0, r: float = 1.0) -> SLProblem:
    """Constant-coefficient problem, handy for analytic checks."""
    return SLProblem(
        p=lambda x: np.full(np.shape(x), p, dtype=float),
        q=lambda x: np.full(np.shape(x), q, dtype=float),
        r=lambda x: np.full(np.shape(x), r, dtype=float),
        period=period, bc=bc, grid_size=grid_size,
    )
