"""Laplace-Beltrami spectrum of M_{m,n} through the separated x-problems.

Separating ``f = h(x) e^{i l y}`` turns the Laplacian eigenproblem into
``-sigma (sigma h')' + 2 l^2 h = lam rho h``, i.e. the Sturm-Liouville triple
``(p, q, r) = (sigma, 2 l^2 / sigma, rho / sigma)``. The coefficients have period
pi, so every l-problem is solved on [0, pi) in both flavors; the 2*pi-periodic
spectrum is their union. When mn is odd only the flavor ``(-1)^l`` lifts to the
torus.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import sl
from .geometry import TorusParams, coordinate_profiles, rho, sigma
from .sl import ANTIPERIODIC, PERIODIC

DEFAULT_GRID = 1024
DEFAULT_TOL = 1e-6
TARGET = 2.0


def admitted_flavors(params: TorusParams, l: int) -> tuple[str, ...]:
    if not params.odd:
        return (PERIODIC, ANTIPERIODIC)
    return (PERIODIC,) if l % 2 == 0 else (ANTIPERIODIC,)


def build_problem(params: TorusParams, l: int, flavor: str, grid_size: int = DEFAULT_GRID) -> sl.SLProblem:
    if l < 0:
        raise ValueError("l must be nonnegative")
    if params.odd and flavor not in admitted_flavors(params, l):
        raise ValueError(
            f"for odd mn the l={l} problem only admits {admitted_flavors(params, l)[0]} functions, not {flavor}"
        )
    two_l2 = 2.0 * l * l
    return sl.SLProblem(
        p=lambda x: sigma(params, x),
        q=lambda x: two_l2 / sigma(params, x),
        r=lambda x: rho(params, x) / sigma(params, x),
        period=math.pi,
        bc=flavor,
        grid_size=grid_size,
    )


def _raw_problem(params: TorusParams, l: int, flavor: str, grid_size: int) -> sl.SLProblem:
    # both flavors, regardless of parity: the full 2*pi-periodic l-problem
    two_l2 = 2.0 * l * l
    return sl.SLProblem(
        p=lambda x: sigma(params, x),
        q=lambda x: two_l2 / sigma(params, x),
        r=lambda x: rho(params, x) / sigma(params, x),
        period=math.pi, bc=flavor, grid_size=grid_size,
    )


@dataclass
class Mode:
    """One eigenpair of an l-problem, with zeros counted on [0, 2*pi)."""

    value: float
    error: float
    flavor: str
    zeros: int
    spectrum: sl.SLSpectrum = field(repr=False)
    position: int = field(repr=False)

    @property
    def vector(self) -> np.ndarray:
        return self.spectrum.eigenvectors[:, self.position]


def flavor_spectrum(params: TorusParams, l: int, flavor: str, count: int = 6,
                    grid_size: int = DEFAULT_GRID, target_tol: float = 1e-8) -> sl.SLSpectrum:
    return sl.refine(_raw_problem(params, l, flavor, grid_size), count, target_tol)


def merged_spectrum(params: TorusParams, l: int, count: int = 6, flavors=None,
                    grid_size: int = DEFAULT_GRID, target_tol: float = 1e-8) -> list[Mode]:
    """Ascending modes of the l-problem built from the requested pi-flavors.

    With ``flavors=None`` both flavors are merged, giving the 2*pi-periodic
    spectrum (the indexing lam_k(l) used throughout). ``count`` is per flavor.
    """
    flavors = (PERIODIC, ANTIPERIODIC) if flavors is None else tuple(flavors)
    modes = []
    for fl in flavors:
        spec = flavor_spectrum(params, l, fl, count, grid_size, target_tol)
        for k, v in enumerate(spec.eigenvalues):
            modes.append(Mode(float(v), float(spec.errors[k]), fl, 2 * spec.zero_counts[k], spec, k))
    # ties broken by flavor so the order is deterministic
    modes.sort(key=lambda md: (md.value, md.flavor))
    return modes


def _modes_reaching(params, l, flavors, bound, grid_size, target_tol, count=8):
    while True:
        modes = merged_spectrum(params, l, count, flavors, grid_size, target_tol)
        # every flavor's largest computed value must clear the bound
        tops = {}
        for md in modes:
            tops[md.flavor] = max(tops.get(md.flavor, -np.inf), md.value)
        if all(t > bound for t in tops.values()):
            return modes
        count *= 2
        if count > grid_size // 8:
            raise sl.SolverError(f"could not bracket eigenvalues up to {bound} for l={l}")


class ClassificationError(sl.SolverError):
    """An eigenvalue sits too close to a band edge for its error estimate."""


@dataclass
class LCount:
    l: int
    weight: int
    below: list[float]
    at_two: list[float]

    @property
    def contribution(self) -> int:
        return self.weight * len(self.below)


@dataclass
class EigenvalueCount:
    params: TorusParams
    n_two: int
    per_l: list[LCount]
    tol: float

    @property
    def multiplicity_at_two(self) -> int:
        return sum(e.weight * len(e.at_two) for e in self.per_l)


def count_below_two(params: TorusParams, tol: float = DEFAULT_TOL, grid_size: int = DEFAULT_GRID,
                    l_limit: int = 200) -> EigenvalueCount:
    """Weighted count N(2) of Laplacian eigenvalues strictly below 2.

    For each l the admitted spectrum is classified as below ``2 - tol``, inside
    ``[2 - tol, 2 + tol]`` or above. The loop stops at the first l whose ground
    state exceeds ``2 + tol``; eigenvalues increase with l, so nothing later
    can contribute.
    """
    if not (1e-10 <= tol <= 1e-4):
        raise ValueError("tol must lie in [1e-10, 1e-4]")
    target_tol = min(1e-8, tol / 10)
    per_l = []
    total = 0
    for l in range(l_limit + 1):
        flavors = admitted_flavors(params, l)
        modes = _modes_reaching(params, l, flavors, TARGET + tol, grid_size, target_tol)
        below, at = [], []
        for md in modes:
            for edge in (TARGET - tol, TARGET + tol):
                if abs(md.value - edge) <= md.error:
                    raise ClassificationError(
                        f"l={l}: eigenvalue {md.value:.12g} (error {md.error:.1e}) straddles band edge {edge}"
                    )
            if md.value < TARGET - tol:
                below.append(md.value)
            elif md.value <= TARGET + tol:
                at.append(md.value)
        entry = LCount(l=l, weight=1 if l == 0 else 2, below=below, at_two=at)
        per_l.append(entry)
        total += entry.contribution
        # ground state of the full 2*pi problem is the periodic-flavor ground state
        if PERIODIC in flavors:
            ground = modes[0].value
        else:
            ground = flavor_spectrum(params, l, PERIODIC, 1, grid_size, target_tol).eigenvalues[0]
        if ground > TARGET + tol:
            return EigenvalueCount(params=params, n_two=total, per_l=per_l, tol=tol)
    raise sl.SolverError(f"no l <= {l_limit} with ground state above 2")


def eigenvalue_two_multiplicity(params: TorusParams, tol: float = DEFAULT_TOL,
                                grid_size: int = DEFAULT_GRID) -> int:
    return count_below_two(params, tol, grid_size).multiplicity_at_two


@dataclass
class ProfileMatch:
    l: int
    label: str
    value: float
    merged_index: int
    correlation: float
    zeros: int
    ok: bool


def profile_correlation(modes: list[Mode], cluster: list[int], profile) -> float:
    """Norm of the r-weighted projection of ``profile`` onto the cluster eigenspace.

    Works for degenerate clusters, where the individual eigenvectors are an
    arbitrary basis of the eigenspace.
    """
    spec0 = modes[cluster[0]].spectrum
    x = spec0.grid
    f = profile(x)
    dx = x[1] - x[0]
    fnorm2 = float(np.sum(spec0.weight * f * f) * dx)
    proj2 = 0.0
    for i in cluster:
        md = modes[i]
        if md.spectrum.grid_size != spec0.grid_size:
            continue
        proj2 += md.spectrum.inner(f, md.position) ** 2
    return math.sqrt(proj2 / fnorm2)


def coordinate_eigen_check(params: TorusParams, tol: float = DEFAULT_TOL,
                           grid_size: int = DEFAULT_GRID) -> list[ProfileMatch]:
    """Check that each coordinate profile is an eigenfunction with eigenvalue 2."""
    labels = ["sin", "cos", "ground"]
    out = []
    for label, (profile, l) in zip(labels, coordinate_profiles(params)):
        modes = merged_spectrum(params, l, 6, None, grid_size)
        values = [md.value for md in modes]
        idx = int(np.argmin([abs(v - TARGET) for v in values]))
        cluster = [i for i, v in enumerate(values) if abs(v - values[idx]) < sl.CLUSTER_TOL]
        # profile lives in one flavor; project onto that flavor's part of the cluster
        corr = max(
            profile_correlation(modes, [i for i in cluster if modes[i].flavor == fl], profile)
            for fl in {modes[i].flavor for i in cluster}
        )
        ok = abs(values[idx] - TARGET) < tol and corr > 1 - 1e-6
        out.append(ProfileMatch(l=l, label=label, value=values[idx], merged_index=idx,
                                correlation=corr, zeros=modes[idx].zeros, ok=ok))
    return out


def lambda_k(params: TorusParams, k: int, l: int, grid_size: int = DEFAULT_GRID) -> float:
    """k-th eigenvalue (0-based) of the 2*pi-periodic l-problem."""
    count = k // 2 + 2
    return merged_spectrum(params, l, count, None, grid_size)[k].value
