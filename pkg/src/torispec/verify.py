"""Claim-by-claim verification reports for a pair (m, n)."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import elliptic, sl, spectrum
from .geometry import TorusParams

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"

EXCEPTIONAL_ODD = [(3, 1), (5, 1), (5, 3), (7, 1), (7, 3), (7, 5)]
EXCEPTIONAL_EVEN = [(2, 1), (3, 2)]


@dataclass
class Check:
    claim: str
    status: str
    margin: float
    tolerance: float
    detail: str = ""


@dataclass
class VerificationReport:
    params: TorusParams | None
    checks: list[Check] = field(default_factory=list)

    @property
    def overall(self) -> bool:
        return all(c.status == PASS for c in self.checks if c.status != SKIPPED)

    def add(self, claim, ok, margin, tolerance, detail=""):
        self.checks.append(Check(claim, PASS if ok else FAIL, float(margin), float(tolerance), detail))

    def skip(self, claim, detail):
        self.checks.append(Check(claim, SKIPPED, float("nan"), float("nan"), detail))

    def fail(self, claim, detail):
        self.checks.append(Check(claim, FAIL, float("nan"), float("nan"), detail))

    def extend(self, other: "VerificationReport"):
        self.checks.extend(other.checks)
        return self

    def claims(self) -> list[str]:
        return [c.claim for c in self.checks]

    def to_dict(self) -> dict:
        p = self.params
        return {
            "params": None if p is None else {"m": p.m, "n": p.n, "parity": p.parity, "index": p.index},
            "checks": [asdict(c) for c in self.checks],
            "overall": self.overall,
        }


MAIN_CLAIMS = [
    "n_two_formula",
    "lambda0_at_m_plus_n",
    "lambda1_at_m",
    "lambda2_at_n",
    "coordinate_profile_sin",
    "coordinate_profile_cos",
    "coordinate_profile_ground",
    "ground_profile_zero_free",
    "multiplicity_at_two",
    "lambda3_at_zero_above_two",
]


def verify_main_theorem(params: TorusParams, tol: float = 1e-6,
                        grid_size: int = spectrum.DEFAULT_GRID) -> VerificationReport:
    rep = VerificationReport(params)
    m, n = params.m, params.n
    try:
        count = spectrum.count_below_two(params, tol, grid_size)
        rep.add("n_two_formula", count.n_two == params.index, -abs(count.n_two - params.index), 0,
                f"N(2)={count.n_two}, expected {params.index}")
        mult = count.multiplicity_at_two
        rep.add("multiplicity_at_two", mult >= 6, mult - 6, 0, f"weighted multiplicity {mult}")
    except sl.SolverError as exc:
        rep.fail("n_two_formula", f"solver: {exc}")
        rep.fail("multiplicity_at_two", f"solver: {exc}")

    for claim, k, l in (("lambda0_at_m_plus_n", 0, m + n), ("lambda1_at_m", 1, m), ("lambda2_at_n", 2, n)):
        try:
            val = spectrum.lambda_k(params, k, l, grid_size)
            dev = abs(val - 2.0)
            rep.add(claim, dev < tol, tol - dev, tol, f"lambda_{k}({l}) = {val:.15g}")
        except sl.SolverError as exc:
            rep.fail(claim, f"solver: {exc}")

    try:
        matches = spectrum.coordinate_eigen_check(params, tol, grid_size)
        for mt in matches:
            rep.add(f"coordinate_profile_{mt.label}", mt.ok, mt.correlation - (1 - 1e-6), 1e-6,
                    f"l={mt.l}, lambda={mt.value:.15g}, correlation={mt.correlation:.15f}")
        ground = matches[2]
        rep.add("ground_profile_zero_free", ground.zeros == 0, -ground.zeros, 0,
                f"zeros on [0, 2pi): {ground.zeros}")
    except sl.SolverError as exc:
        for label in ("sin", "cos", "ground"):
            rep.fail(f"coordinate_profile_{label}", f"solver: {exc}")
        rep.fail("ground_profile_zero_free", f"solver: {exc}")

    try:
        lam3 = spectrum.lambda_k(params, 3, 0, grid_size)
        rep.add("lambda3_at_zero_above_two", lam3 - 2.0 > 1e-4, lam3 - 2.0, 1e-4, f"lambda_3(0) = {lam3:.15g}")
    except sl.SolverError as exc:
        rep.fail("lambda3_at_zero_above_two", f"solver: {exc}")

    order = {c: i for i, c in enumerate(MAIN_CLAIMS)}
    rep.checks.sort(key=lambda c: order[c.claim])
    return rep


NONMAX_CLAIMS = ["functional_closed_vs_quadrature", "nonmax_margin", "ek_inequality_at_modulus"]


def verify_nonmaximality(params: TorusParams) -> VerificationReport:
    rep = VerificationReport(params)
    fv = elliptic.functional_value(params)
    rep.add("functional_closed_vs_quadrature", fv.rel_err < 1e-8, 1e-8 - fv.rel_err, 1e-8,
            f"Lambda={fv.lambda_closed:.15g}, quadrature={fv.lambda_numeric:.15g}")
    if (params.m, params.n) == (1, 1):
        rep.skip("nonmax_margin", "flat equilateral torus; its metric is maximal for Lambda_1")
    else:
        rep.add("nonmax_margin", fv.nonmax_margin > 0, fv.nonmax_margin, 0,
                f"8pi*{fv.index} - Lambda_{fv.index} = {fv.nonmax_margin:.15g}")
    gap = elliptic.ek_gap(fv.k)
    rep.add("ek_inequality_at_modulus", gap >= -1e-14, gap, 1e-14, f"k={fv.k:.15g}")
    return rep


def reduced_gap(x):
    """4 (1 + x) - pi sqrt(1 + 2x)."""
    return 4.0 * (1.0 + x) - math.pi * np.sqrt(1.0 + 2.0 * x)


def reduced_minimum(points: int = 10_001) -> tuple[float, float]:
    """Minimum of ``reduced_gap`` over [0, 1]: grid search then bounded refinement."""
    xs = np.linspace(0.0, 1.0, points)
    vals = reduced_gap(xs)
    i = int(np.argmin(vals))
    lo, hi = xs[max(i - 1, 0)], xs[min(i + 1, points - 1)]
    res = minimize_scalar(reduced_gap, bounds=(lo, hi), method="bounded", options={"xatol": 1e-14})
    candidates = [(float(vals[i]), float(xs[i])), (float(res.fun), float(res.x))]
    val, x = min(candidates)
    return val, x


def parent_bound(params: TorusParams) -> float:
    """sqrt(m^2+2mn) (1 - 2mn/(m^2+4mn+n^2)) E(k): upper bound on the elliptic bracket."""
    m, n = params.m, params.n
    k = elliptic.modulus(params)
    return math.sqrt(m * m + 2 * m * n) * (1 - 2 * m * n / (m * m + 4 * m * n + n * n)) * elliptic.agm_KE(k).E


def parent_rhs(params: TorusParams) -> float:
    """Right-hand side the bound must not exceed: 2(m+n) - 3 (odd) or 2(m+n) - 3/2 (even)."""
    s = params.m + params.n
    return 2 * s - 3 if params.odd else 2 * s - 1.5


def verify_inequality_chain(m_max: int = 40) -> VerificationReport:
    if m_max > 40 or m_max < 7:
        raise ValueError("m_max must lie in [7, 40]")
    rep = VerificationReport(None)
    fmin, xmin = reduced_minimum()
    for m in range(7, m_max + 1):
        rep.add(f"reduced_inequality_odd_m{m}", fmin >= 6.0 / m, fmin - 6.0 / m, 0.0,
                f"min f = {fmin:.15g} at x = {xmin:.3g}")
    for m in range(4, m_max + 1):
        rep.add(f"reduced_inequality_even_m{m}", fmin >= 3.0 / m, fmin - 3.0 / m, 0.0,
                f"min f = {fmin:.15g}")
    # the reduced route must not be so loose that it also certifies m = 6
    rep.add("reduced_sentinel_m6_fails", fmin < 6.0 / 6, 1.0 - fmin, 0.0, f"min f = {fmin:.15g} < 1")
    tight = fmin - 6.0 / 7
    rep.add("reduced_tightness_m7", 0 <= tight < 0.002, 0.002 - tight, 0.002, f"margin at m=7: {tight:.3e}")
    for m, n in EXCEPTIONAL_ODD + EXCEPTIONAL_EVEN:
        p = TorusParams(m, n)
        lhs, rhs = parent_bound(p), parent_rhs(p)
        fv = elliptic.functional_value(p)
        ok = lhs <= rhs and fv.nonmax_margin > 0
        rep.add(f"exceptional_{m}_{n}", ok, rhs - lhs, 0.0,
                f"bound {lhs:.12g} <= {rhs:g}; 8pi*index - Lambda = {fv.nonmax_margin:.12g}")
    return rep


def full_report(params: TorusParams, tol: float = 1e-6, grid_size: int = spectrum.DEFAULT_GRID) -> VerificationReport:
    return verify_main_theorem(params, tol, grid_size).extend(verify_nonmaximality(params))
