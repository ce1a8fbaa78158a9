import math

import numpy as np
import pytest

from torispec import elliptic, lame
from torispec.geometry import TorusParams, coprime_pairs

K_GRID = [round(0.05 * j, 2) for j in range(1, 20)]


class TestParameterMap:
    @pytest.mark.parametrize("params", coprime_pairs(12), ids=lambda p: f"{p.m}_{p.n}")
    def test_coordinate_triple(self, params):
        k2 = elliptic.modulus(params) ** 2
        hs = [lame.to_lame(params, l, 2.0) for l in (params.m + params.n, params.m, params.n)]
        assert all(h.nu == 1.0 for h in hs)
        got = [h.h for h in hs]
        assert np.allclose(got, [k2, 1.0, 1.0 + k2], atol=1e-8, rtol=0), f"{got}"
        assert all(abs(h.k2 - k2) < 1e-15 for h in hs)

    @pytest.mark.parametrize("m,n", [(2, 1), (3, 2), (4, 1)])
    def test_triple_in_spectrum(self, m, n):
        k = elliptic.modulus(TorusParams(m, n))
        low = [lv.h for lv in lame.lame_spectrum(k, 5)[:3]]
        assert np.allclose(low, [k * k, 1.0, 1.0 + k * k], atol=1e-8, rtol=0), f"{low}"

    def test_negative_lambda_rejected(self):
        with pytest.raises(ValueError):
            lame.to_lame(TorusParams(2, 1), 0, -1.0)


class TestSpectrum:
    def test_free_limit(self):
        # k = 0 reduces to -phi'' = h phi, so h = j^2
        levels = lame.lame_spectrum(0.0, 5)
        assert np.allclose([lv.h for lv in levels], [0, 1, 1, 4, 4], atol=1e-8)
        assert [lv.parity for lv in levels] == ["even", "even", "odd", "odd", "even"]

    def test_coexistence_pair(self):
        # the second pi-periodic pair is exactly degenerate for nu = 1
        levels = lame.lame_spectrum(0.6, 5)
        assert abs(levels[3].h - levels[4].h) < 1e-8
        assert {levels[3].parity, levels[4].parity} == {"even", "odd"}

    @pytest.mark.parametrize("k", [1.0, -0.2])
    def test_modulus_checked(self, k):
        with pytest.raises(ValueError):
            lame.lame_spectrum(k)

    def test_levels_bounds(self):
        with pytest.raises(ValueError):
            lame.lame_spectrum(0.3, 13)


class TestH3:
    def test_free_value(self):
        h3, err = lame.h3_value(0.0)
        assert abs(h3 - 4.0) < 1e-8 and err < 1e-8

    def test_certificate_on_grid(self):
        rep = lame.h3_certificate(K_GRID[::3])
        assert rep.ok and rep.min_margin > 0
        for e in rep.entries:
            assert abs(e.h3 - e.galerkin_h3) < 1e-8, f"k={e.k}: {e.h3} vs Galerkin {e.galerkin_h3}"
            assert abs(e.h3 - e.merged_h3) < 1e-8

    def test_frozen_endpoint(self):
        h3, _ = lame.h3_value(0.95)
        assert h3 == pytest.approx(2.69888531, abs=1e-7)


class TestAuxiliary:
    def test_above_three(self):
        entries = lame.aux_lambda_check([0.01, 0.3, 0.5, 0.7, 0.95])
        for e in entries:
            assert e.margin > 0, f"k={e.k}: lam0={e.lam0}"
            assert abs(e.lam0 - e.galerkin_lam0) < 1e-7

    def test_decreasing_in_k(self):
        a, b = lame.aux_lambda_check([0.3, 0.7])
        assert b.lam0 < a.lam0

    def test_literal_class_bounded_below(self):
        (e,) = lame.aux_lambda_check([0.5])
        assert e.literal_class_inf > 3

    def test_literal_basis_conditions(self):
        y = np.linspace(0, 2 * np.pi, 257)
        for f, df in lame.literal_class_basis(10):
            assert np.max(np.abs(f(y + np.pi) - f(y))) < 1e-12
            assert np.max(np.abs(f(y) + f(np.pi / 2 - y))) < 1e-12
            # derivative column matches a centred difference
            h = 1e-6
            assert np.max(np.abs((f(y + h) - f(y - h)) / (2 * h) - df(y))) < 1e-6

    def test_odd_basis_conditions(self):
        y = np.linspace(0, 2 * np.pi, 257)
        for f, _ in lame.odd_class_basis(6):
            assert np.max(np.abs(f(np.pi - y) + f(y))) < 1e-12
            assert np.max(np.abs(f(-y) + f(y))) < 1e-12


class TestRayleighMonotonicity:
    PAIRS = [(0.2, 0.1), (0.5, 0.3), (0.8, 0.5), (0.95, 0.7), (1.0, 0.9)]

    @pytest.mark.parametrize("k1,k2", PAIRS)
    def test_sin2y_decreases(self, k1, k2):
        f, df = (lambda y: np.sin(2 * y)), (lambda y: 2 * np.cos(2 * y))
        assert lame.aux_rayleigh(k1, f, df) < lame.aux_rayleigh(k2, f, df)

    @pytest.mark.xfail(strict=True, reason="R_k[cos y] rises from 2 at k=0 to 3 at k=1; the "
                                          "monotonicity holds only for particular test functions")
    @pytest.mark.parametrize("k1,k2", PAIRS)
    def test_legendre_p1_decreases(self, k1, k2):
        f, df = np.cos, (lambda y: -np.sin(y))
        assert lame.aux_rayleigh(k1, f, df) < lame.aux_rayleigh(k2, f, df)

    def test_p1_endpoints(self):
        f, df = np.cos, (lambda y: -np.sin(y))
        assert abs(lame.aux_rayleigh(0.0, f, df) - 2.0) < 1e-12
        assert abs(lame.aux_rayleigh(1.0, f, df) - 3.0) < 1e-6


class TestLegendre:
    def test_recurrence_against_numpy(self):
        t = np.linspace(-1, 1, 41)
        P, dP = lame.legendre_table(9, t)
        for d in range(10):
            c = np.zeros(d + 1)
            c[d] = 1
            assert np.allclose(P[d], np.polynomial.legendre.legval(t, c), atol=1e-14)
            assert np.allclose(dP[d], np.polynomial.legendre.legval(t, np.polynomial.legendre.legder(c)), atol=1e-12)

    def test_minimum_is_three(self):
        res = lame.legendre_limit_check(9)
        assert abs(res.minimum - 3.0) < 1e-10
        assert res.off_p1 < 1e-8
        assert abs(res.coefficients[0] - 1.0) < 1e-12

    def test_quotients(self):
        res = lame.legendre_limit_check(9)
        # R_1[P_n] = n(n+1) + 1 for the Legendre polynomials
        for d, q in res.quotients.items():
            assert abs(q - (d * (d + 1) + 1)) < 1e-12, f"P_{d}: {q}"

    def test_small_span(self):
        assert abs(lame.legendre_limit_check(3).minimum - 3.0) < 1e-12

    @pytest.mark.parametrize("deg", [2, 1, 8])
    def test_degree_validation(self, deg):
        with pytest.raises(ValueError):
            lame.legendre_limit_check(deg)
