import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from torispec import sl
from torispec.geometry import TorusParams
from torispec.sl import ANTIPERIODIC, PERIODIC
from torispec.spectrum import build_problem

# exact spectra of -h'' = lam h on [0, 2 pi)
CIRCLE_PERIODIC = [0, 1, 1, 4, 4, 9, 9, 16]
CIRCLE_ANTIPERIODIC = [0.25, 0.25, 2.25, 2.25, 6.25, 6.25, 12.25, 12.25]


class TestConstantCoefficients:
    @pytest.mark.parametrize("bc,expected", [(PERIODIC, CIRCLE_PERIODIC), (ANTIPERIODIC, CIRCLE_ANTIPERIODIC)])
    def test_circle_spectrum(self, bc, expected):
        spec = sl.refine(sl.constant_problem(bc=bc, grid_size=256), 8, target_tol=1e-8)
        err = np.max(np.abs(spec.eigenvalues - expected))
        assert err < 1e-8, f"max deviation {err:.2e}"

    def test_scaled_coefficients(self):
        # -(2 h')' + 3 h = lam 5 h: lam = (2 j^2 + 3) / 5
        spec = sl.refine(sl.constant_problem(grid_size=256, p=2.0, q=3.0, r=5.0), 5)
        expected = [(2 * j * j + 3) / 5 for j in (0, 1, 1, 2, 2)]
        assert np.allclose(spec.eigenvalues, expected, atol=1e-8, rtol=0)

    def test_degenerate_pairs_clustered(self):
        spec = sl.refine(sl.constant_problem(grid_size=256), 7)
        assert sl.clusters(list(spec.eigenvalues)) == [[0], [1, 2], [3, 4], [5, 6]]


class TestDiscretization:
    def test_assemble_rejects_bad_grid(self):
        with pytest.raises(ValueError):
            sl.assemble(sl.constant_problem(grid_size=31))
        with pytest.raises(ValueError):
            sl.assemble(sl.constant_problem(grid_size=16))

    def test_assemble_rejects_non_periodic(self):
        prob = sl.SLProblem(p=lambda x: 1 + 0 * x, q=lambda x: x, r=lambda x: 1 + 0 * x, period=1.0)
        with pytest.raises(ValueError, match="periodic"):
            sl.assemble(prob)

    def test_assemble_rejects_nonpositive_weight(self):
        prob = sl.SLProblem(p=lambda x: 1 + 0 * x, q=lambda x: 0 * x, r=lambda x: np.cos(x), period=2 * np.pi)
        with pytest.raises(ValueError, match="positive"):
            sl.assemble(prob)

    def test_unknown_bc(self):
        with pytest.raises(ValueError):
            sl.constant_problem(bc="dirichlet")

    def test_matrix_symmetric(self):
        pen = sl.assemble(build_problem(TorusParams(2, 1), 1, ANTIPERIODIC, 64))
        assert abs(pen.A - pen.A.T).max() == 0.0

    def test_second_order_convergence(self):
        prob = build_problem(TorusParams(2, 1), 2, PERIODIC)
        ref = sl.solve(prob.with_grid(4096), 4).eigenvalues
        errs = [np.abs(sl.solve(prob.with_grid(n), 4).eigenvalues - ref) for n in (128, 256)]
        ratio = errs[0] / errs[1]
        # the N=4096 reference carries its own h^2 error, well inside the band
        assert np.all((ratio > 3.5) & (ratio < 4.5)), f"ratios {ratio}"

    def test_count_limits(self):
        prob = sl.constant_problem(grid_size=64)
        with pytest.raises(ValueError):
            sl.solve(prob, 17)
        with pytest.raises(ValueError):
            sl.refine(prob, 9)
        with pytest.raises(ValueError):
            sl.refine(prob, 2, target_tol=1e-12)

    def test_refinement_error_carries_achieved(self):
        prob = build_problem(TorusParams(5, 1), 3, ANTIPERIODIC, 64)
        with pytest.raises(sl.RefinementError) as info:
            sl.refine(prob, 6, target_tol=1e-10, max_doublings=0)
        assert info.value.achieved > 1e-10

    def test_deterministic(self):
        prob = build_problem(TorusParams(3, 2), 1, PERIODIC, 256)
        a, b = sl.solve(prob, 6), sl.solve(prob, 6)
        assert np.array_equal(a.eigenvalues, b.eigenvalues)
        assert np.array_equal(a.eigenvectors, b.eigenvectors)

    def test_eigenvector_normalization(self):
        spec = sl.solve(build_problem(TorusParams(3, 1), 1, ANTIPERIODIC, 256), 5)
        dx = spec.grid[1] - spec.grid[0]
        norms = np.sum(spec.weight[:, None] * spec.eigenvectors**2, axis=0) * dx
        assert np.allclose(norms, 1.0, atol=1e-12)
        for k in range(5):
            col = spec.eigenvectors[:, k]
            first = col[np.abs(col) >= 1e-6 * np.abs(col).max()][0]
            assert first > 0


class TestZeroCounting:
    def test_expected_patterns(self):
        assert sl.expected_zero_counts(7, PERIODIC) == [0, 2, 2, 4, 4, 6, 6]
        assert sl.expected_zero_counts(6, ANTIPERIODIC) == [1, 1, 3, 3, 5, 5]

    def test_sine_with_grid_zeros(self):
        x = np.arange(64) * (2 * np.pi / 64)
        assert sl.zero_count(np.sin(3 * x)) == 6
        assert sl.zero_count(np.cos(x / 2)[:64], ANTIPERIODIC) == 1

    def test_zero_vector_rejected(self):
        with pytest.raises(ValueError):
            sl.zero_count(np.zeros(8))

    @pytest.mark.parametrize("params,l", [((2, 1), 0), ((2, 1), 3), ((3, 2), 1), ((4, 1), 6)])
    @pytest.mark.parametrize("bc", [PERIODIC, ANTIPERIODIC])
    def test_first_ten_follow_oscillation_law(self, params, l, bc):
        spec = sl.solve(build_problem(TorusParams(*params), l, bc, 1024), 10)
        assert spec.zero_counts == sl.expected_zero_counts(10, bc), f"{spec.zero_counts}"

    @settings(max_examples=20, deadline=None)
    @given(st.integers(1, 12), st.floats(0, 2 * np.pi / 64))
    def test_shifted_cosine(self, j, phase):
        x = np.arange(128) * (2 * np.pi / 128)
        assert sl.zero_count(np.cos(j * x + phase)) == 2 * j


class TestInterlacing:
    def test_detects_violation(self):
        assert sl.check_interlacing([0, 1, 1, 4, 4]) == []
        assert sl.check_interlacing([0, 0, 1]) != []
        assert sl.check_interlacing([1, 1, 3, 3], ANTIPERIODIC) == []

    @pytest.mark.parametrize("l", [0, 1, 2, 3])
    @pytest.mark.parametrize("bc", [PERIODIC, ANTIPERIODIC])
    def test_torus_problem(self, l, bc):
        spec = sl.refine(build_problem(TorusParams(2, 1), l, bc, 512), 8)
        assert sl.check_interlacing(list(spec.eigenvalues), bc) == []


class TestFloquet:
    def test_constant_discriminant(self):
        prob = sl.constant_problem()
        assert abs(sl.floquet_oracle(prob, 1.0) - 2.0) < 1e-10
        assert abs(sl.floquet_oracle(prob, 0.25) + 2.0) < 1e-10
        # D = 2 cos(2 pi sqrt(lam)) in general
        assert abs(sl.floquet_oracle(prob, 0.5) - 2 * math.cos(2 * math.pi * math.sqrt(0.5))) < 1e-10

    def test_coordinate_eigenvalue(self):
        prob = build_problem(TorusParams(2, 1), 3, PERIODIC)
        assert abs(sl.floquet_oracle(prob, 2.0) - 2.0) < 1e-7

    @pytest.mark.parametrize("l", [0, 3])
    @pytest.mark.parametrize("bc", [PERIODIC, ANTIPERIODIC])
    def test_discriminant_at_extrapolated_values(self, l, bc):
        prob = build_problem(TorusParams(3, 2), l, bc, 1024)
        spec = sl.refine(prob, 6)
        for lam in spec.eigenvalues:
            d = sl.floquet_oracle(prob, lam) - 2 * prob.sign
            assert abs(d) < 1e-6, f"lam={lam}: D mismatch {d:.2e}"

    def test_eigenvalue_locator_double_root(self):
        prob = sl.constant_problem()
        assert abs(sl.floquet_eigenvalue(prob, 1.000001) - 1.0) < 1e-7
