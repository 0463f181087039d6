import numpy as np
import pytest
from itertools import combinations

from junta_probe.core import WorkBudgetError, all_points, points_to_indices
from junta_probe.functions import (
    constant_table,
    dictator_table,
    majority_table,
    parity_table,
)
from junta_probe.ground_truth import (
    exact_avg,
    exact_distance_to_juntas,
    exact_cube_noise,
    exact_cube_noise_by_enumeration,
    exact_max_junta_corr,
)

MAJ3 = majority_table(3)


class TestExactAvg:
    def test_dictator(self):
        np.testing.assert_allclose(exact_avg(dictator_table(3, 0), [0]), [1.0, -1.0])

    def test_parity_averages_out(self):
        np.testing.assert_allclose(exact_avg(parity_table(3, [0, 1]), [0]), [0.0, 0.0])

    def test_maj3_pair(self):
        # index bit 0 <-> coord 0, bit 1 <-> coord 1; bit set means -1
        avg = exact_avg(MAJ3, [0, 1])
        np.testing.assert_allclose(avg, [1.0, 0.0, 0.0, -1.0])


class TestExactMaxJuntaCorr:
    def test_maj3_k1(self):
        best = exact_max_junta_corr(MAJ3, 1)
        assert best.value == pytest.approx(0.5)
        assert best.best_subset == (0,)

    def test_maj3_k3(self):
        best = exact_max_junta_corr(MAJ3, 3)
        assert best.value == pytest.approx(1.0)
        np.testing.assert_array_equal(best.best_h, MAJ3)

    def test_maj3_k2(self):
        assert exact_max_junta_corr(MAJ3, 2).value == pytest.approx(0.5)

    def test_work_cap(self):
        with pytest.raises(WorkBudgetError):
            exact_max_junta_corr(np.ones(1 << 10), 5, work_cap=100)

    def test_monotone_in_k(self):
        rng = np.random.default_rng(5)
        table = (rng.integers(0, 2, 1 << 6) * 2 - 1).astype(np.int8)
        values = [exact_max_junta_corr(table, k).value for k in range(0, 7)]
        assert all(a <= b + 1e-12 for a, b in zip(values, values[1:]))
        assert values[-1] == pytest.approx(1.0)

    def test_sign_rounding_identity(self):
        # E[f·sign(f_avg,T)] == E[|f_avg,T|] for every subset
        rng = np.random.default_rng(6)
        n = 5
        table = (rng.integers(0, 2, 1 << n) * 2 - 1).astype(np.int8)
        pts = all_points(n)
        for k in range(1, n + 1):
            for subset in combinations(range(n), k):
                avg = exact_avg(table, subset)
                h = np.where(avg >= 0, 1, -1)
                sub_idx = points_to_indices(pts[:, list(subset)])
                corr = float(np.mean(table * h[sub_idx]))
                assert corr == pytest.approx(float(np.abs(avg).mean()), abs=1e-12)


class TestExactDistance:
    def test_dictator(self):
        assert exact_distance_to_juntas(dictator_table(3, 0), 1) == pytest.approx(0.0)

    def test_parity_pair(self):
        # max corr of χ_{12} with any 1-junta is 0, exhaustively
        assert exact_distance_to_juntas(parity_table(4, [0, 1]), 1) == pytest.approx(0.5)

    def test_maj3(self):
        assert exact_distance_to_juntas(MAJ3, 1) == pytest.approx(0.25)


class TestExactCubeNoise:
    def test_dictator(self):
        alpha = 0.25
        eta = np.array([alpha, 0.0, 0.0])
        table = exact_cube_noise(dictator_table(3, 0), eta)
        np.testing.assert_allclose(table, alpha * all_points(3)[:, 0], atol=1e-12)

    def test_constant_minus_one(self):
        table = exact_cube_noise(constant_table(3, -1), np.zeros(3))
        np.testing.assert_allclose(table, -np.ones(8))

    def test_maj3(self):
        alpha = 0.3
        pts = all_points(3).astype(float)
        expected = 0.125 * alpha * pts.sum(axis=1) - 0.125 * alpha**3 * pts.prod(axis=1)
        np.testing.assert_allclose(exact_cube_noise(MAJ3, np.full(3, alpha)), expected, atol=1e-12)

    @pytest.mark.parametrize("n,seed", [(2, 0), (3, 1), (4, 2)])
    def test_matches_triple_expectation(self, n, seed):
        rng = np.random.default_rng(seed)
        table = (rng.integers(0, 2, 1 << n) * 2 - 1).astype(np.int8)
        eta = rng.uniform(-1, 1, n)
        np.testing.assert_allclose(
            exact_cube_noise(table, eta),
            exact_cube_noise_by_enumeration(table, eta),
            atol=1e-9,
        )
