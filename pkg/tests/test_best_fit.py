import numpy as np
import pytest

from junta_probe.best_fit import (
    BucketTable,
    bucket_table,
    find_best_fit,
    sample_count,
)
from junta_probe.core import BooleanOracle, points_to_indices, random_points
from junta_probe.functions import (
    dictator_table,
    majority_oracle,
    parity_table,
)
from junta_probe.ground_truth import exact_avg, exact_max_junta_corr
from junta_probe.oracle_builder import CandidateDictator, CoordinateOracleSet


class TestFindBestFit:
    def test_dictator_identity(self):
        rng = np.random.default_rng(0)
        f = BooleanOracle.from_table(dictator_table(6, 0))
        d = CoordinateOracleSet.exact([0], 6)
        res = find_best_fit(f, d, 1, 0.1, 0.05, rng)
        assert res.corr_estimate == pytest.approx(1.0, abs=0.1)
        np.testing.assert_array_equal(res.h, [1, -1])
        assert res.chosen == (0,)

    def test_maj3_best_one_junta(self):
        # ground truth: best 1-junta correlation of MAJ3 is 0.5
        rng = np.random.default_rng(1)
        f = majority_oracle(8, coords=(0, 1, 2))
        d = CoordinateOracleSet.exact([0, 1, 2], 8)
        res = find_best_fit(f, d, 1, 0.1, 0.05, rng)
        assert 0.4 <= res.corr_estimate <= 0.6

    def test_parity_uncorrelated(self):
        # every 1-junta on {0,1} has zero correlation with the pair parity
        rng = np.random.default_rng(2)
        f = BooleanOracle.from_table(parity_table(4, [0, 1]))
        d = CoordinateOracleSet.exact([0, 1], 4)
        res = find_best_fit(f, d, 1, 0.1, 0.05, rng)
        assert abs(res.corr_estimate) <= 0.1

    def test_requires_enough_oracles(self):
        f = BooleanOracle.from_table(dictator_table(4, 0))
        d = CoordinateOracleSet.exact([0], 4)
        with pytest.raises(ValueError):
            find_best_fit(f, d, 2, 0.1, 0.05, np.random.default_rng(0))

    def test_lex_tie_break(self):
        # duplicated oracle: both singleton subsets achieve 1; lex order wins
        rng = np.random.default_rng(3)
        f = BooleanOracle.from_table(dictator_table(5, 0))
        d = CoordinateOracleSet(
            [CandidateDictator.exact(0, 5), CandidateDictator.exact(0, 5)],
            nu=0.0, k=1,
        )
        res = find_best_fit(f, d, 1, 0.1, 0.05, rng)
        assert res.chosen == (0,)

    def test_sanity_bound(self):
        rng = np.random.default_rng(4)
        for seed in range(5):
            table = (np.random.default_rng(seed).integers(0, 2, 64) * 2 - 1)
            f = BooleanOracle.from_table(table.astype(np.int8))
            d = CoordinateOracleSet.exact(list(range(6)), 6)
            res = find_best_fit(f, d, 2, 0.15, 0.05, rng)
            assert abs(res.corr_estimate) <= 1.15

    def test_matches_ground_truth_exhaustive(self):
        # with exact oracles on every coordinate, the fit should land within
        # epsilon of the exhaustive maximum
        rng = np.random.default_rng(5)
        table = (np.random.default_rng(99).integers(0, 2, 1 << 7) * 2 - 1).astype(np.int8)
        f = BooleanOracle.from_table(table)
        d = CoordinateOracleSet.exact(list(range(7)), 7)
        truth = exact_max_junta_corr(table, 2).value
        res = find_best_fit(f, d, 2, 0.1, 0.02, rng)
        assert res.corr_estimate == pytest.approx(truth, abs=0.1)


class TestBucketTable:
    def test_zero_sign_convention(self):
        t = BucketTable((0,), np.array([0.0, -3.0]), np.array([2, 3]), 1.0)
        np.testing.assert_array_equal(t.h, [1, -1])

    def test_counts_partition_samples(self):
        rng = np.random.default_rng(6)
        pts = random_points(rng, 500, 5)
        signs = pts[:, [1, 3]]
        t = bucket_table(np.ones(500), signs, (0, 1), 125.0)
        assert int(t.counts.sum()) == 500

    def test_unbiased_against_exact_means(self):
        # E[bucket sum / M] equals the exact conditional mean of f on the
        # bucket; Monte-Carlo over repeated Poisson draws, n = 6
        rng = np.random.default_rng(7)
        n, N, reps = 6, 400, 300
        table = (np.random.default_rng(8).integers(0, 2, 1 << n) * 2 - 1).astype(np.int8)
        exact = exact_avg(table, [0, 2])
        divisor = N / 4.0
        acc = np.zeros(4)
        for _ in range(reps):
            m = int(rng.poisson(N))
            pts = random_points(rng, m, n)
            fv = table[points_to_indices(pts)].astype(np.float64)
            acc += bucket_table(fv, pts[:, [0, 2]], (0, 1), divisor).estimates
        acc /= reps
        np.testing.assert_allclose(acc, exact, atol=0.06)


def test_sample_count_formula():
    assert sample_count(2, 5, 0.1, 0.05) == int(
        np.ceil(4 * 100 * 4 * (5 + np.log(20) + 4))
    )
