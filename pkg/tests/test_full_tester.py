import numpy as np
import pytest

from junta_probe.core import BooleanOracle, all_points, low_degree_influence, wht
from junta_probe.full_tester import maximum_correlation_junta, tolerant_test
from junta_probe.functions import (
    constant_oracle,
    dictator_oracle,
    majority_oracle,
    parity_oracle,
)
from junta_probe.ground_truth import exact_avg
from junta_probe.oracle_builder import desk_config

CFG = desk_config(t_override=6, m_override=12)


class TestMaximumCorrelationJunta:
    def test_dictator(self):
        rng = np.random.default_rng(0)
        f = dictator_oracle(32, 4)
        out = maximum_correlation_junta(f, 1, 0.2, rng, config=CFG)
        assert 0.8 <= out.corr_hat <= 1.05
        assert out.query_total == f.query_count
        assert out.params_realized["tau"] == pytest.approx(0.05)

    def test_maj3_embedded(self):
        rng = np.random.default_rng(1)
        f = majority_oracle(16, coords=(0, 1, 2))
        out = maximum_correlation_junta(f, 1, 0.2, rng, config=CFG)
        assert 0.3 <= out.corr_hat <= 0.7

    def test_constant_falls_back_to_mean(self):
        rng = np.random.default_rng(2)
        f = constant_oracle(16, -1)
        out = maximum_correlation_junta(f, 2, 0.2, rng, config=CFG)
        assert out.corr_hat == pytest.approx(1.0, abs=0.06)
        assert out.params_realized["oracle_count"] == 0
        np.testing.assert_array_equal(out.h, -np.ones(4))

    def test_parameter_validation(self):
        f = dictator_oracle(8, 0)
        rng = np.random.default_rng(0)
        with pytest.raises(ValueError):
            maximum_correlation_junta(f, 0, 0.2, rng, config=CFG)
        with pytest.raises(ValueError):
            maximum_correlation_junta(f, 1, 1.5, rng, config=CFG)


class TestTolerantTest:
    def test_accepts_dictator(self):
        rng = np.random.default_rng(3)
        f = dictator_oracle(16, 0)
        res = tolerant_test(f, 1, 0.3, 0.1, rng, config=CFG)
        assert res.threshold == pytest.approx(0.6)
        assert res.accepted

    def test_rejects_wide_parity(self):
        # a parity on 5 coordinates is at distance 1/2 from every 1-junta
        rng = np.random.default_rng(4)
        f = parity_oracle(16, [0, 1, 2, 3, 4])
        res = tolerant_test(f, 1, 0.3, 0.1, rng, config=CFG)
        assert not res.accepted

    def test_parameter_order(self):
        f = dictator_oracle(8, 0)
        with pytest.raises(ValueError):
            tolerant_test(f, 1, 0.1, 0.3, np.random.default_rng(0), config=CFG)
        with pytest.raises(ValueError):
            tolerant_test(f, 1, 0.6, 0.1, np.random.default_rng(0), config=CFG)


class TestVariablePruning:
    def test_averaging_bound_exhaustive(self):
        # dropping variable j from a k-junta and averaging moves the
        # correlation with f by at most sqrt of f's degree-k influence of j
        rng = np.random.default_rng(5)
        n, k = 6, 3
        pts = all_points(n)
        for _ in range(30):
            f_table = (rng.integers(0, 2, 1 << n) * 2 - 1).astype(np.float64)
            g_sub = (rng.integers(0, 2, 1 << k) * 2 - 1).astype(np.float64)
            spec = wht(f_table)
            sub_idx = sum(
                ((pts[:, j] < 0).astype(np.int64) << j) for j in range(k)
            )
            g_vals = g_sub[sub_idx]
            base = float(np.mean(f_table * g_vals))
            for j in range(k):
                avg = exact_avg(g_sub, [c for c in range(k) if c != j])
                rest_idx = np.zeros(1 << n, dtype=np.int64)
                r = 0
                for c in range(k):
                    if c == j:
                        continue
                    rest_idx |= (pts[:, c] < 0).astype(np.int64) << r
                    r += 1
                dropped = float(np.mean(f_table * avg[rest_idx]))
                bound = np.sqrt(low_degree_influence(spec, j, k)) + 1e-12
                assert abs(dropped - base) <= bound
