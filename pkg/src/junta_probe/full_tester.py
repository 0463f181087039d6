"""Maximum-correlation estimation for k-juntas and the tolerant wrapper.

The tester chains the two statistical stages: build a coordinate-oracle
set covering the influential coordinates, then fit the best k-junta over
those oracles.  The tolerant wrapper turns the correlation estimate into
an accept/reject decision via the identity dist = (1 - corr)/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .best_fit import BestFitResult, find_best_fit, sample_count
from .core import estimate_mean
from .oracle_builder import (
    CoordinateOracleSet,
    OracleBuilderConfig,
    construct_coordinate_oracle,
)

MAX_NU = 1 / 8


@dataclass
class TesterOutput:
    corr_hat: float
    h: np.ndarray  # ±1 table over {-1,1}^(chosen size)
    chosen: tuple  # indices into the oracle set
    params_realized: dict = field(default_factory=dict)
    query_total: int = 0
    oracle_set: CoordinateOracleSet | None = None


def maximum_correlation_junta(f, k, epsilon, rng,
                              config: OracleBuilderConfig | None = None):
    """Estimate max over k-juntas of E[f·g] to within epsilon, w.p. >= 2/3.

    The dictator-test parameter nu nominally depends on the best-fit sample
    count, which depends on the realized oracle-set size; construction runs
    with the maximal admissible nu and the nominal value is recorded in the
    realized parameters afterwards.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if k < 1:
        raise ValueError("k must be at least 1")
    tau = epsilon / 4.0
    delta = 1.0 / 3.0
    start = f.query_count

    oracle_set = construct_coordinate_oracle(
        f, k, delta / 4.0, MAX_NU, tau, rng, config
    )
    R = len(oracle_set)
    N = sample_count(k, max(R, 1), epsilon / 4.0, delta / 4.0)
    nu_nominal = min(MAX_NU, delta / (4.0 * N))
    params = {
        "tau": tau,
        "delta": delta,
        "epsilon": epsilon,
        "k": k,
        "oracle_count": R,
        "best_fit_samples": N,
        "nu_construction": MAX_NU,
        "nu_nominal": nu_nominal,
        **{f"construct_{key}": val for key, val in oracle_set.stats.items()},
    }

    if R == 0:
        # no influential coordinates found: the best fit is a constant
        mean = estimate_mean(f, epsilon / 4.0, delta / 4.0, rng)
        sign = 1 if mean >= 0 else -1
        result = BestFitResult(abs(mean), np.full(1 << k, sign, dtype=np.int8), ())
    else:
        k_eff = min(k, R)
        result = find_best_fit(f, oracle_set, k_eff, epsilon / 4.0, delta / 4.0, rng)
        params["k_effective"] = k_eff
        params["best_fit_samples_realized"] = result.num_samples

    return TesterOutput(
        corr_hat=result.corr_estimate,
        h=result.h,
        chosen=result.chosen,
        params_realized=params,
        query_total=f.query_count - start,
        oracle_set=oracle_set,
    )


@dataclass
class TolerantTestResult:
    accepted: bool
    threshold: float
    output: TesterOutput


def tolerant_test(f, k, c_u, c_l, rng, config: OracleBuilderConfig | None = None):
    """Accept iff f is close to a k-junta: dist <= c_l accepts and
    dist >= c_u rejects, each w.p. >= 2/3."""
    if not (0.0 <= c_l < c_u < 0.5):
        raise ValueError("need 0 <= c_l < c_u < 1/2")
    epsilon = (c_u - c_l) / 2.0
    threshold = 1.0 - 2.0 * c_l - 2.0 * epsilon
    assert math.isclose(threshold, 1.0 - 2.0 * c_u + 2.0 * epsilon)
    output = maximum_correlation_junta(f, k, epsilon, rng, config)
    return TolerantTestResult(output.corr_hat >= threshold, threshold, output)
