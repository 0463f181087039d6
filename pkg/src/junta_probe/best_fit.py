"""Best k-junta fit over a coordinate-oracle set.

One shared Poissonized uniform sample is bucketed by the sign pattern of
each size-k subset of oracles; bucket sums of f divided by the fixed
divisor M = N 2^{-k} (never the realized bucket size) give unbiased
conditional-mean estimates, and the best subset is the argmax of the
averaged absolute bucket means.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import points_to_indices, random_points


@dataclass
class BucketTable:
    """Per-bucket f sums for one subset of oracle indices.

    ``sums[y]`` is the sum of f over sample points whose oracle sign
    pattern has index y (bit r set iff the r-th chosen oracle returned -1);
    ``counts`` records realized bucket sizes, whose total is the Poisson
    draw; ``divisor`` is the fixed M.
    """

    subset: tuple
    sums: np.ndarray
    counts: np.ndarray
    divisor: float

    @property
    def estimates(self):
        return self.sums / self.divisor

    @property
    def corr_estimate(self):
        return float(np.abs(self.estimates).mean())

    @property
    def h(self):
        return np.where(self.estimates >= 0, 1, -1).astype(np.int8)


@dataclass
class BestFitResult:
    corr_estimate: float
    h: np.ndarray  # ±1 table over the sign patterns of the chosen oracles
    chosen: tuple  # indices into the oracle set, not into [n]
    num_samples: int = 0
    sample_target: int = 0


def sample_count(k, num_oracles, epsilon, delta):
    return math.ceil(2**k * epsilon**-2 * 4 * (num_oracles + math.log(1.0 / delta) + k**2))


def bucket_table(f_values, sign_matrix, subset, divisor):
    idx = points_to_indices(sign_matrix[:, list(subset)])
    size = 1 << len(subset)
    sums = np.bincount(idx, weights=f_values, minlength=size)
    counts = np.bincount(idx, minlength=size)
    return BucketTable(tuple(subset), sums, counts, divisor)


def find_best_fit(f, oracle_set, k, epsilon, delta, rng):
    """Poisson-sampled bucket averaging over all size-k oracle subsets.

    With probability 1 - delta the returned estimate is within epsilon of
    the maximum correlation over juntas on the oracles' coordinates and the
    returned sign table realizes it up to epsilon.
    """
    R = len(oracle_set)
    if R < k:
        raise ValueError(f"need at least k={k} oracles, got {R}")
    if not (0.0 < epsilon < 1.0 and 0.0 < delta < 1.0):
        raise ValueError("epsilon and delta must lie in (0, 1)")
    n = f.dimension
    N = sample_count(k, R, epsilon, delta)
    N_prime = int(rng.poisson(N))
    divisor = N * 2.0**-k

    pts = random_points(rng, N_prime, n)
    f_values = f(pts).astype(np.float64)
    sign_matrix = oracle_set.evaluate_all(pts)

    best = None
    for subset in combinations(range(R), k):
        table = bucket_table(f_values, sign_matrix, subset, divisor)
        value = table.corr_estimate
        if best is None or value > best.corr_estimate + 1e-15:
            best = BestFitResult(value, table.h, table.subset, N_prime, N)
    return best
