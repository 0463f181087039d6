"""Exhaustive brute-force oracles for every quantity the testers estimate.

Everything here is exact and O(2^n)-ish; a work cap keeps accidental large
enumerations from hanging CI.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb

import numpy as np

from .core import FourierSpectrum, WorkBudgetError, inverse_wht, wht, _subset_products

DEFAULT_WORK_CAP = 1 << 30


@dataclass
class ExactJuntaMax:
    value: float
    best_subset: tuple
    best_h: np.ndarray  # ±1 table over {-1,1}^k, sub-table index convention


def exact_avg(f_table, subset):
    """Exact conditional means E[f | coords in subset], as a table over the subset.

    Sub-table index bit r corresponds to the r-th smallest coordinate of
    ``subset``, with the same bit convention as full tables.
    """
    table = np.asarray(f_table, dtype=np.float64)
    n = table.size.bit_length() - 1
    subset = sorted(subset)
    arr = table.reshape([2] * n)  # axis a <-> coordinate n-1-a
    drop = tuple(n - 1 - j for j in range(n) if j not in subset)
    if drop:
        arr = arr.mean(axis=drop)
    return arr.reshape(-1)


def exact_avg_lifted(f_table, subset):
    """Conditional means as a full-size table: value at x is E[f | x_subset]."""
    table = np.asarray(f_table, dtype=np.float64)
    n = table.size.bit_length() - 1
    subset = sorted(subset)
    avg = exact_avg(table, subset)
    if not subset:
        return np.full(table.size, avg[0])
    idx = np.arange(table.size)
    sub_idx = np.zeros(table.size, dtype=np.int64)
    for r, j in enumerate(subset):
        sub_idx |= ((idx >> j) & 1) << r
    return avg[sub_idx]


def exact_max_junta_corr(f_table, k, work_cap=DEFAULT_WORK_CAP, coords=None):
    """max over k-juntas of E[f·g], by enumerating all size-k coordinate sets.

    For each subset T the best junta on T is sign(f_avg,T), with value
    E[|f_avg,T|]; ties between subsets break lexicographically.  ``coords``
    restricts the candidate subsets to a coordinate pool (default all of [n]).
    """
    table = np.asarray(f_table, dtype=np.float64)
    n = table.size.bit_length() - 1
    pool = sorted(range(n)) if coords is None else sorted(coords)
    if k >= len(pool):
        k = len(pool)
    work = comb(len(pool), k) * table.size
    if work > work_cap:
        raise WorkBudgetError(
            f"junta enumeration needs ~{work} ops > cap {work_cap}",
            counts={"subsets": comb(len(pool), k), "table": table.size},
        )
    best = None
    for subset in combinations(pool, k):
        avg = exact_avg(table, subset)
        value = float(np.abs(avg).mean())
        if best is None or value > best.value + 1e-15:
            h = np.where(avg >= 0, 1, -1).astype(np.int8)
            best = ExactJuntaMax(value, subset, h)
    return best


def exact_distance_to_juntas(f_table, k, work_cap=DEFAULT_WORK_CAP):
    """min over k-juntas g of dist(f, g); uses dist = (1 - corr)/2 for ±1 f."""
    return (1.0 - exact_max_junta_corr(f_table, k, work_cap).value) / 2.0


def exact_cube_noise(f_table, eta):
    """The cube-and-noise operator's exact value table, from the spectrum."""
    spec = wht(f_table)
    eta = np.asarray(eta, dtype=np.float64)
    w = _subset_products(eta)
    return inverse_wht(FourierSpectrum(spec.n, spec.coeffs**3 * w))


def exact_cube_noise_by_enumeration(f_table, eta):
    """Same quantity straight from the defining triple expectation.

    Independent of the Fourier route; O(8^n), so keep n small.
    """
    table = np.asarray(f_table, dtype=np.float64)
    n = table.size.bit_length() - 1
    size = table.size
    eta = np.asarray(eta, dtype=np.float64)

    # weight of each noise draw z under the product measure with means eta;
    # index bit i = 1 means z_i = -1
    probs = np.ones(size)
    for i in range(n):
        bit = ((np.arange(size) >> i) & 1) == 1
        probs *= np.where(bit, (1.0 - eta[i]) / 2.0, (1.0 + eta[i]) / 2.0)

    idx = np.arange(size)
    # noise-averaged function G(w) = E_z[f(w·z)]; w·z has index w XOR z
    g = np.array([np.dot(probs, table[idx ^ w]) for w in range(size)])

    out = np.empty(size)
    for x in range(size):
        acc = 0.0
        for y1 in range(size):
            acc += table[y1] * np.dot(table, g[(x ^ y1) ^ idx])
        out[x] = acc / size**2
    return out
