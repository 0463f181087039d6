"""Boolean-function substrate shared by all testers.

Functions live on {-1,+1}^n.  Points are int8 numpy arrays of signs; all
oracles are batch-first: they take an (m, n) array of points and return a
length-m array, incrementing their query counter by m.  Exact machinery
(truth tables, spectra) is only available up to a configurable dimension
cap; the oracles themselves carry no cap.
"""

from __future__ import annotations

import math
import struct
from dataclasses import dataclass, field

import numpy as np

DEFAULT_N_CAP = 20

TABLE_MAGIC = b"BFN1"


class CapacityError(Exception):
    """Exact machinery asked to materialize more than the dimension cap allows."""


class WorkBudgetError(Exception):
    """Derived loop counts exceed the configured work budget."""

    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = dict(counts or {})


class LivenessError(Exception):
    """A rejection-sampling loop exceeded its proposal cap."""


def random_points(rng, m, n):
    """m uniform points of {-1,+1}^n as an (m, n) int8 array."""
    return (rng.integers(0, 2, size=(m, n), dtype=np.int8) << 1) - 1


def _as_points(points):
    pts = np.asarray(points, dtype=np.int8)
    if pts.ndim == 1:
        pts = pts[None, :]
    return pts


class BooleanOracle:
    """Black-box ±1-valued function with a monotone query counter.

    ``fn`` receives an (m, n) int8 array and must return a length-m ±1
    array.  The counter is a plain int; under CPython's GIL increments from
    parallel estimation workers do not interleave mid-update.
    """

    def __init__(self, fn, dimension):
        self._fn = fn
        self.dimension = int(dimension)
        self.query_count = 0

    def __call__(self, points):
        pts = _as_points(points)
        if pts.shape[1] != self.dimension:
            raise ValueError(
                f"point dimension {pts.shape[1]} != oracle dimension {self.dimension}"
            )
        self.query_count += pts.shape[0]
        return np.asarray(self._fn(pts), dtype=np.int8)

    @classmethod
    def from_table(cls, table):
        """Oracle backed by a ±1 truth table (index bit i = 0 means x_i = +1)."""
        table = np.asarray(table)
        n = _log2_exact(table.size)

        def fn(pts):
            return table[points_to_indices(pts)].astype(np.int8)

        return cls(fn, n)


class RealOracle:
    """[-1,1]-valued, possibly randomized evaluator with declared accuracy.

    Each call is accurate to within ``gamma`` with probability at least
    ``1 - delta``; ``query_cost`` is the number of underlying Boolean
    queries per evaluation (0 for exact stand-ins used in tests).
    """

    def __init__(self, fn, dimension, gamma=0.0, delta=0.0, query_cost=0):
        self._fn = fn
        self.dimension = int(dimension)
        self.gamma = float(gamma)
        self.delta = float(delta)
        self.query_cost = int(query_cost)
        self.query_count = 0

    def __call__(self, points):
        pts = _as_points(points)
        if pts.shape[1] != self.dimension:
            raise ValueError(
                f"point dimension {pts.shape[1]} != oracle dimension {self.dimension}"
            )
        self.query_count += pts.shape[0]
        return np.asarray(self._fn(pts), dtype=np.float64)


def _log2_exact(size):
    n = int(size).bit_length() - 1
    if 1 << n != size:
        raise ValueError(f"table length {size} is not a power of two")
    return n


def points_to_indices(points):
    """Truth-table indices for sign points: bit i of the index is 0 iff x_i=+1."""
    pts = _as_points(points)
    n = pts.shape[1]
    bits = (pts < 0).astype(np.uint64)
    weights = (np.uint64(1) << np.arange(n, dtype=np.uint64))
    return (bits * weights).sum(axis=1).astype(np.int64)


def indices_to_points(indices, n):
    idx = np.asarray(indices, dtype=np.uint64)
    bits = (idx[:, None] >> np.arange(n, dtype=np.uint64)) & np.uint64(1)
    return np.where(bits == 0, 1, -1).astype(np.int8)


def all_points(n):
    """All 2^n points in truth-table index order."""
    return indices_to_points(np.arange(1 << n, dtype=np.uint64), n)


@dataclass
class FourierSpectrum:
    """Dense spectrum keyed by n-bit subset masks (bit i <-> coordinate i)."""

    n: int
    coeffs: np.ndarray  # length 2^n, coeffs[mask] = f̂(S_mask)

    def __post_init__(self):
        self.coeffs = np.asarray(self.coeffs, dtype=np.float64)
        if self.coeffs.size != 1 << self.n:
            raise ValueError("coefficient array length must be 2^n")

    def coefficient(self, subset):
        return float(self.coeffs[_subset_to_mask(subset)])

    def weight(self):
        return float(np.dot(self.coeffs, self.coeffs))

    def eval_real(self, x):
        """Evaluate the multilinear extension at a real point x in [-1,1]^n."""
        w = _subset_products(np.asarray(x, dtype=np.float64))
        return float(np.dot(self.coeffs, w))

    def to_table(self):
        return inverse_wht(self)


def _subset_to_mask(subset):
    mask = 0
    for i in subset:
        mask |= 1 << i
    return mask


def popcounts(n):
    """popcount of every mask below 2^n, by doubling."""
    out = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        half = 1 << i
        out[half : 2 * half] = out[:half] + 1
    return out


def _subset_products(values):
    """w[mask] = prod_{i in mask} values[i], for all masks."""
    n = values.size
    w = np.ones(1 << n, dtype=np.float64)
    for i in range(n):
        half = 1 << i
        w[half : 2 * half] = w[:half] * values[i]
    return w


def _fwht_inplace(a):
    h = 1
    size = a.size
    while h < size:
        a = a.reshape(-1, 2 * h)
        left = a[:, :h].copy()
        right = a[:, h:]
        a[:, :h] = left + right
        a[:, h:] = left - right
        a = a.reshape(size)
        h *= 2
    return a


def wht(truth_table, n_cap=DEFAULT_N_CAP):
    """Full Fourier spectrum of a real table via the fast transform, O(n·2^n)."""
    table = np.asarray(truth_table, dtype=np.float64).copy()
    n = _log2_exact(table.size)
    if n > n_cap:
        raise CapacityError(f"dimension {n} exceeds exact-machinery cap {n_cap}")
    coeffs = _fwht_inplace(table) / table.size
    return FourierSpectrum(n, coeffs)


def inverse_wht(spec):
    """Truth table of a spectrum; exact inverse of :func:`wht`."""
    return _fwht_inplace(spec.coeffs.copy())


def influence(spec, i):
    """Inf_i = sum of squared coefficients over subsets containing i."""
    masks = np.arange(spec.coeffs.size)
    sel = (masks >> i) & 1 == 1
    c = spec.coeffs[sel]
    return float(np.dot(c, c))


def low_degree_influence(spec, i, k):
    sizes = popcounts(spec.n)
    masks = np.arange(spec.coeffs.size)
    sel = ((masks >> i) & 1 == 1) & (sizes <= k)
    c = spec.coeffs[sel]
    return float(np.dot(c, c))


def total_influence(spec):
    sizes = popcounts(spec.n)
    return float(np.dot(sizes, spec.coeffs**2))


def apply_noise(spec, rho):
    """Noise operator T_rho: coefficient of S scaled by rho^|S|."""
    sizes = popcounts(spec.n)
    return FourierSpectrum(spec.n, spec.coeffs * np.power(float(rho), sizes))


@dataclass
class Restriction:
    """Length-n pattern over {-1, 0, +1}; 0 marks a surviving coordinate."""

    pattern: np.ndarray

    def __post_init__(self):
        self.pattern = np.asarray(self.pattern, dtype=np.int8)

    @property
    def n(self):
        return self.pattern.size

    @property
    def survivors(self):
        return np.flatnonzero(self.pattern == 0)

    def complete(self, x):
        """Embed points on the surviving coordinates into the full cube."""
        pts = _as_points(x)
        full = np.broadcast_to(self.pattern, (pts.shape[0], self.n)).copy()
        full[:, self.survivors] = pts
        return full


def sample_restriction(mu, n, rng):
    """Each coordinate survives w.p. mu, else is fixed to ±1 uniformly."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError("survival probability must lie in [0, 1]")
    pattern = (rng.integers(0, 2, size=n, dtype=np.int8) << 1) - 1
    pattern[rng.random(n) < mu] = 0
    return Restriction(pattern)


def restrict(f, xi):
    """f restricted by xi, as an oracle on the surviving coordinates.

    Each query costs one query to f.
    """
    if xi.n != f.dimension:
        raise ValueError("restriction dimension does not match the oracle")

    def fn(pts):
        return f(xi.complete(pts))

    return BooleanOracle(fn, xi.survivors.size)


def discrete_derivative(spec, i, rho_point):
    """D_i f evaluated at a real point, with the x_i^2 factor set to 1.

    Equals the level-{i} coefficient of f restricted by rho_point when the
    point encodes a restriction pattern ({-1,+1} fixed, 0 = survive).
    """
    rho = np.asarray(rho_point, dtype=np.float64)
    if rho.size != spec.n:
        raise ValueError("point dimension must equal the spectrum dimension")
    w = _subset_products(rho)
    masks = np.arange(spec.coeffs.size)
    with_i = (masks >> i) & 1 == 1
    return float(np.dot(spec.coeffs[with_i], w[masks[with_i] & ~(1 << i)]))


def sample_noisy(x, eta, rng):
    """x with independent multiplicative noise: z_i in ±1, E[z_i] = eta_i."""
    pts = _as_points(x)
    eta = np.asarray(eta, dtype=np.float64)
    if eta.size != pts.shape[1]:
        raise ValueError("noise vector dimension mismatch")
    p_plus = (1.0 + eta) / 2.0
    z = np.where(rng.random(pts.shape) < p_plus, 1, -1).astype(np.int8)
    out = pts * z
    return out[0] if np.asarray(x).ndim == 1 else out


def hoeffding_samples(gamma, delta):
    """Sample count 2·ln(2/δ)/γ² used for every mean estimate in the package."""
    if not (0.0 < gamma < 1.0 and 0.0 < delta < 1.0):
        raise ValueError("gamma and delta must lie in (0, 1)")
    return math.ceil(2.0 * math.log(2.0 / delta) / gamma**2)


def estimate_mean(oracle, gamma, delta, rng, batch=1 << 18):
    """Mean of ``oracle`` over uniform inputs, within gamma w.p. >= 1-delta."""
    m = hoeffding_samples(gamma, delta)
    total = 0.0
    done = 0
    while done < m:
        chunk = min(batch, m - done)
        total += float(np.sum(oracle(random_points(rng, chunk, oracle.dimension))))
        done += chunk
    return total / m


# ---------------------------------------------------------------------------
# serialization

def save_table(path, table):
    """Binary truth-table format: magic "BFN1", u32 n, then 2^n sign bits.

    Bit value 0 encodes +1; bits are packed little-endian.
    """
    table = np.asarray(table)
    n = _log2_exact(table.size)
    bits = (table < 0).astype(np.uint8)
    packed = np.packbits(bits, bitorder="little")
    with open(path, "wb") as fh:
        fh.write(TABLE_MAGIC)
        fh.write(struct.pack("<I", n))
        fh.write(packed.tobytes())


def load_table(path):
    with open(path, "rb") as fh:
        magic = fh.read(4)
        if magic != TABLE_MAGIC:
            raise ValueError(f"bad magic {magic!r}; expected {TABLE_MAGIC!r}")
        (n,) = struct.unpack("<I", fh.read(4))
        packed = np.frombuffer(fh.read(), dtype=np.uint8)
    bits = np.unpackbits(packed, count=1 << n, bitorder="little")
    return np.where(bits == 0, 1, -1).astype(np.int8)


def spectrum_to_csv(spec, path):
    """Export as `mask,coefficient` rows."""
    with open(path, "w") as fh:
        fh.write("mask,coefficient\n")
        for mask, c in enumerate(spec.coeffs):
            fh.write(f"{mask},{c!r}\n")
