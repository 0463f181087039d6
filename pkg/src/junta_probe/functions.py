"""Test-instance generators: dictators, parities, majorities, noisy juntas.

Each family comes as a truth table (exact, n capped) and/or as an analytic
oracle usable at large n.
"""

from __future__ import annotations

import numpy as np

from .core import BooleanOracle, all_points, points_to_indices


def dictator_table(n, i=0):
    return all_points(n)[:, i].copy()


def parity_table(n, coords):
    return all_points(n)[:, list(coords)].prod(axis=1).astype(np.int8)


def majority_table(n, coords=(0, 1, 2)):
    pts = all_points(n)
    return np.sign(pts[:, list(coords)].sum(axis=1)).astype(np.int8)


def constant_table(n, sign=1):
    return np.full(1 << n, sign, dtype=np.int8)


def dictator_oracle(n, i=0):
    return BooleanOracle(lambda pts: pts[:, i].copy(), n)


def parity_oracle(n, coords):
    coords = list(coords)
    return BooleanOracle(lambda pts: pts[:, coords].prod(axis=1).astype(np.int8), n)


def majority_oracle(n, coords=(0, 1, 2)):
    coords = list(coords)
    return BooleanOracle(
        lambda pts: np.sign(pts[:, coords].sum(axis=1)).astype(np.int8), n
    )


def constant_oracle(n, sign=1):
    return BooleanOracle(lambda pts: np.full(pts.shape[0], sign, dtype=np.int8), n)


def noisy_junta_table(n, k_true, noise, rng):
    """A random k_true-junta with each output flipped independently w.p. noise.

    Returns (table, info) where info records the planted coordinates, the
    clean table and the realized flip fraction.
    """
    coords = np.sort(rng.choice(n, size=k_true, replace=False))
    base = (rng.integers(0, 2, size=1 << k_true, dtype=np.int8) << 1) - 1
    pts = all_points(n)
    sub_idx = points_to_indices(pts[:, coords])
    clean = base[sub_idx]
    flips = rng.random(1 << n) < noise
    table = np.where(flips, -clean, clean).astype(np.int8)
    info = {
        "planted_coords": [int(c) for c in coords],
        "clean_table": clean,
        "flip_fraction": float(flips.mean()),
    }
    return table, info
