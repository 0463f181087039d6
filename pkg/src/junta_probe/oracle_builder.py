"""Construction of coordinate-oracle sets.

The pipeline: random restrictions boost an influential coordinate's level-1
coefficient; the cube-and-noise operator with a sparse noise vector then
isolates that coordinate; a dictator test filters the candidates and a
correlation pass removes duplicates.

A candidate's decision value at x depends only on the coordinates where the
noise vector is nonzero (its Fourier expansion is supported on subsets of
that support), so each candidate estimates the operator once per support
assignment and caches the resulting sign table.  All later evaluations are
table lookups and cost no further queries to f.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .core import (
    BooleanOracle,
    WorkBudgetError,
    estimate_mean,
    hoeffding_samples,
    points_to_indices,
    random_points,
    restrict,
    sample_restriction,
)


@dataclass
class OracleBuilderConfig:
    """Tuning knobs; defaults follow the worst-case loop counts, which are
    far too conservative for benign desk-scale instances — override them
    (see :func:`desk_config`)."""

    c_t: float = 4.0  # outer (restriction) loop constant
    c_m: float = 4.0  # inner (noise-draw) loop constant
    c_n: float = 4.0  # dedup sample constant
    cube_noise_accuracy_multiplier: float = 4.0  # scales the derived table accuracy
    dictator_round_constant: float = 4.0
    kappa_override: float | None = None
    eta_alpha_override: float | None = None  # noise magnitude; default kappa^3/16
    eta_p_override: float | None = None  # per-coordinate density; default kappa^6/16
    cube_noise_gamma_override: float | None = None  # fine table accuracy
    t_override: int | None = None
    m_override: int | None = None
    dedup_samples_override: int | None = None
    max_support: int = 4  # candidates with wider noise support are discarded
    screen_factor: float = 1.5  # fine-stage margin screen, in units of gamma
    coarse_ratio: float = 3.0  # coarse table accuracy = ratio * fine accuracy
    table_delta: float = 1e-3  # failure probability per cached table
    nu_round_floor: float = 1 / 256  # round count floor; tables are juntas on <= max_support coords
    max_dictator_rounds: int = 1 << 17
    work_budget: int = 1 << 34  # rough bound on queries charged to f


def desk_config(**overrides):
    """Profile used by the statistical acceptance experiments."""
    cfg = OracleBuilderConfig(
        kappa_override=1.0,
        eta_alpha_override=0.25,
        eta_p_override=1 / 16,
        cube_noise_gamma_override=0.011,
        t_override=20,
        m_override=40,
    )
    return replace(cfg, **overrides)


def sample_eta(kappa, n, rng, alpha=None, p=None):
    """Sparse noise vector: each entry is alpha w.p. p, else 0."""
    if not 0.0 < kappa <= 1.0:
        raise ValueError("kappa must lie in (0, 1]")
    if alpha is None:
        alpha = kappa**3 / 16.0
    if p is None:
        p = kappa**6 / 16.0
    eta = np.zeros(n)
    eta[rng.random(n) < p] = alpha
    return eta


def estimate_cube_noise(f, eta, x, gamma, delta, rng, batch=1 << 18):
    """Monte-Carlo estimate of the cube-and-noise operator at one point.

    Each sample draws y1, y2 uniform and y3 from the eta-product noise and
    costs 3 queries to f.
    """
    values = estimate_cube_noise_table(
        f, eta, gamma, delta, rng, assignments=np.asarray(x, dtype=np.int8)[None, :], batch=batch
    )
    return float(values[0])


def estimate_cube_noise_table(f, eta, gamma, delta, rng, assignments=None, batch=1 << 16):
    """Operator estimates at several points sharing the y1/y2/y3 samples.

    ``assignments``: (r, n) sign array; defaults to all 2^s completions of
    the support of eta (non-support coordinates set to +1, which is
    irrelevant since the value only depends on the support).
    """
    n = f.dimension
    eta = np.asarray(eta, dtype=np.float64)
    if assignments is None:
        support = np.flatnonzero(eta)
        s = support.size
        assignments = np.ones((1 << s, n), dtype=np.int8)
        for r in range(1 << s):
            for b, j in enumerate(support):
                if (r >> b) & 1:
                    assignments[r, j] = -1
    else:
        assignments = np.atleast_2d(np.asarray(assignments, dtype=np.int8))

    m = hoeffding_samples(gamma, delta)
    p_plus = (1.0 + eta) / 2.0
    totals = np.zeros(assignments.shape[0])
    done = 0
    while done < m:
        chunk = min(batch, m - done)
        y1 = random_points(rng, chunk, n)
        y2 = random_points(rng, chunk, n)
        y3 = np.where(rng.random((chunk, n)) < p_plus, 1, -1).astype(np.int8)
        fy1 = f(y1)
        fy2 = f(y2)
        base = y1 * y2 * y3
        pair = fy1.astype(np.float64) * fy2
        for r in range(assignments.shape[0]):
            totals[r] += float(np.dot(pair, f(base * assignments[r])))
        done += chunk
    return totals / m


class CandidateDictator:
    """A candidate coordinate oracle backed by a cached sign table.

    The table holds the sign of (operator estimate - mean^3) for every
    assignment of the support coordinates; evaluation at a full-dimension
    point is a lookup on those coordinates.  With probability at least
    1 - per_call_delta the whole table matches the noiseless signs whenever
    the isolation margin holds, so every call is then correct.
    """

    def __init__(self, support, table, dimension, eta, kappa, per_call_delta,
                 per_call_query_cost, margins=None, restriction=None):
        self.support = np.asarray(support, dtype=np.int64)
        self.table = np.asarray(table, dtype=np.int8)
        self.dimension = int(dimension)
        self.eta = eta
        self.kappa = kappa
        self.per_call_delta = per_call_delta
        self.per_call_query_cost = int(per_call_query_cost)
        self.margins = margins
        self.restriction = restriction
        self.query_count = 0

    def __call__(self, points):
        pts = np.atleast_2d(np.asarray(points, dtype=np.int8))
        self.query_count += pts.shape[0]
        if self.support.size == 0:
            return np.full(pts.shape[0], self.table[0], dtype=np.int8)
        idx = points_to_indices(pts[:, self.support])
        return self.table[idx]

    @property
    def decision_coordinate(self):
        """Original coordinate index i such that the table is ±x_i, else None."""
        s = self.support.size
        idx = np.arange(1 << s)
        for b in range(s):
            coord = np.where((idx >> b) & 1 == 0, 1, -1)
            if np.array_equal(self.table, coord) or np.array_equal(self.table, -coord):
                return int(self.support[b])
        return None

    @property
    def is_signed_dictator(self):
        """True when the cached table is exactly ±(one support coordinate)."""
        return self.decision_coordinate is not None

    @classmethod
    def exact(cls, i, n, sign=1):
        """An exact ±dictator member, for tests and downstream components."""
        table = np.array([sign, -sign], dtype=np.int8)
        return cls([i], table, n, eta=None, kappa=None, per_call_delta=0.0,
                   per_call_query_cost=0)


def make_candidate(f_restricted, eta, kappa, per_call_delta, rng, *,
                   coord_map=None, gamma=None, mean_estimate=None,
                   full_dimension=None, restriction=None):
    """Build a candidate from the restricted function and a noise draw.

    ``coord_map`` maps restricted coordinates back to original indices (the
    survivors of the restriction); the candidate then evaluates on the full
    domain.  The mean estimate may be shared across candidates of the same
    restriction.
    """
    eta = np.asarray(eta, dtype=np.float64)
    support_local = np.flatnonzero(eta)
    s = support_local.size
    if gamma is None:
        alpha = float(eta[support_local].max()) if s else kappa**3 / 16.0
        gamma = alpha * kappa**3 / 16.0
    per_estimate_delta = per_call_delta / (2**s + 1)
    if mean_estimate is None:
        mean_estimate = estimate_mean(f_restricted, gamma, per_estimate_delta, rng)
    start = f_restricted.query_count
    values = estimate_cube_noise_table(f_restricted, eta, gamma, per_estimate_delta, rng)
    build_cost = f_restricted.query_count - start
    diffs = values - mean_estimate**3
    table = np.where(diffs >= 0, 1, -1).astype(np.int8)
    if coord_map is None:
        support = support_local
        dimension = f_restricted.dimension
    else:
        coord_map = np.asarray(coord_map, dtype=np.int64)
        support = coord_map[support_local]
        dimension = full_dimension if full_dimension is not None else f_restricted.dimension
    return CandidateDictator(
        support, table, dimension, eta=eta, kappa=kappa,
        per_call_delta=per_call_delta, per_call_query_cost=build_cost,
        margins=np.abs(diffs), restriction=restriction,
    )


def dictator_test(g, nu, tilde_delta, rng, *, round_constant=4.0,
                  nu_round_floor=1 / 256, max_rounds=1 << 17, batch=4096):
    """Accept iff g looks like a ±dictator.

    Three sub-tests: the affine linearity check g(x)g(y)g(x·y) = g(1), a
    pair test rejecting near-constants, and a small-noise test rejecting
    characters of degree >= 2.  Completeness is statistical (1 - tilde_delta),
    not the probability-1 of an idealized tester.
    """
    if nu > 1 / 8:
        raise ValueError("nu must be at most 1/8")
    if not 0.0 < tilde_delta < 1.0:
        raise ValueError("tilde_delta must lie in (0, 1)")
    n = g.dimension
    nu_eff = max(nu, nu_round_floor)
    log_term = math.log(3.0 / tilde_delta)
    blr_rounds = min(max_rounds, math.ceil(round_constant * log_term / nu_eff))
    # the pair/noise sub-tests compare rates separated by ~1/8, hence the
    # 64x sample scaling over the bare log count
    stat_rounds = min(max_rounds, math.ceil(round_constant * 64.0 * log_term))

    ones = np.ones((1, n), dtype=np.int8)
    g_one = int(g(ones)[0])
    done = 0
    while done < blr_rounds:
        chunk = min(batch, blr_rounds - done)
        x = random_points(rng, chunk, n)
        y = random_points(rng, chunk, n)
        prod = g(x).astype(np.int32) * g(y) * g(x * y)
        if np.any(prod != g_one):
            return False
        done += chunk

    x = random_points(rng, stat_rounds, n)
    y = random_points(rng, stat_rounds, n)
    disagree = float(np.mean(g(x) != g(y)))
    if disagree < 0.25:
        return False

    flip_prob = 1 / 8
    x = random_points(rng, stat_rounds, n)
    flips = rng.random((stat_rounds, n)) < flip_prob
    y = np.where(flips, -x, x).astype(np.int8)
    noise_disagree = float(np.mean(g(x) != g(y)))
    return noise_disagree <= 0.17


@dataclass
class CoordinateOracleSet:
    members: list
    nu: float
    k: int
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.members)

    def evaluate_all(self, points):
        """(m, |members|) sign matrix of every member at every point."""
        pts = np.atleast_2d(np.asarray(points, dtype=np.int8))
        if not self.members:
            return np.zeros((pts.shape[0], 0), dtype=np.int8)
        return np.stack([g(pts) for g in self.members], axis=1)

    @classmethod
    def exact(cls, coords, n, signs=None, nu=0.0, k=None):
        signs = signs if signs is not None else [1] * len(coords)
        members = [CandidateDictator.exact(i, n, s) for i, s in zip(coords, signs)]
        return cls(members, nu=nu, k=k if k is not None else len(coords))


def dedup_members(members, n, delta, rng, num_samples):
    """Keep the first member of each >=1/2-correlated cluster, using one
    shared uniform sample set."""
    if len(members) <= 1:
        return list(members)
    pts = random_points(rng, num_samples, n)
    evals = np.stack([g(pts).astype(np.float64) for g in members], axis=1)
    kept = []
    kept_cols = []
    for j, g in enumerate(members):
        col = evals[:, j]
        if all(abs(float(np.mean(col * kc))) < 0.5 for kc in kept_cols):
            kept.append(g)
            kept_cols.append(col)
    return kept


def construct_coordinate_oracle(f, k, delta, nu, tau, rng,
                                config: OracleBuilderConfig | None = None):
    """Build a nu-oracle set covering the coordinates of f with large
    low-degree influence (threshold tau^2/k^2)."""
    if nu > 1 / 8:
        raise ValueError("nu must be at most 1/8")
    if not (0.0 < tau < 1.0 and 0.0 < delta < 1.0):
        raise ValueError("tau and delta must lie in (0, 1)")
    cfg = config or OracleBuilderConfig()
    n = f.dimension

    kappa = cfg.kappa_override if cfg.kappa_override is not None else tau / (4.0 * k)
    kappa = min(kappa, 1.0)
    alpha = cfg.eta_alpha_override if cfg.eta_alpha_override is not None else kappa**3 / 16.0
    p = cfg.eta_p_override if cfg.eta_p_override is not None else kappa**6 / 16.0

    log_term = math.log(1.0 / delta)
    T = cfg.t_override or math.ceil(cfg.c_t * k**5 * tau**-5 * max(log_term, 1.0))
    M = cfg.m_override or math.ceil(cfg.c_m * k**7 * tau**-7 * max(log_term, 1.0))
    tilde_delta = delta / (M * T)

    gamma_fine = (
        cfg.cube_noise_gamma_override
        if cfg.cube_noise_gamma_override is not None
        else cfg.cube_noise_accuracy_multiplier * alpha * kappa**3 / 16.0
    )
    gamma_coarse = cfg.coarse_ratio * gamma_fine

    # rough per-candidate cost: mean + coarse table on <= 2^max_support entries
    est_table_cost = 3 * hoeffding_samples(gamma_coarse, cfg.table_delta) * (1 << min(2, cfg.max_support))
    if T * M * est_table_cost > cfg.work_budget:
        raise WorkBudgetError(
            "coordinate-oracle construction exceeds the work budget",
            counts={"T": T, "M": M, "est_queries": T * M * est_table_cost},
        )

    start_queries = f.query_count
    members = []
    built = screened = tested = 0
    for _ in range(T):
        rho = sample_restriction(1.0 / k, n, rng)
        survivors = rho.survivors
        if survivors.size == 0:
            continue
        f_r = restrict(f, rho)
        mean_r = estimate_mean(f_r, gamma_fine, cfg.table_delta, rng)
        for _ in range(M):
            eta = sample_eta(kappa, survivors.size, rng, alpha=alpha, p=p)
            s = int(np.count_nonzero(eta))
            if s == 0 or s > cfg.max_support:
                continue
            built += 1
            coarse = make_candidate(
                f_r, eta, kappa, cfg.table_delta, rng,
                coord_map=survivors, gamma=gamma_coarse,
                mean_estimate=mean_r, full_dimension=n, restriction=rho,
            )
            if float(coarse.margins.max()) < gamma_coarse:
                continue
            screened += 1
            cand = make_candidate(
                f_r, eta, kappa, cfg.table_delta, rng,
                coord_map=survivors, gamma=gamma_fine,
                mean_estimate=mean_r, full_dimension=n, restriction=rho,
            )
            if float(cand.margins.min()) < cfg.screen_factor * gamma_fine:
                continue
            tested += 1
            if dictator_test(
                cand, nu, tilde_delta, rng,
                round_constant=cfg.dictator_round_constant,
                nu_round_floor=cfg.nu_round_floor,
                max_rounds=cfg.max_dictator_rounds,
            ):
                members.append(cand)

    num_dedup = cfg.dedup_samples_override or math.ceil(
        cfg.c_n * math.log(max(M * T / delta, math.e))
    )
    members = dedup_members(members, n, delta, rng, num_dedup)

    stats = {
        "T": T,
        "M": M,
        "kappa": kappa,
        "alpha": alpha,
        "eta_p": p,
        "gamma_fine": gamma_fine,
        "candidates_built": built,
        "candidates_screened": screened,
        "candidates_tested": tested,
        "members": len(members),
        "queries_to_f": f.query_count - start_queries,
    }
    return CoordinateOracleSet(members, nu=nu, k=k, stats=stats)
