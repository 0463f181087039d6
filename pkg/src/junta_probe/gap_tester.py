"""Polynomial-query pipeline: averaging over irrelevant coordinates by a
hypercube random walk, influence thresholding, smoothing, and the gap
correlation estimate.

The pipeline never learns the influential coordinates explicitly; every
conditional expectation is reached through the coordinate-oracle members.
When every member's cached table is a signed dictator the walk's acceptance
test depends only on the decision coordinates, so whole chains can be
simulated in one vectorized batch; otherwise a per-step rejection loop runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .core import (
    LivenessError,
    RealOracle,
    estimate_mean,
    hoeffding_samples,
    random_points,
)
from .full_tester import MAX_NU
from .oracle_builder import (
    CoordinateOracleSet,
    OracleBuilderConfig,
    construct_coordinate_oracle,
    desk_config,
)


@dataclass
class WalkConfig:
    flip_prob: float
    steps: int
    gamma: float
    delta: float

    def __post_init__(self):
        if not 0.0 < self.flip_prob <= 0.5:
            raise ValueError("flip_prob must lie in (0, 1/2]")
        if self.steps < 1:
            raise ValueError("steps must be at least 1")

    @classmethod
    def derive(cls, num_oracles, gamma, delta, c_w=8.0, steps_override=None):
        flip_prob = 1.0 / (2.0 * num_oracles)
        steps = steps_override or math.ceil(
            c_w * num_oracles * math.log(1.0 / delta) / gamma**2
        )
        return cls(flip_prob, steps, gamma, delta)


@dataclass
class InfluenceSample:
    base: np.ndarray
    flipped: dict  # member index -> point where only that member disagrees


@dataclass
class GapConfig:
    """Knobs for the gap pipeline; see :func:`desk_gap_config` for the
    profile used in statistical experiments."""

    c_w: float = 8.0  # walk step constant
    c_i: float = 4.0  # influence base-point constant
    gamma: float | None = None  # defaults to epsilon/16
    walk_steps: int | None = None
    influence_steps: int | None = None
    outer_samples: int | None = None
    smooth_samples_threshold: int = 8  # z draws per eval while thresholding
    smooth_samples_final: int = 1  # z draws per eval in the final average
    proposal_cap_factor: int = 64
    influence_proposal_factor: float = 8.0
    builder: OracleBuilderConfig | None = None


def desk_gap_config(**overrides):
    cfg = GapConfig(
        walk_steps=300,
        influence_steps=48,
        outer_samples=200,
        builder=desk_config(t_override=8, m_override=16),
    )
    for key, val in overrides.items():
        setattr(cfg, key, val)
    return cfg


def _decision_coords(oracle_set):
    """Decision coordinates when every member is a cached signed dictator,
    else None (forces the general rejection walk)."""
    coords = []
    for g in oracle_set.members:
        c = getattr(g, "decision_coordinate", None)
        if c is None:
            return None
        coords.append(c)
    return np.unique(coords)


def _walk_batch_fast(f, xs, coords, cfg: WalkConfig, rng, proposal_cap_factor,
                     oracle_set, collect_states=False, batch_elems=1 << 22):
    """Vectorized chains: conditioned on acceptance, non-decision bits flip
    independently each step, so a chain is a cumulative XOR of flip masks."""
    m, n = xs.shape
    T = cfg.steps
    off = np.setdiff1d(np.arange(n), coords)
    q = cfg.flip_prob
    p_acc = (1.0 - q) ** coords.size

    out = np.empty(m)
    states_out = [] if collect_states else None
    chunk_m = max(1, batch_elems // max(T * max(off.size, 1), 1))
    for lo in range(0, m, chunk_m):
        hi = min(m, lo + chunk_m)
        block = xs[lo:hi]
        # honest proposal accounting: each accepted step consumes a geometric
        # number of proposals, each costing one query per member
        proposals = rng.geometric(p_acc, size=(hi - lo, T))
        if np.any(proposals.sum(axis=1) > proposal_cap_factor * T):
            raise LivenessError("walk proposal cap exceeded")
        total_proposals = int(proposals.sum())
        for g in oracle_set.members:
            g.query_count += total_proposals
        states = np.broadcast_to(block[:, None, :], (hi - lo, T, n)).copy()
        if off.size:
            flips = rng.random((hi - lo, T, off.size)) < q
            parity = np.cumsum(flips, axis=1) & 1
            states[:, :, off] = np.where(
                parity == 1, -block[:, None, off], block[:, None, off]
            )
        values = np.asarray(
            f(states.reshape(-1, n)), dtype=np.float64
        ).reshape(hi - lo, T)
        out[lo:hi] = values.mean(axis=1)
        if collect_states:
            states_out.append(states)
    if collect_states:
        return out, np.concatenate(states_out, axis=0)
    return out


def _walk_single_general(f, x, cfg: WalkConfig, rng, oracle_set,
                         proposal_cap_factor, collect_states=False):
    """Rejection-sampling chain for arbitrary oracle members."""
    n = x.size
    T = cfg.steps
    cap = proposal_cap_factor * T
    base_signs = oracle_set.evaluate_all(x[None, :])[0]
    state = x.copy()
    states = np.empty((T, n), dtype=np.int8)
    proposals = 0
    for t in range(T):
        while True:
            proposals += 1
            if proposals > cap:
                raise LivenessError(
                    f"walk exceeded {cap} proposals after {t} accepted steps"
                )
            flips = rng.random(n) < cfg.flip_prob
            proposal = np.where(flips, -state, state).astype(np.int8)
            if np.array_equal(
                oracle_set.evaluate_all(proposal[None, :])[0], base_signs
            ):
                state = proposal
                break
        states[t] = state
    values = np.asarray(f(states), dtype=np.float64)
    if collect_states:
        return float(values.mean()), states
    return float(values.mean())


def coordinate_projection(f, x, oracle_set, gamma, delta, rng, *, c_w=8.0,
                          steps_override=None, proposal_cap_factor=64,
                          collect_states=False):
    """Estimate E[f(y) | y agrees with x on the oracle coordinates].

    Runs the conditioned hypercube walk and averages f over the accepted
    states; within gamma of the conditional mean w.p. >= 1 - delta.
    """
    x = np.asarray(x, dtype=np.int8).reshape(-1)
    if len(oracle_set) == 0:
        return estimate_mean(f, gamma, delta, rng)
    cfg = WalkConfig.derive(len(oracle_set), gamma, delta, c_w, steps_override)
    coords = _decision_coords(oracle_set)
    if coords is not None:
        res = _walk_batch_fast(
            f, x[None, :], coords, cfg, rng, proposal_cap_factor,
            oracle_set, collect_states=collect_states,
        )
        if collect_states:
            return float(res[0][0]), res[1][0]
        return float(res[0])
    return _walk_single_general(
        f, x, cfg, rng, oracle_set, proposal_cap_factor,
        collect_states=collect_states,
    )


def projection_oracle(f, oracle_set, gamma, delta, rng, *, c_w=8.0,
                      steps_override=None, proposal_cap_factor=64):
    """f_avg as a batch RealOracle backed by one walk per evaluation."""
    n = f.dimension
    if len(oracle_set) == 0:
        def fn_empty(pts):
            return np.array([
                estimate_mean(f, gamma, delta, rng) for _ in range(pts.shape[0])
            ])
        return RealOracle(fn_empty, n, gamma, delta)

    cfg = WalkConfig.derive(len(oracle_set), gamma, delta, c_w, steps_override)
    coords = _decision_coords(oracle_set)

    def fn(pts):
        if coords is not None:
            return _walk_batch_fast(
                f, pts, coords, cfg, rng, proposal_cap_factor, oracle_set
            )
        return np.array([
            _walk_single_general(f, p, cfg, rng, oracle_set, proposal_cap_factor)
            for p in pts
        ])

    return RealOracle(fn, n, gamma, delta, query_cost=cfg.steps)


def smooth_query(f_avg, x, s, gamma, delta, rng, samples_override=None):
    """Estimate T_{1-s} f_avg at x by sampling the noise distribution."""
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    x = np.asarray(x, dtype=np.int8).reshape(-1)
    m = samples_override or hoeffding_samples(gamma, delta)
    p_keep = 1.0 - s / 2.0  # P(z_i = +1) for E[z_i] = 1 - s
    z = np.where(rng.random((m, x.size)) < p_keep, 1, -1).astype(np.int8)
    return float(np.mean(np.asarray(f_avg(x * z), dtype=np.float64)))


def smoothing_oracle(f_avg, s, rng, samples=1):
    """T_{1-s} f_avg as a batch RealOracle, ``samples`` noise draws per point."""
    if not 0.0 < s < 1.0:
        raise ValueError("s must lie in (0, 1)")
    n = f_avg.dimension
    p_keep = 1.0 - s / 2.0

    def fn(pts):
        acc = np.zeros(pts.shape[0])
        for _ in range(samples):
            z = np.where(rng.random(pts.shape) < p_keep, 1, -1).astype(np.int8)
            acc += np.asarray(f_avg(pts * z), dtype=np.float64)
        return acc / samples

    return RealOracle(fn, n, query_cost=samples)


def influence_testing_sample(x, oracle_set, rng, proposal_factor=8.0,
                             chunk=64):
    """One flipped point per oracle member: proposals flip each bit w.p.
    1/(2|D|) and are kept when exactly one member disagrees with x."""
    R = len(oracle_set)
    if R < 1:
        raise ValueError("need at least one oracle member")
    x = np.asarray(x, dtype=np.int8).reshape(-1)
    q = 1.0 / (2.0 * R)
    base = oracle_set.evaluate_all(x[None, :])[0]
    harmonic = sum(1.0 / r for r in range(1, R + 1))
    # coupon collector against per-proposal success ~ q(1-q)^(R-1) per member
    expected = R * harmonic / (q * (1.0 - q) ** max(R - 1, 0))
    cap = math.ceil(proposal_factor * expected)

    flipped = {}
    proposals = 0
    while len(flipped) < R:
        if proposals >= cap:
            raise LivenessError(
                f"influence sampling exceeded {cap} proposals with "
                f"{len(flipped)}/{R} members found"
            )
        size = min(chunk, cap - proposals)
        proposals += size
        flips = rng.random((size, x.size)) < q
        ys = np.where(flips, -x, x).astype(np.int8)
        disagree = oracle_set.evaluate_all(ys) != base
        counts = disagree.sum(axis=1)
        for row in np.flatnonzero(counts == 1):
            j = int(np.flatnonzero(disagree[row])[0])
            if j not in flipped:
                flipped[j] = ys[row].copy()
        # preserve sequential semantics: stop scanning this chunk once done
        if len(flipped) == R:
            break
    return InfluenceSample(base=x, flipped=flipped)


def threshold_influences(f, oracle_set, t, delta, rng, *, c_i=4.0,
                         steps_override=None, proposal_factor=8.0):
    """Keep the members whose coordinates have influence >= (3/2) t in f.

    Estimator: (1/4) mean of (f(x) - f(y_g))^2 over influence-testing
    samples, which matches the Fourier influence for ±1-valued and real f.
    W.p. 1 - delta every coordinate with influence >= 2t is kept and every
    kept one has influence >= t.
    """
    if not 0.0 < t < 1.0:
        raise ValueError("t must lie in (0, 1)")
    R = len(oracle_set)
    if R == 0:
        return CoordinateOracleSet([], nu=oracle_set.nu, k=oracle_set.k)
    T = steps_override or math.ceil(
        c_i * t**-2 * math.log(max(R / delta, math.e))
    )
    n = f.dimension
    bases = random_points(rng, T, n)
    flipped = np.empty((R, T, n), dtype=np.int8)
    for i in range(T):
        sample = influence_testing_sample(
            bases[i], oracle_set, rng, proposal_factor
        )
        for j in range(R):
            flipped[j, i] = sample.flipped[j]
    f_base = np.asarray(f(bases), dtype=np.float64)
    kept = []
    estimates = {}
    for j in range(R):
        f_flip = np.asarray(f(flipped[j]), dtype=np.float64)
        inf_hat = float(np.mean((f_base - f_flip) ** 2)) / 4.0
        estimates[j] = inf_hat
        if inf_hat >= 1.5 * t:
            kept.append(oracle_set.members[j])
    return CoordinateOracleSet(
        kept, nu=oracle_set.nu, k=oracle_set.k,
        stats={"influence_estimates": estimates, "threshold": 1.5 * t},
    )


@dataclass
class GapOutput:
    value: float
    oracle_set: CoordinateOracleSet | None
    kept_set: CoordinateOracleSet | None
    params_realized: dict = field(default_factory=dict)
    query_total: int = 0


def maximum_correlation_gap_junta(f, k, epsilon, rng,
                                  config: GapConfig | None = None,
                                  full_output=False):
    """Gap estimate of the best k-junta correlation.

    Output is sandwiched between the best k-junta correlation minus the
    smoothing and thresholding losses and the best k'-junta correlation,
    k' = k^2/eps^2, up to estimation error.
    """
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    if k < 1:
        raise ValueError("k must be at least 1")
    cfg = config or GapConfig()
    tau = epsilon / 4.0
    delta = 1.0 / 3.0
    gamma = cfg.gamma if cfg.gamma is not None else epsilon / 16.0
    s = epsilon / (2.0 * k)
    t = epsilon / (2.0 * k)  # threshold parameter; kept set lies in [t, 2t]
    start = f.query_count

    oracle_set = construct_coordinate_oracle(
        f, k, delta / 4.0, MAX_NU, tau, rng, cfg.builder
    )
    params = {
        "tau": tau, "gamma": gamma, "s": s, "t": t,
        "oracle_count": len(oracle_set), "k": k, "epsilon": epsilon,
    }

    def finish(value, kept):
        out = GapOutput(
            value=float(value),
            oracle_set=oracle_set,
            kept_set=kept,
            params_realized=params,
            query_total=f.query_count - start,
        )
        return out if full_output else out.value

    if len(oracle_set) == 0:
        return finish(abs(estimate_mean(f, epsilon / 4.0, delta / 4.0, rng)), None)

    f_avg = projection_oracle(
        f, oracle_set, gamma, delta / 4.0, rng,
        c_w=cfg.c_w, steps_override=cfg.walk_steps,
        proposal_cap_factor=cfg.proposal_cap_factor,
    )
    f_smooth_thr = smoothing_oracle(f_avg, s, rng, cfg.smooth_samples_threshold)
    kept = threshold_influences(
        f_smooth_thr, oracle_set, t, delta / 4.0, rng,
        c_i=cfg.c_i, steps_override=cfg.influence_steps,
        proposal_factor=cfg.influence_proposal_factor,
    )
    params["kept_count"] = len(kept)

    f_smooth = smoothing_oracle(f_avg, s, rng, cfg.smooth_samples_final)
    m_out = cfg.outer_samples or hoeffding_samples(gamma, delta / 4.0)
    xs = random_points(rng, m_out, f.dimension)
    if len(kept) == 0:
        values = np.asarray(f_smooth(xs), dtype=np.float64)
        return finish(abs(float(values.mean())), kept)
    final_proj = projection_oracle(
        f_smooth, kept, gamma, delta / 4.0, rng,
        c_w=cfg.c_w, steps_override=cfg.walk_steps,
        proposal_cap_factor=cfg.proposal_cap_factor,
    )
    v = np.asarray(final_proj(xs), dtype=np.float64)
    return finish(float(np.abs(v).mean()), kept)


@dataclass
class GapTestResult:
    accepted: bool
    threshold: float
    estimate: float
    k_prime: int


def gap_tolerant_test(f, k, c_u, c_l, rng, config: GapConfig | None = None):
    """Distinguish dist(f, k-juntas) <= c_l from dist(f, k'-juntas) >= c_u,
    k' = k^2/(c_u - c_l)^2, each side w.p. >= 2/3."""
    if not (0.0 <= c_l < c_u < 0.5):
        raise ValueError("need 0 <= c_l < c_u < 1/2")
    epsilon = (c_u - c_l) / 2.0
    threshold = 1.0 - 2.0 * c_l - 2.0 * epsilon
    k_prime = min(f.dimension, math.ceil(k**2 / (c_u - c_l) ** 2))
    estimate = maximum_correlation_gap_junta(f, k, epsilon, rng, config)
    return GapTestResult(estimate >= threshold, threshold, estimate, k_prime)
