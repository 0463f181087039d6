"""Experiment plumbing: instance generators, the experiment runner, and
report serialization.

Reports serialize to canonical JSON (sorted keys, fixed float formatting,
no timing data) so identical config+seed gives byte-identical files in
sequential mode; wall times go to the CSV rows instead.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import ground_truth
from .core import (
    DEFAULT_N_CAP,
    BooleanOracle,
    LivenessError,
    WorkBudgetError,
    load_table,
)
from .full_tester import maximum_correlation_junta, tolerant_test
from .functions import (
    constant_table,
    dictator_oracle,
    dictator_table,
    majority_oracle,
    majority_table,
    noisy_junta_table,
    parity_oracle,
    parity_table,
)
from .gap_tester import (
    GapConfig,
    desk_gap_config,
    gap_tolerant_test,
    maximum_correlation_gap_junta,
)
from .oracle_builder import OracleBuilderConfig, desk_config

WORK_CAP_ENV = "JUNTA_PROBE_WORK_CAP"

FAMILIES = ("dictator", "parity", "majority", "noisy-junta", "random",
            "constant", "from-file")
TESTERS = ("full", "gap", "tolerant-full", "tolerant-gap")


class ConfigError(Exception):
    """Invalid experiment configuration."""


def work_cap():
    raw = os.environ.get(WORK_CAP_ENV)
    return int(raw) if raw else ground_truth.DEFAULT_WORK_CAP


@dataclass
class FunctionSpec:
    family: str = "dictator"
    n: int = 16
    k_true: int = 1
    noise: float = 0.0
    coords: list | None = None
    sign: int = 1
    path: str | None = None

    def validate(self):
        if self.family not in FAMILIES:
            raise ConfigError(f"unknown family {self.family!r}")
        if self.family != "from-file" and self.n < 1:
            raise ConfigError("n must be at least 1")
        if not 0.0 <= self.noise < 0.5:
            raise ConfigError("noise must lie in [0, 1/2)")
        if self.k_true < 1:
            raise ConfigError("k_true must be at least 1")


@dataclass
class TesterSpec:
    __test__ = False  # not a test case despite the Test* name

    which: str = "full"
    k: int = 1
    epsilon: float | None = None
    c_u: float | None = None
    c_l: float | None = None

    def validate(self, n):
        if self.which not in TESTERS:
            raise ConfigError(f"unknown tester {self.which!r}")
        if not 1 <= self.k <= n:
            raise ConfigError("need n >= k >= 1")
        if self.which in ("full", "gap"):
            if self.epsilon is None or not 0.0 < self.epsilon < 1.0:
                raise ConfigError("epsilon must lie in (0, 1)")
        else:
            if self.c_u is None or self.c_l is None:
                raise ConfigError("tolerant testers need c_u and c_l")
            if not 0.0 <= self.c_l < self.c_u < 0.5:
                raise ConfigError("need 0 <= c_l < c_u < 1/2")


@dataclass
class ExperimentConfig:
    function: FunctionSpec = field(default_factory=FunctionSpec)
    tester: TesterSpec = field(default_factory=TesterSpec)
    seed: int = 0
    repetitions: int = 1
    ground_truth: bool = True
    profile: str = "desk"
    builder_overrides: dict = field(default_factory=dict)
    gap_overrides: dict = field(default_factory=dict)
    parallel: bool = False

    def validate(self):
        self.function.validate()
        if self.function.family != "from-file":
            self.tester.validate(self.function.n)
        if self.repetitions < 1:
            raise ConfigError("repetitions must be at least 1")
        if self.profile not in ("desk", "paper"):
            raise ConfigError("profile must be 'desk' or 'paper'")

    @classmethod
    def from_dict(cls, data):
        try:
            fn = FunctionSpec(**data.get("function", {}))
            tester = TesterSpec(**data.get("tester", {}))
            rest = {
                key: data[key]
                for key in ("seed", "repetitions", "ground_truth", "profile",
                            "builder_overrides", "gap_overrides", "parallel")
                if key in data
            }
            cfg = cls(function=fn, tester=tester, **rest)
        except TypeError as exc:
            raise ConfigError(str(exc)) from exc
        cfg.validate()
        return cfg

    def to_dict(self):
        return asdict(self)

    def builder_config(self):
        base = desk_config() if self.profile == "desk" else OracleBuilderConfig()
        valid = {f.name for f in fields(OracleBuilderConfig)}
        for key, val in self.builder_overrides.items():
            if key not in valid:
                raise ConfigError(f"unknown builder override {key!r}")
            setattr(base, key, val)
        return base

    def gap_config(self):
        base = desk_gap_config() if self.profile == "desk" else GapConfig()
        valid = {f.name for f in fields(GapConfig)}
        for key, val in self.gap_overrides.items():
            if key not in valid:
                raise ConfigError(f"unknown gap override {key!r}")
            setattr(base, key, val)
        base.builder = self.builder_config()
        return base


def gen_function(spec: FunctionSpec, rng, n_cap=DEFAULT_N_CAP):
    """Instantiate an oracle from a function spec.

    Returns (oracle, table_or_None, info); the table is materialized when
    n is within the exact-machinery cap.
    """
    spec.validate()
    info = {"family": spec.family}
    if spec.family == "from-file":
        table = load_table(spec.path)
        return BooleanOracle.from_table(table), table, info

    n = spec.n
    small = n <= n_cap
    if spec.family == "dictator":
        coord = spec.coords[0] if spec.coords else 0
        info["planted_coords"] = [coord]
        oracle = dictator_oracle(n, coord)
        table = dictator_table(n, coord) if small else None
    elif spec.family == "parity":
        coords = list(spec.coords) if spec.coords else list(range(spec.k_true))
        info["planted_coords"] = coords
        oracle = parity_oracle(n, coords)
        table = parity_table(n, coords) if small else None
    elif spec.family == "majority":
        coords = tuple(spec.coords) if spec.coords else (0, 1, 2)
        info["planted_coords"] = list(coords)
        oracle = majority_oracle(n, coords)
        table = majority_table(n, coords) if small else None
    elif spec.family == "constant":
        table = constant_table(n, spec.sign) if small else None
        oracle = BooleanOracle(
            lambda pts: np.full(pts.shape[0], spec.sign, dtype=np.int8), n
        )
    elif spec.family == "random":
        if not small:
            raise ConfigError("random family requires a materializable table")
        table = (rng.integers(0, 2, 1 << n, dtype=np.int8) << 1) - 1
        oracle = BooleanOracle.from_table(table)
    else:  # noisy-junta
        if not small:
            raise ConfigError("noisy-junta family requires a materializable table")
        table, extra = noisy_junta_table(n, spec.k_true, spec.noise, rng)
        info.update(
            planted_coords=extra["planted_coords"],
            flip_fraction=extra["flip_fraction"],
        )
        oracle = BooleanOracle.from_table(table)

    if spec.noise > 0.0 and spec.family not in ("noisy-junta",) and table is not None:
        flips = rng.random(table.size) < spec.noise
        table = np.where(flips, -table, table).astype(np.int8)
        info["flip_fraction"] = float(flips.mean())
        oracle = BooleanOracle.from_table(table)
    return oracle, table, info


def _sanitize(obj):
    if isinstance(obj, dict):
        return {str(key): _sanitize(val) for key, val in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_sanitize(val) for val in obj]
    if isinstance(obj, np.ndarray):
        return [_sanitize(val) for val in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return obj


@dataclass
class ExperimentReport:
    config: dict
    truth: dict
    repetitions: list
    aggregate: dict

    def to_json(self):
        """Canonical JSON: sorted keys, no wall times."""
        reps = [
            {key: val for key, val in rep.items() if key != "wall_time_s"}
            for rep in self.repetitions
        ]
        payload = _sanitize({
            "config": self.config,
            "truth": self.truth,
            "repetitions": reps,
            "aggregate": self.aggregate,
        })
        return json.dumps(payload, sort_keys=True, indent=2) + "\n"

    def to_csv(self):
        """Flat per-repetition rows, including wall times."""
        keys = sorted({key for rep in self.repetitions for key in rep})
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=keys)
        writer.writeheader()
        for rep in self.repetitions:
            writer.writerow({k: _flat(rep.get(k)) for k in keys})
        return buf.getvalue()


def _flat(val):
    if isinstance(val, (dict, list, tuple, np.ndarray)):
        return json.dumps(_sanitize(val), sort_keys=True)
    return _sanitize(val)


def _compute_truth(table, cfg: ExperimentConfig):
    if table is None or not cfg.ground_truth:
        return {"available": False}
    cap = work_cap()
    k = cfg.tester.k
    n = int(np.log2(table.size))
    out = {"available": True}
    out["max_corr_k"] = ground_truth.exact_max_junta_corr(table, k, cap).value
    out["dist_k"] = (1.0 - out["max_corr_k"]) / 2.0
    if cfg.tester.which in ("gap", "tolerant-gap"):
        eps = cfg.tester.epsilon
        if eps is None:
            eps = (cfg.tester.c_u - cfg.tester.c_l) / 2.0
        k_prime = min(n, math.ceil(k**2 / (2.0 * eps) ** 2))
        if cfg.tester.which == "gap":
            k_prime = min(n, math.ceil(k**2 / eps**2))
        out["k_prime"] = k_prime
        out["max_corr_k_prime"] = ground_truth.exact_max_junta_corr(
            table, k_prime, cap
        ).value
        out["dist_k_prime"] = (1.0 - out["max_corr_k_prime"]) / 2.0
    return out


def _run_repetition(cfg: ExperimentConfig, oracle_factory, truth, rep_index):
    rng = np.random.default_rng(cfg.seed + 1 + rep_index)
    f = oracle_factory()
    tester = cfg.tester
    record = {"index": rep_index, "seed": cfg.seed + 1 + rep_index}
    start = time.perf_counter()
    try:
        if tester.which == "full":
            out = maximum_correlation_junta(
                f, tester.k, tester.epsilon, rng, cfg.builder_config()
            )
            record["corr_hat"] = out.corr_hat
            record["oracle_count"] = out.params_realized["oracle_count"]
            record["query_total"] = out.query_total
            if truth["available"]:
                record["success"] = bool(
                    abs(out.corr_hat - truth["max_corr_k"]) <= tester.epsilon
                )
        elif tester.which == "gap":
            out = maximum_correlation_gap_junta(
                f, tester.k, tester.epsilon, rng, cfg.gap_config(),
                full_output=True,
            )
            record["gap_estimate"] = out.value
            record["query_total"] = out.query_total
            if truth["available"]:
                eps = tester.epsilon
                lo = truth["max_corr_k"] - 1.5 * eps - eps
                hi = truth["max_corr_k_prime"] + eps
                record["success"] = bool(lo <= out.value <= hi)
        elif tester.which == "tolerant-full":
            res = tolerant_test(
                f, tester.k, tester.c_u, tester.c_l, rng, cfg.builder_config()
            )
            record["accepted"] = bool(res.accepted)
            record["corr_hat"] = res.output.corr_hat
            record["query_total"] = res.output.query_total
            if truth["available"]:
                record["success"] = _tolerant_success(
                    res.accepted, truth["dist_k"], truth["dist_k"], tester
                )
        else:  # tolerant-gap
            res = gap_tolerant_test(
                f, tester.k, tester.c_u, tester.c_l, rng, cfg.gap_config()
            )
            record["accepted"] = bool(res.accepted)
            record["gap_estimate"] = res.estimate
            if truth["available"]:
                record["success"] = _tolerant_success(
                    res.accepted, truth["dist_k"],
                    truth.get("dist_k_prime", truth["dist_k"]), tester,
                )
    except (WorkBudgetError, LivenessError) as exc:
        record["error"] = type(exc).__name__
        record["error_message"] = str(exc)
        record["success"] = False
    record["wall_time_s"] = time.perf_counter() - start
    return record


def _tolerant_success(accepted, dist_accept_side, dist_reject_side, tester):
    if dist_accept_side <= tester.c_l:
        return bool(accepted)
    if dist_reject_side >= tester.c_u:
        return bool(not accepted)
    return None  # in the uncertainty band: no guarantee either way


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    cfg.validate()
    gen_rng = np.random.default_rng(cfg.seed)
    _, table, info = gen_function(cfg.function, gen_rng)

    def oracle_factory():
        if table is not None:
            return BooleanOracle.from_table(table)
        oracle, _, _ = gen_function(
            cfg.function, np.random.default_rng(cfg.seed)
        )
        return oracle

    truth = _compute_truth(table, cfg)
    indices = list(range(cfg.repetitions))
    if cfg.parallel:
        with ThreadPoolExecutor() as pool:
            reps = list(pool.map(
                lambda i: _run_repetition(cfg, oracle_factory, truth, i),
                indices,
            ))
    else:
        reps = [_run_repetition(cfg, oracle_factory, truth, i) for i in indices]

    statuses = [rep.get("success") for rep in reps]
    judged = [s for s in statuses if s is not None]
    aggregate = {
        "repetitions": cfg.repetitions,
        "judged": len(judged),
        "successes": sum(bool(s) for s in judged),
        "success_fraction": (
            sum(bool(s) for s in judged) / len(judged) if judged else None
        ),
        "errors": sum("error" in rep for rep in reps),
    }
    return ExperimentReport(
        config=_sanitize({**cfg.to_dict(), "instance_info": info}),
        truth=_sanitize(truth),
        repetitions=reps,
        aggregate=aggregate,
    )
