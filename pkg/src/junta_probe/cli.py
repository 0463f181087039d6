"""Command-line interface: run experiments, query ground truth, generate
instance tables.

Exit codes: 0 success, 1 configuration error, 2 work-budget or liveness
error.
"""

from __future__ import annotations

import json
import sys

import click
import numpy as np

from . import ground_truth
from .core import LivenessError, WorkBudgetError, load_table, save_table
from .harness import (
    ConfigError,
    ExperimentConfig,
    FunctionSpec,
    gen_function,
    run_experiment,
    work_cap,
)

EXIT_CONFIG = 1
EXIT_BUDGET = 2


def _parse_override(raw):
    if "=" not in raw:
        raise ConfigError(f"override {raw!r} is not key=value")
    key, value = raw.split("=", 1)
    try:
        return key, json.loads(value)
    except json.JSONDecodeError:
        return key, value


def _apply_override(data, dotted_key, value):
    parts = dotted_key.split(".")
    node = data
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


@click.group()
def main():
    """Tolerant junta-correlation testers and their experiment harness."""


@main.command()
@click.option("--config", "config_path", type=click.Path(exists=True),
              required=True, help="JSON experiment config.")
@click.option("--override", "overrides", multiple=True,
              help="Dotted key=value config override, e.g. tester.k=2.")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the canonical JSON report here.")
@click.option("--csv", "csv_path", type=click.Path(), default=None,
              help="Also write flat per-repetition CSV rows.")
@click.option("--parallel", is_flag=True, default=False,
              help="Run repetitions in parallel (determinism not guaranteed).")
def run(config_path, overrides, out_path, csv_path, parallel):
    """Run an experiment and emit its report."""
    try:
        with open(config_path) as fh:
            data = json.load(fh)
        for raw in overrides:
            key, value = _parse_override(raw)
            _apply_override(data, key, value)
        if parallel:
            data["parallel"] = True
        cfg = ExperimentConfig.from_dict(data)
        report = run_experiment(cfg)
    except (ConfigError, json.JSONDecodeError) as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except (WorkBudgetError, LivenessError) as exc:
        click.echo(f"budget error: {exc}", err=True)
        sys.exit(EXIT_BUDGET)

    text = report.to_json()
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text)
    else:
        click.echo(text, nl=False)
    if csv_path:
        with open(csv_path, "w") as fh:
            fh.write(report.to_csv())
    if report.aggregate["errors"] == cfg.repetitions and cfg.repetitions > 0:
        sys.exit(EXIT_BUDGET)


@main.command()
@click.option("--fn", "fn_path", type=click.Path(exists=True), default=None,
              help="Truth-table file to analyze.")
@click.option("--family", default=None, help="Generate the instance instead.")
@click.option("--n", type=int, default=12)
@click.option("--k-true", type=int, default=1)
@click.option("--noise", type=float, default=0.0)
@click.option("--seed", type=int, default=0)
@click.option("--k", type=int, required=True, help="Junta arity for the maxima.")
def truth(fn_path, family, n, k_true, noise, seed, k):
    """Print exact max k-junta correlation and distance for an instance."""
    try:
        if fn_path:
            table = load_table(fn_path)
        elif family:
            spec = FunctionSpec(family=family, n=n, k_true=k_true, noise=noise)
            _, table, _ = gen_function(spec, np.random.default_rng(seed))
            if table is None:
                raise ConfigError("instance too large for exact analysis")
        else:
            raise ConfigError("provide --fn or --family")
        best = ground_truth.exact_max_junta_corr(table, k, work_cap())
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    except WorkBudgetError as exc:
        click.echo(f"budget error: {exc}", err=True)
        sys.exit(EXIT_BUDGET)
    click.echo(json.dumps({
        "k": k,
        "max_corr": best.value,
        "distance": (1.0 - best.value) / 2.0,
        "best_subset": list(best.best_subset),
    }, sort_keys=True, indent=2))


@main.command()
@click.option("--family", required=True)
@click.option("--n", type=int, required=True)
@click.option("--k-true", type=int, default=1)
@click.option("--noise", type=float, default=0.0)
@click.option("--seed", type=int, default=0)
@click.option("--out", "out_path", type=click.Path(), required=True)
def gen(family, n, k_true, noise, seed, out_path):
    """Generate an instance and write its truth table."""
    try:
        spec = FunctionSpec(family=family, n=n, k_true=k_true, noise=noise)
        _, table, info = gen_function(spec, np.random.default_rng(seed))
        if table is None:
            raise ConfigError(
                "instance too large to materialize; lower n"
            )
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    save_table(out_path, table)
    click.echo(json.dumps({"written": out_path, **{
        k: v for k, v in info.items() if not isinstance(v, np.ndarray)
    }}, sort_keys=True))


if __name__ == "__main__":
    main()
