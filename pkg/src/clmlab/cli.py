"""Command-line entry point.

Exit codes: 0 success, 1 domain violation, 2 input/IO error.
Subcommands: validate, strategy, design, simulate. All outputs are
re-parseable by the corresponding module loaders; input files are never
mutated.
"""

from __future__ import annotations

import json
import sys

import click

from .design import DesignSpec
from .errors import LabError
from .mining import RewardSchedule, validate_schedule
from .pool import PoolConfig, tick_price
from .sim import FLOAT_FMT, SimScenario, run_scenario
from .strategy import (Allocation, OpponentAggregate, ProviderWallet,
                       best_response, brute_force_best_response,
                       expected_reward, proportional_allocation)


def _load_json(path: str) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        click.echo(f"error: cannot read {path}: {exc}", err=True)
        sys.exit(2)
    except json.JSONDecodeError as exc:
        click.echo(f"error: malformed JSON in {path}: {exc}", err=True)
        sys.exit(2)


def _write_text(path: str | None, text: str) -> None:
    if path is None:
        click.echo(text, nl=not text.endswith("\n"))
        return
    try:
        with open(path, "w") as fh:
            fh.write(text)
    except OSError as exc:
        click.echo(f"error: cannot write {path}: {exc}", err=True)
        sys.exit(2)


def _fail(exc: LabError) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


@click.group()
def main():
    """Concentrated-liquidity mining laboratory."""


@main.command()
@click.option("--input", "path", required=True, help="Schedule JSON file.")
def validate(path):
    """Check a reward schedule for feasibility."""
    obj = _load_json(path)
    pool = PoolConfig.from_json(obj["pool"]) if "pool" in obj else None
    sched_obj = obj["schedule"] if "schedule" in obj else obj
    try:
        schedule = RewardSchedule.from_json(sched_obj)
    except (KeyError, TypeError, ValueError) as exc:
        click.echo(f"error: not a schedule object: {exc}", err=True)
        sys.exit(2)
    violations = validate_schedule(schedule, pool)
    if violations:
        for v in violations:
            click.echo(f"violation: {v}")
        sys.exit(1)
    click.echo("OK")


@main.command()
@click.option("--input", "path", required=True,
              help="JSON with pool, price, schedule, wallet, and optional opponents.")
@click.option("--mode", type=click.Choice(["proportional", "best-response", "oracle"]),
              default="best-response", show_default=True)
@click.option("--tol", type=float, default=1e-8, show_default=True,
              help="Solver convergence tolerance.")
@click.option("--grid-step", type=float, default=1e-3, show_default=True,
              help="Oracle lattice resolution (fraction of budget).")
@click.option("--output", "out", default=None, help="Write JSON here instead of stdout.")
def strategy(path, mode, tol, grid_step, out):
    """Compute a provider's allocation for a given market."""
    obj = _load_json(path)
    try:
        pool = PoolConfig.from_json(obj["pool"])
        schedule = RewardSchedule.from_json(obj["schedule"])
        wallet = ProviderWallet(float(obj["wallet"]["x"]), float(obj["wallet"]["y"]))
        price = float(obj.get("price", pool.p0))
        opp = obj.get("opponents", {})
        others = OpponentAggregate(
            {int(i): float(v) for i, v in opp.get("x", {}).items()},
            {int(i): float(v) for i, v in opp.get("y", {}).items()})
    except (KeyError, TypeError, ValueError) as exc:
        click.echo(f"error: bad strategy input: {exc}", err=True)
        sys.exit(2)
    try:
        if mode == "proportional":
            alloc = proportional_allocation(wallet, schedule, price, pool)
        elif mode == "best-response":
            alloc = best_response(wallet, others, schedule, price, pool, tol=tol)
        else:
            alloc = brute_force_best_response(wallet, others, schedule, price,
                                              pool, grid_step)
        reward = expected_reward(alloc, others, schedule, price, pool)
    except LabError as exc:
        _fail(exc)
    result = {"mode": mode, "allocation": alloc.to_json(),
              "expected_reward": reward}
    _write_text(out, json.dumps(result, indent=2))


@main.command()
@click.option("--input", "path", required=True,
              help="JSON with pool and a design spec (kind, params).")
@click.option("--output", "out", default=None,
              help="Write the schedule JSON here instead of stdout.")
@click.option("--table", default=None,
              help="Write a per-bin CSV table (bin, price range, reward) here.")
@click.option("--plot", "plot_path", default=None,
              help="Render the schedule to this PNG file.")
def design(path, out, table, plot_path):
    """Emit a reward schedule from a designer specification."""
    obj = _load_json(path)
    try:
        pool = PoolConfig.from_json(obj["pool"])
        spec = DesignSpec.from_json(obj if "kind" in obj else obj["design"])
    except (KeyError, TypeError, ValueError) as exc:
        click.echo(f"error: bad design input: {exc}", err=True)
        sys.exit(2)
    try:
        schedule = spec.build(pool)
    except LabError as exc:
        _fail(exc)
    _write_text(out, json.dumps(schedule.to_json(), indent=2))
    if table is not None:
        lines = ["bin,price_lo,price_hi,reward"]
        for i in schedule.support():
            lo = tick_price(i, pool)
            hi = pool.p0 * pool.d ** (i + 1)
            lines.append(f"{i},{FLOAT_FMT % lo},{FLOAT_FMT % hi},"
                         f"{FLOAT_FMT % schedule.per_bin[i]}")
        _write_text(table, "\n".join(lines) + "\n")
    if plot_path is not None:
        from .plots import render_schedule
        render_schedule(schedule, pool, plot_path)


@main.command()
@click.option("--input", "path", required=True, help="Scenario JSON file.")
@click.option("--output", "out", required=True,
              help="Output prefix; writes <prefix>.json and <prefix>.csv.")
@click.option("--format", "fmt", type=click.Choice(["both", "json", "csv"]),
              default="both", show_default=True)
@click.option("--seed", type=int, default=None,
              help="Override the scenario's random seed.")
@click.option("--plot/--no-plot", default=False,
              help="Render price/reward/liquidity figures next to the output.")
def simulate(path, out, fmt, seed, plot):
    """Run a scenario and write its report files."""
    obj = _load_json(path)
    try:
        scenario = SimScenario.from_json(obj)
    except (KeyError, TypeError, ValueError) as exc:
        click.echo(f"error: bad scenario: {exc}", err=True)
        sys.exit(2)
    except LabError as exc:
        _fail(exc)
    if seed is not None:
        scenario.seed = seed
    try:
        report = run_scenario(scenario)
    except LabError as exc:
        _fail(exc)
    written = []
    if fmt in ("both", "json"):
        _write_text(f"{out}.json", json.dumps(report.to_json(), indent=2))
        written.append(f"{out}.json")
    if fmt in ("both", "csv"):
        _write_text(f"{out}.csv", report.to_csv())
        written.append(f"{out}.csv")
    if plot:
        from .plots import render_report
        written.extend(render_report(report, out))
    for p in written:
        click.echo(f"wrote {p}")


if __name__ == "__main__":
    main()
