"""Command-line driver: solve, simulate, ensemble and sweep.

Configuration is a flat ``key = value`` file (``#`` starts a comment) plus
``--set key=value`` overrides. Slot-varying parameters take comma-separated
lists. Every default reproduces the baseline setup: gamma=1.2, kappa=1,
alpha=1, g_bar=30, sigma_ii=4, sigma_ij=0, omega_bar=0, omega_std=2, H=5.

Exit codes: 0 success, 1 runtime failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from . import errors
from .beliefs import plan_time_zone
from .equilibrium import closed_form_complete, closed_form_private, equilibrium_residual
from .metrics import analytic_report, demand_variance_complete
from .model import Behavior, Info, PreferencePrior, PricingPolicy, RenewableForecast, Scenario
from .montecarlo import METRICS, ensemble, run_rng, run_time_zone
from .network import diameter, random_geometric

EXIT_OK, EXIT_RUNTIME, EXIT_CONFIG = 0, 1, 2
SWEEP_AXES = ("omega_bar", "sigma", "gamma", "n", "behavior", "info")
SLOT_KEYS = ("gamma", "kappa", "alpha", "omega_bar", "omega_std")


@dataclass(frozen=True)
class RunConfig:
    n: int = 10
    gamma: tuple[float, ...] = (1.2,)
    kappa: tuple[float, ...] = (1.0,)
    alpha: tuple[float, ...] = (1.0,)
    g_bar: float = 30.0
    sigma_ii: float = 4.0
    sigma: float = 0.0  # correlation coefficient sigma_ij / sigma_ii
    omega_bar: tuple[float, ...] = (0.0,)
    omega_std: tuple[float, ...] = (2.0,)
    horizon: int = 5
    behavior: Behavior = Behavior.SELFISH
    info: Info = Info.PRIVATE
    graph_width: float = 3.0
    graph_height: float = 5.0
    graph_radius: float = 2.0
    graph_seed: int | None = None
    seed: int = 0
    runs: int = 100
    workers: int = 1
    sweep_axis: str | None = None
    sweep_values: tuple[str, ...] = ()

    def validate(self) -> RunConfig:
        if self.n < 1:
            raise errors.ConfigurationError(f"n must be >= 1, got {self.n}")
        if self.horizon < 1:
            raise errors.ConfigurationError(f"horizon must be >= 1, got {self.horizon}")
        if not 0.0 <= self.sigma <= 1.0:
            raise errors.ConfigurationError(f"sigma must lie in [0, 1], got {self.sigma}")
        if self.sigma_ii <= 0:
            raise errors.ConfigurationError(f"sigma_ii must be positive, got {self.sigma_ii}")
        if self.runs < 1 or self.workers < 1:
            raise errors.ConfigurationError("runs and workers must be >= 1")
        if self.seed < 0:
            raise errors.ConfigurationError("seed must be non-negative")
        if self.sweep_axis is not None and self.sweep_axis not in SWEEP_AXES:
            raise errors.ConfigurationError(f"sweep axis must be one of {', '.join(SWEEP_AXES)}")
        return self

    def scenario(self) -> Scenario:
        policy = PricingPolicy(_slot(self.gamma), _slot(self.kappa), _slot(self.alpha))
        forecast = RenewableForecast(_slot(self.omega_bar), _slot(self.omega_std))
        prior = PreferencePrior.sigma_correlated(self.n, self.g_bar, self.sigma, self.sigma_ii)
        graph = None
        if self.info is Info.ACTION_SHARING:
            graph_seed = self.seed if self.graph_seed is None else self.graph_seed
            rng = np.random.default_rng(graph_seed)
            graph = random_geometric(self.n, self.graph_width, self.graph_height, self.graph_radius, rng)
        return Scenario(prior, policy, forecast, self.horizon, self.behavior, self.info, graph, self.seed)


def _slot(values: tuple[float, ...]):
    return values[0] if len(values) == 1 else values


def _parse_value(key: str, raw: str):
    raw = raw.strip()
    try:
        if key in SLOT_KEYS:
            return tuple(float(x) for x in raw.split(","))
        if key in ("n", "horizon", "seed", "runs", "workers"):
            return int(raw)
        if key == "graph_seed":
            return None if raw.lower() in ("", "none") else int(raw)
        if key == "behavior":
            return Behavior(raw.upper())
        if key == "info":
            return Info(raw.upper())
        if key == "sweep_axis":
            return raw or None
        if key == "sweep_values":
            return tuple(x.strip() for x in raw.split(",") if x.strip())
        return float(raw)
    except ValueError as exc:
        raise errors.ConfigurationError(f"bad value for {key!r}: {raw!r}") from exc


def build_config(pairs: list[tuple[str, str]]) -> RunConfig:
    """Apply ``key=value`` pairs in order to the defaults.

    ``sigma_ij`` is accepted as an absolute covariance and converted to the
    correlation coefficient using the final ``sigma_ii``.
    """
    known = {f.name for f in fields(RunConfig)}
    values: dict[str, object] = {}
    covariance = None
    for key, raw in pairs:
        key = key.strip().lower()
        if key == "sigma_ij":
            covariance = _parse_value(key, raw)
            continue
        if key not in known:
            raise errors.ConfigurationError(f"unknown configuration key {key!r}")
        values[key] = _parse_value(key, raw)
        if key == "sigma":
            covariance = None
    config = RunConfig(**values)
    if covariance is not None:
        config = replace(config, sigma=covariance / config.sigma_ii)
    return config.validate()


def read_config_file(path: str | Path) -> list[tuple[str, str]]:
    pairs = []
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise errors.ConfigurationError(f"cannot read config {path}: {exc}") from exc
    for number, line in enumerate(text.splitlines(), 1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise errors.ConfigurationError(f"{path}:{number}: expected key = value")
        key, value = line.split("=", 1)
        pairs.append((key, value))
    return pairs


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    return str(value.value if isinstance(value, (Behavior, Info)) else value)


def write_table(out: Path, name: str, rows: list[dict], fmt: str) -> Path:
    out.mkdir(parents=True, exist_ok=True)
    if fmt == "json":
        path = out / f"{name}.json"
        payload = [{k: _json_value(v) for k, v in row.items()} for row in rows]
        path.write_text(json.dumps(payload, indent=1) + "\n")
        return path
    path = out / f"{name}.csv"
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        if rows:
            writer.writerow(rows[0].keys())
            for row in rows:
                writer.writerow(_fmt(v) for v in row.values())
    return path


def _json_value(value):
    if value is None or isinstance(value, (bool, np.bool_)):
        return None if value is None else bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(format(float(value), ".12g"))
        return value if math.isfinite(value) else None
    return _fmt(value)


def cmd_solve(config: RunConfig) -> list[dict]:
    """Equilibrium coefficients of every slot, with fixed-point residuals and closed forms."""
    scenario = config.scenario()
    plans = plan_time_zone(scenario)
    rows = []
    n = scenario.n
    for h, plan in enumerate(plans):
        residual = equilibrium_residual(plan.coeffs, plan.weights, plan.constants, plan.omega_bar)
        c = plan.constants
        private = closed_form_private(c, config.sigma, n)
        try:
            complete = closed_form_complete(c, config.sigma, n)
        except errors.DegenerateParameterError:
            complete = None
        for i in range(n):
            row = {"slot": h + 1, "agent": i, "r": plan.coeffs.r[i], "residual": residual}
            row.update({
                "a_private": private.a,
                "b_private": private.b,
                "a_complete": None if complete is None else complete.a,
                "b_complete": None if complete is None else complete.b,
            })
            row.update({f"v_{k}": plan.coeffs.v[i, k] for k in range(n)})
            row["v_bar"] = plan.coeffs.v[i, n]
            rows.append(row)
    return rows


def cmd_simulate(config: RunConfig) -> list[dict]:
    """One seeded run (run index 0), every slot and agent."""
    scenario = config.scenario()
    trace = run_time_zone(scenario, run_rng(config.seed, 0))
    rows = []
    for h in range(trace.horizon):
        total = trace.totals[h]
        for i in range(trace.n):
            rows.append({
                "slot": h + 1,
                "agent": i,
                "consumption": trace.consumptions[h, i],
                "total": total,
                "price": trace.price[h],
                "utility": trace.utilities[h, i],
                "U": trace.aggregate_utility[h],
                "NR": trace.net_revenue[h],
                "W": trace.welfare[h],
            })
    return rows


def _analytic(config: RunConfig, h: int) -> dict[str, dict[str, float | None]]:
    """Closed-form per-capita predictions under private and complete information for slot h."""
    out: dict[str, dict[str, float | None]] = {}
    pick = lambda v: v[h] if len(v) > 1 else v[0]  # noqa: E731
    for info in ("private", "complete"):
        try:
            rep = analytic_report(
                config.behavior,
                info,
                gamma=pick(config.gamma),
                kappa=pick(config.kappa),
                alpha=pick(config.alpha),
                n=config.n,
                sigma=config.sigma,
                g_bar=config.g_bar,
                omega_bar=pick(config.omega_bar),
                variance=config.sigma_ii,
            )
        except errors.DegenerateParameterError:
            out[info] = {"demand_mean": None, "demand_variance": None, "utility": None, "welfare": None, "a": None}
            continue
        out[info] = {
            "demand_mean": rep.expected_demand_per_capita,
            "demand_variance": rep.demand_variance,
            "utility": rep.expected_utility_per_capita,
            "welfare": rep.expected_welfare_per_capita,
            "a": rep.a,
        }
    return out


def _ensemble_rows(config: RunConfig, extra: dict | None = None) -> list[dict]:
    scenario = config.scenario()
    stats = ensemble(scenario, config.runs, config.seed, config.workers)
    rows = []
    graph_diameter = None if scenario.graph is None else diameter(scenario.graph)
    for h in range(scenario.horizon):
        analytic = _analytic(config, h)
        for metric in METRICS:
            s = getattr(stats, metric)
            row = dict(extra or {})
            row.update({
                "slot": h + 1,
                "metric": metric,
                "mean": s.mean[h],
                "stderr": s.stderr[h],
                "variance": s.variance[h],
                "variance_stderr": s.variance_stderr[h],
                "runs": s.runs,
                "negative_consumptions": stats.negative_consumptions,
                "diameter": graph_diameter,
            })
            key = {"demand": "demand_mean", "utility": "utility", "welfare": "welfare"}[metric]
            row["analytic_mean_private"] = analytic["private"][key]
            row["analytic_mean_complete"] = analytic["complete"][key]
            is_demand = metric == "demand"
            row["analytic_variance_private"] = analytic["private"]["demand_variance"] if is_demand else None
            row["analytic_variance_complete"] = analytic["complete"]["demand_variance"] if is_demand else None
            a_complete = analytic["complete"]["a"]
            row["published_variance_complete"] = (
                demand_variance_complete(a_complete, config.n, config.sigma_ii) if is_demand and a_complete is not None else None
            )
            rows.append(row)
    return rows


def cmd_ensemble(config: RunConfig) -> list[dict]:
    return _ensemble_rows(config)


def _sweep_value(axis: str, raw: str):
    if axis in ("behavior", "info", "n"):
        return _parse_value(axis, raw)
    return _parse_value("sigma" if axis == "sigma" else "g_bar", raw)


def cmd_sweep(config: RunConfig) -> list[dict]:
    """Ensemble at each value of one axis; all points share the seed (common random numbers)."""
    if config.sweep_axis is None or not config.sweep_values:
        raise errors.ConfigurationError("sweep needs an axis and a list of values")
    rows = []
    for raw in config.sweep_values:
        value = _sweep_value(config.sweep_axis, raw)
        if config.sweep_axis in ("omega_bar", "gamma"):
            value = (value,)
        point = replace(config, **{config.sweep_axis: value}).validate()
        shown = value[0] if isinstance(value, tuple) else value
        rows.extend(_ensemble_rows(point, {"axis": config.sweep_axis, "value": shown}))
    return rows


COMMANDS = {"solve": cmd_solve, "simulate": cmd_simulate, "ensemble": cmd_ensemble, "sweep": cmd_sweep}


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rtpgame", description="Bayesian consumption games under real-time pricing.")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("--config", help="flat key = value configuration file")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--runs", type=int)
    parser.add_argument("--workers", type=int)
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--set", action="append", default=[], metavar="KEY=VALUE", help="override one configuration key")
    parser.add_argument("--axis", choices=SWEEP_AXES, help="sweep axis")
    parser.add_argument("--values", help="comma-separated sweep values")
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _parser().parse_args(argv)
    try:
        pairs = read_config_file(args.config) if args.config else []
        for item in args.set:
            if "=" not in item:
                raise errors.ConfigurationError(f"--set expects KEY=VALUE, got {item!r}")
            pairs.append(tuple(item.split("=", 1)))
        for key in ("seed", "runs", "workers"):
            if getattr(args, key) is not None:
                pairs.append((key, str(getattr(args, key))))
        if args.axis:
            pairs.append(("sweep_axis", args.axis))
        if args.values:
            pairs.append(("sweep_values", args.values))
        config = build_config(pairs)
        rows = COMMANDS[args.command](config)
        path = write_table(Path(args.out), args.command, rows, args.format)
    except (errors.ConfigurationError, errors.InvalidParameterError, errors.InvalidPriorError, errors.DegenerateParameterError) as exc:
        print(f"rtpgame: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (errors.RTPGameError, OSError, ArithmeticError) as exc:
        print(f"rtpgame: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    print(f"wrote {len(rows)} rows to {path}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
