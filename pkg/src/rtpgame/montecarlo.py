"""Seeded sampling, time-zone simulation and ensemble statistics."""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .beliefs import SlotPlan, init_means, plan_time_zone, play_slot
from .errors import InvalidParameterError
from .model import PreferencePrior, RenewableForecast, Scenario, SimulationTrace, price, system_metrics, utility

METRICS = ("demand", "utility", "welfare")


def run_rng(seed: int, run: int) -> np.random.Generator:
    """Generator for run ``run``; depends only on (seed, run), never on scheduling."""
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(run,))))


def sample_preferences(prior: PreferencePrior, rng: np.random.Generator) -> np.ndarray:
    return prior.g_bar + prior.factor @ rng.standard_normal(prior.n)


def sample_omega(forecast: RenewableForecast, horizon: int, rng: np.random.Generator) -> np.ndarray:
    """One renewable adjustment per slot; standard normals are drawn even when std is 0."""
    z = rng.standard_normal(horizon)
    slots = [forecast.at(h) for h in range(horizon)]
    return np.array([s.omega_bar + s.omega_std * zh for s, zh in zip(slots, z)])


def run_time_zone(
    scenario: Scenario,
    rng: np.random.Generator,
    plan: list[SlotPlan] | None = None,
    record_means: bool = False,
) -> SimulationTrace:
    """Simulate one time zone: draw preferences once and omega per slot, then play every slot.

    ``plan`` (from :func:`plan_time_zone`) holds everything that does not
    depend on the realization and can be shared between runs.
    """
    if plan is None:
        plan = plan_time_zone(scenario)
    if len(plan) != scenario.horizon:
        raise InvalidParameterError(f"plan covers {len(plan)} slots, horizon is {scenario.horizon}")
    g = sample_preferences(scenario.prior, rng)
    omega = sample_omega(scenario.forecast, scenario.horizon, rng)
    means = init_means(scenario.prior, g)

    horizon, n = scenario.horizon, scenario.n
    consumptions = np.empty((horizon, n))
    utilities = np.empty((horizon, n))
    prices = np.empty(horizon)
    agg, revenue, welfare = np.empty(horizon), np.empty(horizon), np.empty(horizon)
    history = np.empty((horizon, n, n + 1)) if record_means else None
    for h, slot in enumerate(plan):
        if history is not None:
            history[h] = means
        l, means = play_slot(scenario, slot, means)
        policy = scenario.policy.at(h)
        total = l.sum()
        consumptions[h] = l
        prices[h] = price(total, omega[h], policy.gamma, n)
        utilities[h] = utility(l, total, g, omega[h], policy.gamma, policy.alpha, n)
        agg[h], revenue[h], welfare[h], _ = system_metrics(l, omega[h], policy, g)
    return SimulationTrace(g, consumptions, omega, prices, utilities, agg, revenue, welfare, history)


@dataclass(frozen=True, eq=False)
class SampleStats:
    """Per-slot sample statistics of one metric over the ensemble."""

    mean: np.ndarray
    variance: np.ndarray
    stderr: np.ndarray
    variance_stderr: np.ndarray
    runs: int

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> SampleStats:
        runs = samples.shape[0]
        mean = samples.mean(axis=0)
        if runs < 2:
            nan = np.full_like(mean, math.nan)
            return cls(mean, nan, nan, nan, runs)
        centered = samples - mean
        variance = (centered**2).sum(axis=0) / (runs - 1)
        fourth = (centered**4).mean(axis=0)
        biased = (centered**2).mean(axis=0)
        return cls(
            mean=mean,
            variance=variance,
            stderr=np.sqrt(variance / runs),
            variance_stderr=np.sqrt(np.maximum(fourth - biased**2, 0.0) / runs),
            runs=runs,
        )


@dataclass(frozen=True, eq=False)
class EnsembleStats:
    """Statistics of per-capita demand L/N, utility U/N and welfare W/N, per slot.

    ``samples[metric]`` keeps the raw (runs, horizon) array in run order.
    """

    demand: SampleStats
    utility: SampleStats
    welfare: SampleStats
    samples: dict[str, np.ndarray]
    negative_consumptions: int

    @property
    def runs(self) -> int:
        return self.demand.runs


def _run_block(scenario: Scenario, plan: list[SlotPlan], seed: int, runs: range) -> tuple[np.ndarray, int]:
    out = np.empty((len(runs), 3, scenario.horizon))
    negatives = 0
    n = scenario.n
    for k, run in enumerate(runs):
        trace = run_time_zone(scenario, run_rng(seed, run), plan)
        out[k, 0] = trace.totals / n
        out[k, 1] = trace.aggregate_utility / n
        out[k, 2] = trace.welfare / n
        negatives += trace.negative_consumptions
    return out, negatives


def ensemble(
    scenario: Scenario,
    runs: int,
    seed: int | None = None,
    workers: int = 1,
    plan: list[SlotPlan] | None = None,
) -> EnsembleStats:
    """Independent runs of one scenario; run k always uses sub-seed (seed, k).

    Results are gathered in run order, so ``workers`` never changes a bit of
    the output.
    """
    if runs < 1:
        raise InvalidParameterError(f"runs must be >= 1, got {runs}")
    seed = scenario.seed if seed is None else seed
    if plan is None:
        plan = plan_time_zone(scenario)
    if workers <= 1:
        blocks = [_run_block(scenario, plan, seed, range(runs))]
    else:
        edges = np.linspace(0, runs, min(workers, runs) + 1).astype(int)
        chunks = [range(lo, hi) for lo, hi in zip(edges[:-1], edges[1:])]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            blocks = list(pool.map(_run_block, [scenario] * len(chunks), [plan] * len(chunks), [seed] * len(chunks), chunks))
    data = np.concatenate([b for b, _ in blocks])
    negatives = sum(neg for _, neg in blocks)
    samples = {name: data[:, k, :] for k, name in enumerate(METRICS)}
    return EnsembleStats(
        demand=SampleStats.from_samples(samples["demand"]),
        utility=SampleStats.from_samples(samples["utility"]),
        welfare=SampleStats.from_samples(samples["welfare"]),
        samples=samples,
        negative_consumptions=negatives,
    )
