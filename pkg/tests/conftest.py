"""Shared fixtures and the acceptance summary printed after the run."""

from __future__ import annotations

import numpy as np
import pytest

from rtpgame.model import PreferencePrior, PricingPolicy, RenewableForecast, Scenario
from rtpgame.network import random_geometric

ACCEPTANCE_LINES: list[str] = []


def record_acceptance(criterion: str, passed: bool, detail: str) -> None:
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    ACCEPTANCE_LINES.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=_criterion_key):
            terminalreporter.write_line(line)


def _criterion_key(line: str):
    label = line.split("criterion ", 1)[1].split(":", 1)[0]
    digits = "".join(ch for ch in label if ch.isdigit())
    return int(digits or 0), label


def baseline_scenario(n: int = 10, info: str = "P", behavior: str = "S", horizon: int = 5, graph_seed: int = 0, sigma: float = 0.0, **kw):
    """Baseline setup: gamma=1.2, kappa=1, alpha=1, g_bar=30, sigma_ii=4, omega ~ N(0, 2^2)."""
    prior = PreferencePrior.sigma_correlated(n, 30.0, sigma, 4.0)
    graph = None
    if info == "AS":
        graph = random_geometric(n, 3.0, 5.0, 2.0, np.random.default_rng(graph_seed))
    return Scenario(
        prior,
        PricingPolicy(kw.pop("gamma", 1.2), kw.pop("kappa", 1.0), kw.pop("alpha", 1.0)),
        RenewableForecast(kw.pop("omega_bar", 0.0), kw.pop("omega_std", 2.0)),
        horizon=horizon,
        behavior=behavior,
        info=info,
        graph=graph,
        **kw,
    )


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
