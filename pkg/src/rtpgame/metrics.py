"""Closed-form demand, utility and welfare statistics of the symmetric equilibria.

All formulas assume a sigma-correlated prior. ``variance`` is the common
diagonal of the prior covariance; the classical statements use 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

from .equilibrium import closed_form_complete, closed_form_private
from .errors import InvalidParameterError
from .model import Behavior, behavior_constants


def expected_demand(b: float, g_bar: float, omega_bar: float, mu: float) -> float:
    """Per-capita expected demand; identical under private and complete information."""
    return b * (g_bar - omega_bar * mu)


def demand_variance_private(a: float, sigma: float, n: int, variance: float = 1.0) -> float:
    return (1 + (n - 1) * sigma) / n * a**2 * variance


def demand_variance_complete(a: float, n: int, variance: float = 1.0) -> float:
    """Published complete-information expression ``(N-1)/N^2 * a^2``.

    Kept for comparison only: the deviation terms ``a*(g_i - mean g)`` sum to
    zero over the population, so the realized variance is
    :func:`demand_variance_complete_exact`.
    """
    return (n - 1) / n**2 * a**2 * variance


def demand_variance_complete_exact(b: float, sigma: float, n: int, variance: float = 1.0) -> float:
    """Var(L/N) under complete information: L/N = b*(mean g - mu*omega_bar)."""
    return (1 + (n - 1) * sigma) / n * b**2 * variance


def large_n_variance_private(sigma: float, lam: float, alpha: float, n: int) -> float:
    """Large-population approximation sigma / (N*lam*sigma + 2*alpha)^2."""
    return sigma / (n * lam * sigma + 2 * alpha) ** 2


def variance_sensitivity_private(sigma: float, lam: float, alpha: float, n: int) -> float:
    """d/d sigma of the large-N private demand variance; changes sign at N*lam*sigma = 2*alpha."""
    x = n * lam * sigma
    return (2 * alpha - x) / (x + 2 * alpha) ** 3


def _quadratic_payoff(a, b, price_slope, alpha, sigma, n, g_bar, variance):
    return (b - (price_slope + alpha) * b**2) * g_bar**2 - ((n - 1) / n * price_slope * sigma + price_slope / n + alpha) * a**2 * variance + a * variance


def expected_aggregate_utility(
    a: float, b: float, gamma: float, alpha: float, sigma: float, n: int, g_bar: float, variance: float = 1.0
) -> float:
    """E[U]/N for strategies ``a*(g_i - g_bar) + b*g_bar`` at omega_bar = 0."""
    return _quadratic_payoff(a, b, gamma, alpha, sigma, n, g_bar, variance)


def expected_welfare(
    a: float, b: float, kappa: float, alpha: float, sigma: float, n: int, g_bar: float, variance: float = 1.0
) -> float:
    """E[W]/N; the utility expression with the price slope replaced by the cost slope."""
    return _quadratic_payoff(a, b, kappa, alpha, sigma, n, g_bar, variance)


def _complete_payoff(a, b, price_slope, alpha, sigma, n, g_bar, variance):
    mean_var = (1 + (n - 1) * sigma) / n * variance
    return (b - (price_slope + alpha) * b**2) * (g_bar**2 + mean_var) + (a - alpha * a**2) * (variance - mean_var)


def expected_aggregate_utility_complete(
    a: float, b: float, gamma: float, alpha: float, sigma: float, n: int, g_bar: float, variance: float = 1.0
) -> float:
    """E[U]/N for ``a*(g_i - mean g) + b*mean g`` at omega_bar = 0."""
    return _complete_payoff(a, b, gamma, alpha, sigma, n, g_bar, variance)


def expected_welfare_complete(
    a: float, b: float, kappa: float, alpha: float, sigma: float, n: int, g_bar: float, variance: float = 1.0
) -> float:
    return _complete_payoff(a, b, kappa, alpha, sigma, n, g_bar, variance)


class CorollaryRatios(NamedTuple):
    """Large-population ratios between behavior models (omega_bar = 0, large g_bar)."""

    demand_s_over_u: float
    demand_w_over_u: float
    demand_s_over_w: float
    utility_s_over_u: float
    utility_w_over_u: float
    welfare_s_over_w: float
    welfare_u_over_w: float


def corollary_ratios(gamma: float, kappa: float, alpha: float) -> CorollaryRatios:
    if min(gamma, kappa, alpha) <= 0:
        raise InvalidParameterError("gamma, kappa, alpha must be positive")
    base = 4 * alpha**2 + 4 * alpha * gamma
    return CorollaryRatios(
        demand_s_over_u=2 * (gamma + alpha) / (gamma + 2 * alpha),
        demand_w_over_u=(gamma + alpha) / (kappa + alpha),
        demand_s_over_w=2 * (kappa + alpha) / (gamma + 2 * alpha),
        utility_s_over_u=base / (base + gamma**2),
        utility_w_over_u=(gamma + alpha) * (2 * kappa + alpha - gamma) / (kappa + alpha) ** 2,
        welfare_s_over_w=(base + 4 * kappa * (gamma - kappa)) / (base + gamma**2),
        welfare_u_over_w=(kappa + alpha) * (2 * gamma + alpha - kappa) / (gamma + alpha) ** 2,
    )


@dataclass(frozen=True)
class AnalyticReport:
    behavior: Behavior
    info: str
    n: int
    sigma: float
    variance: float
    g_bar: float
    omega_bar: float
    a: float
    b: float
    expected_demand_per_capita: float
    demand_variance: float
    expected_utility_per_capita: float | None
    expected_welfare_per_capita: float | None


def analytic_report(
    behavior: Behavior | str,
    info: str,
    *,
    gamma: float,
    kappa: float,
    alpha: float,
    n: int,
    sigma: float,
    g_bar: float,
    omega_bar: float = 0.0,
    variance: float = 1.0,
) -> AnalyticReport:
    """Closed-form predictions for one (behavior, information) pair.

    Utility and welfare are only defined at omega_bar = 0. Under complete
    information the variance and payoffs use the exact expressions for the
    sufficient-statistic strategy.
    """
    behavior = Behavior(behavior)
    if info not in ("private", "complete"):
        raise InvalidParameterError(f"info must be 'private' or 'complete', got {info!r}")
    c = behavior_constants(behavior, gamma, kappa, alpha, n)
    if info == "private":
        coeffs = closed_form_private(c, sigma, n)
        var = demand_variance_private(coeffs.a, sigma, n, variance)
        utility_fn, welfare_fn = expected_aggregate_utility, expected_welfare
    else:
        coeffs = closed_form_complete(c, sigma, n)
        var = demand_variance_complete_exact(coeffs.b, sigma, n, variance)
        utility_fn, welfare_fn = expected_aggregate_utility_complete, expected_welfare_complete
    utility = welfare = None
    if omega_bar == 0:
        utility = utility_fn(coeffs.a, coeffs.b, gamma, alpha, sigma, n, g_bar, variance)
        welfare = welfare_fn(coeffs.a, coeffs.b, kappa, alpha, sigma, n, g_bar, variance)
    return AnalyticReport(
        behavior=behavior,
        info=info,
        n=n,
        sigma=sigma,
        variance=variance,
        g_bar=g_bar,
        omega_bar=omega_bar,
        a=coeffs.a,
        b=coeffs.b,
        expected_demand_per_capita=expected_demand(coeffs.b, g_bar, omega_bar, c.mu),
        demand_variance=var,
        expected_utility_per_capita=utility,
        expected_welfare_per_capita=welfare,
    )
