"""Domain types and the primitive economics of the real-time pricing game.

Every quantity here is per time slot. Slot-varying parameters are stored as
tuples and resolved with ``.at(h)`` (0-based slot index); a scalar means the
value is constant over the time zone.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from functools import cached_property
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import ConfigurationError, InvalidParameterError, InvalidPriorError
from .network import CommunicationGraph

PerSlot = Union[float, Sequence[float]]


class Behavior(str, enum.Enum):
    """What a consumer maximizes."""

    SELFISH = "S"
    ALTRUISTIC = "U"
    WELFARE = "W"


class Info(str, enum.Enum):
    """How consumption information flows between slots."""

    PRIVATE = "P"
    ACTION_SHARING = "AS"
    BROADCAST = "B"


def _per_slot(value: PerSlot, name: str) -> float | tuple[float, ...]:
    if np.ndim(value) == 0:
        return float(value)
    values = tuple(float(v) for v in value)
    if not values:
        raise InvalidParameterError(f"{name}: empty per-slot sequence")
    return values


def _resolve(value: float | tuple[float, ...], h: int) -> float:
    if isinstance(value, tuple):
        if not 0 <= h < len(value):
            raise InvalidParameterError(f"slot {h} outside per-slot sequence of length {len(value)}")
        return value[h]
    return value


def _slot_count(value: float | tuple[float, ...]) -> int | None:
    return len(value) if isinstance(value, tuple) else None


@dataclass(frozen=True)
class PricingPolicy:
    """Price slope ``gamma``, generation cost ``kappa`` and utility decay ``alpha``."""

    gamma: PerSlot
    kappa: PerSlot
    alpha: PerSlot

    def __post_init__(self) -> None:
        for name in ("gamma", "kappa", "alpha"):
            value = _per_slot(getattr(self, name), name)
            if min(np.atleast_1d(value)) <= 0:
                raise InvalidParameterError(f"{name} must be strictly positive, got {value}")
            object.__setattr__(self, name, value)

    def at(self, h: int) -> PricingPolicy:
        return PricingPolicy(_resolve(self.gamma, h), _resolve(self.kappa, h), _resolve(self.alpha, h))

    def slot_counts(self) -> list[int]:
        return [c for c in map(_slot_count, (self.gamma, self.kappa, self.alpha)) if c is not None]


@dataclass(frozen=True)
class RenewableForecast:
    """Announced mean and spread of the renewable price adjustment."""

    omega_bar: PerSlot = 0.0
    omega_std: PerSlot = 0.0

    def __post_init__(self) -> None:
        object.__setattr__(self, "omega_bar", _per_slot(self.omega_bar, "omega_bar"))
        std = _per_slot(self.omega_std, "omega_std")
        if min(np.atleast_1d(std)) < 0:
            raise InvalidParameterError(f"omega_std must be nonnegative, got {std}")
        object.__setattr__(self, "omega_std", std)

    def at(self, h: int) -> RenewableForecast:
        return RenewableForecast(_resolve(self.omega_bar, h), _resolve(self.omega_std, h))

    def slot_counts(self) -> list[int]:
        return [c for c in map(_slot_count, (self.omega_bar, self.omega_std)) if c is not None]


@dataclass(frozen=True)
class SigmaCorrelation:
    """Homogeneous prior: equal variances ``diag`` and correlation ``sigma``."""

    sigma: float
    diag: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.sigma <= 1.0:
            raise InvalidParameterError(f"sigma must lie in [0, 1], got {self.sigma}")
        if self.diag <= 0:
            raise InvalidParameterError(f"diagonal variance must be positive, got {self.diag}")

    def matrix(self, n: int) -> np.ndarray:
        cov = np.full((n, n), self.sigma * self.diag)
        np.fill_diagonal(cov, self.diag)
        return cov


@dataclass(frozen=True, eq=False)
class PreferencePrior:
    """Gaussian prior N(g_bar * 1, covariance) on the preference profile."""

    g_bar: float
    covariance: np.ndarray

    def __post_init__(self) -> None:
        cov = np.array(self.covariance, dtype=float)
        if cov.ndim != 2 or cov.shape[0] != cov.shape[1] or cov.shape[0] < 1:
            raise InvalidPriorError(f"covariance must be a square matrix, got shape {cov.shape}")
        if self.g_bar <= 0:
            raise InvalidPriorError(f"g_bar must be positive, got {self.g_bar}")
        if not np.allclose(cov, cov.T, rtol=0, atol=1e-12 * max(1.0, np.abs(cov).max())):
            raise InvalidPriorError("covariance must be symmetric")
        if np.any(np.diag(cov) <= 0):
            raise InvalidPriorError("covariance diagonal must be strictly positive")
        cov = (cov + cov.T) / 2
        lowest = np.linalg.eigvalsh(cov)[0]
        if lowest < -1e-10 * np.abs(cov).max():
            raise InvalidPriorError(f"covariance is not positive semidefinite (eigenvalue {lowest:.3g})")
        cov.flags.writeable = False
        object.__setattr__(self, "g_bar", float(self.g_bar))
        object.__setattr__(self, "covariance", cov)

    @classmethod
    def sigma_correlated(cls, n: int, g_bar: float, sigma: float, diag: float = 1.0) -> PreferencePrior:
        if n < 1:
            raise InvalidParameterError(f"population size must be >= 1, got {n}")
        return cls(g_bar, SigmaCorrelation(sigma, diag).matrix(n))

    @property
    def n(self) -> int:
        return self.covariance.shape[0]

    @cached_property
    def homogeneous(self) -> SigmaCorrelation | None:
        """The (sigma, diag) pair if the prior is sigma-correlated, else None."""
        cov = self.covariance
        diag = cov[0, 0]
        scale = 1e-12 * diag
        if np.any(np.abs(np.diag(cov) - diag) > scale):
            return None
        if self.n == 1:
            return SigmaCorrelation(0.0, diag)
        off = cov[~np.eye(self.n, dtype=bool)]
        if np.ptp(off) > scale:
            return None
        sigma = off[0] / diag
        if not 0.0 <= sigma <= 1.0:
            return None
        return SigmaCorrelation(float(sigma), float(diag))

    @cached_property
    def factor(self) -> np.ndarray:
        """Square-root factor ``F`` with ``F @ F.T == covariance``.

        Cholesky when the covariance is positive definite; otherwise a
        symmetric eigen square root so that exactly collinear preferences
        (e.g. sigma = 1) stay exactly collinear in samples.
        """
        try:
            factor = np.linalg.cholesky(self.covariance)
        except np.linalg.LinAlgError:
            values, vectors = np.linalg.eigh(self.covariance)
            values[values < 1e-12 * values[-1]] = 0.0
            factor = vectors * np.sqrt(values)
        factor.flags.writeable = False
        return factor


@dataclass(frozen=True)
class BehaviorConstants:
    """Best-response constants of one behavior model in one slot."""

    lam: float
    mu: float
    tau: float
    alpha: float

    @property
    def rho(self) -> float:
        return 1.0 / (2.0 * (self.tau + self.alpha))


def behavior_constants(model: Behavior | str, gamma: float, kappa: float, alpha: float, n: int) -> BehaviorConstants:
    """(lambda, mu, tau) for a behavior model; ``rho`` follows from tau and alpha."""
    if gamma <= 0 or kappa <= 0 or alpha <= 0:
        raise InvalidParameterError(f"gamma, kappa, alpha must be positive, got {gamma}, {kappa}, {alpha}")
    if n < 1:
        raise InvalidParameterError(f"population size must be >= 1, got {n}")
    model = Behavior(model)
    if model is Behavior.SELFISH:
        return BehaviorConstants(gamma / n, gamma / n, gamma / n, alpha)
    if model is Behavior.ALTRUISTIC:
        return BehaviorConstants(2 * gamma / n, gamma / n, gamma / n, alpha)
    return BehaviorConstants(2 * kappa / n, 0.0, kappa / n, alpha)


def price(total_load, omega, gamma: float, n: int):
    """Per-unit price (gamma / n) * (L + omega)."""
    if n < 1:
        raise InvalidParameterError(f"population size must be >= 1, got {n}")
    return gamma / n * (total_load + omega)


def utility(l_i, total_load, g_i, omega, gamma: float, alpha: float, n: int):
    """Consumer utility: consumption value minus the bill. Broadcasts over arrays."""
    return -l_i * price(total_load, omega, gamma, n) + g_i * l_i - alpha * l_i**2


class SystemMetrics(NamedTuple):
    utility: float
    net_revenue: float
    welfare: float
    cost: float


def system_metrics(consumptions, omega: float, policy: PricingPolicy, preferences) -> SystemMetrics:
    """Aggregate utility, operator net revenue, welfare and generation cost for one slot."""
    l = np.asarray(consumptions, dtype=float)
    g = np.asarray(preferences, dtype=float)
    if l.shape != g.shape or l.ndim != 1:
        raise InvalidParameterError(f"consumptions {l.shape} and preferences {g.shape} must be matching vectors")
    if policy.slot_counts():
        raise InvalidParameterError("system_metrics needs a single-slot policy; resolve it with policy.at(h)")
    gamma, kappa, alpha = policy.gamma, policy.kappa, policy.alpha
    n = l.size
    total = float(l.sum())
    agg = float(np.sum(utility(l, total, g, omega, gamma, alpha, n)))
    cost = kappa / n * total**2
    net_revenue = price(total, omega, gamma, n) * total - cost
    return SystemMetrics(agg, net_revenue, agg + net_revenue, cost)


@dataclass(frozen=True, eq=False)
class Scenario:
    """Everything exogenous about one time zone."""

    prior: PreferencePrior
    policy: PricingPolicy
    forecast: RenewableForecast = field(default_factory=RenewableForecast)
    horizon: int = 1
    behavior: Behavior = Behavior.SELFISH
    info: Info = Info.PRIVATE
    graph: CommunicationGraph | None = None
    seed: int = 0

    def __post_init__(self) -> None:
        object.__setattr__(self, "behavior", Behavior(self.behavior))
        object.__setattr__(self, "info", Info(self.info))
        if self.horizon < 1:
            raise ConfigurationError(f"horizon must be >= 1, got {self.horizon}")
        if (self.info is Info.ACTION_SHARING) != (self.graph is not None):
            raise ConfigurationError("a communication graph is required exactly when info is AS")
        if self.graph is not None and self.graph.n != self.prior.n:
            raise ConfigurationError(f"graph has {self.graph.n} nodes but the population is {self.prior.n}")
        for count in self.policy.slot_counts() + self.forecast.slot_counts():
            if count < self.horizon:
                raise ConfigurationError(f"per-slot sequence of length {count} shorter than horizon {self.horizon}")

    @property
    def n(self) -> int:
        return self.prior.n

    def constants(self, h: int) -> BehaviorConstants:
        p = self.policy.at(h)
        return behavior_constants(self.behavior, p.gamma, p.kappa, p.alpha, self.n)

    def replace(self, **changes) -> Scenario:
        fields = {name: getattr(self, name) for name in self.__dataclass_fields__}
        fields.update(changes)
        return Scenario(**fields)


@dataclass(frozen=True, eq=False)
class SimulationTrace:
    """Realized outcome of one time zone; arrays are indexed [slot] or [slot, agent]."""

    preferences: np.ndarray
    consumptions: np.ndarray
    omega: np.ndarray
    price: np.ndarray
    utilities: np.ndarray
    aggregate_utility: np.ndarray
    net_revenue: np.ndarray
    welfare: np.ndarray
    means: np.ndarray | None = None

    @property
    def totals(self) -> np.ndarray:
        return self.consumptions.sum(axis=1)

    @property
    def horizon(self) -> int:
        return self.consumptions.shape[0]

    @property
    def n(self) -> int:
        return self.consumptions.shape[1]

    @property
    def negative_consumptions(self) -> int:
        """Diagnostic: number of (slot, agent) pairs with negative consumption."""
        return int(np.count_nonzero(self.consumptions < 0))
