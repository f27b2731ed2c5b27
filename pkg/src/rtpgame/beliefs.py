"""Sequential game filter: Gaussian belief propagation inside one time zone.

Each agent's mean estimate of the augmented profile ``g~ = [g, g_bar]`` is a
public linear map ``T_j @ g~`` with error covariance ``M_j``. Both depend only
on the prior and on equilibrium coefficients, so every agent can emulate
everyone's filter. We compute that public part once per slot and share it;
each agent then updates its own mean from its own observation.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .equilibrium import StrategyCoefficients, solve_bne, solve_offsets
from .errors import ConfigurationError, InvalidParameterError, InvalidPriorError, NumericalError
from .model import BehaviorConstants, Info, PreferencePrior, Scenario
from .network import CommunicationGraph

GAIN_RCOND = 1e-10
PSD_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class BeliefState:
    """Public weights/covariances of all agents plus each agent's own mean.

    ``weights[j]`` and ``covariances[j]`` are (N+1, N+1); ``means[i]`` is
    agent i's local estimate E[g~ | I_i].
    """

    weights: np.ndarray
    covariances: np.ndarray
    means: np.ndarray

    @property
    def n(self) -> int:
        return self.means.shape[0]


@dataclass(frozen=True, eq=False)
class ObservationMatrix:
    """What one agent observes after a slot: ``H @ g~ + offset``."""

    H: np.ndarray
    offset: np.ndarray

    @property
    def dim(self) -> int:
        return self.H.shape[0]

    def predict(self, mean: np.ndarray) -> np.ndarray:
        return self.H @ mean + self.offset


def _conditioning_ratios(prior: PreferencePrior) -> np.ndarray:
    cov = prior.covariance
    diag = np.diag(cov)
    if np.any(diag <= 0):
        raise InvalidPriorError("covariance diagonal must be strictly positive")
    # ratios[k, j] = sigma_kj / sigma_jj: weight of g_j in E[g_k | g_j]
    return cov / diag[None, :]


def prior_weights(prior: PreferencePrior) -> tuple[np.ndarray, np.ndarray]:
    """Estimation weights and error covariances of every agent at the zone start."""
    n, m = prior.n, prior.n + 1
    ratios = _conditioning_ratios(prior)
    full = np.zeros((m, m))
    full[:n, :n] = prior.covariance

    weights = np.zeros((n, m, m))
    covariances = np.empty((n, m, m))
    for j in range(n):
        weights[j, :n, j] = ratios[:, j]
        weights[j, :n, n] = 1.0 - ratios[:, j]
        weights[j, j, :] = 0.0
        weights[j, j, j] = 1.0
        weights[j, n, n] = 1.0
        cov = full - np.outer(full[:, j], full[j, :]) / full[j, j]
        cov[j, :] = cov[:, j] = 0.0
        covariances[j] = (cov + cov.T) / 2
    return weights, covariances


def init_mean(prior: PreferencePrior, i: int, g_i: float) -> np.ndarray:
    """Agent i's mean of g~ from its own preference alone."""
    if not 0 <= i < prior.n:
        raise InvalidParameterError(f"agent {i} outside population of {prior.n}")
    ratios = _conditioning_ratios(prior)[:, i]
    mean = np.empty(prior.n + 1)
    mean[: prior.n] = (1.0 - ratios) * prior.g_bar + ratios * g_i
    mean[i] = g_i
    mean[prior.n] = prior.g_bar
    return mean


def init_means(prior: PreferencePrior, g: np.ndarray) -> np.ndarray:
    """Row i is :func:`init_mean` for agent i; vectorized over the population."""
    g = np.asarray(g, dtype=float)
    if g.shape != (prior.n,):
        raise InvalidParameterError(f"preference vector must have length {prior.n}")
    ratios = _conditioning_ratios(prior).T
    means = np.empty((prior.n, prior.n + 1))
    means[:, : prior.n] = (1.0 - ratios) * prior.g_bar + ratios * g[:, None]
    np.fill_diagonal(means, g)
    means[:, prior.n] = prior.g_bar
    return means


def init_beliefs(prior: PreferencePrior, g: np.ndarray) -> BeliefState:
    """Zone-start beliefs for every agent; agent i only uses ``g[i]``."""
    means = init_means(prior, g)
    weights, covariances = prior_weights(prior)
    return BeliefState(weights, covariances, means)


def observation_matrix(
    info: Info | str,
    graph: CommunicationGraph | None,
    coeffs: StrategyCoefficients,
    weights: np.ndarray,
    i: int,
) -> ObservationMatrix:
    """Observation of agent i after the slot, as a linear function of g~."""
    info = Info(info)
    n, m = coeffs.n, coeffs.n + 1
    if info is Info.PRIVATE:
        return ObservationMatrix(np.zeros((0, m)), np.zeros(0))
    rows = coeffs.effective(weights)
    if info is Info.BROADCAST:
        return ObservationMatrix(rows.sum(axis=0, keepdims=True), np.array([coeffs.r.sum()]))
    if graph is None:
        raise ConfigurationError("action sharing needs a communication graph")
    if graph.n != n:
        raise ConfigurationError(f"graph has {graph.n} nodes, population is {n}")
    nbrs = list(graph.neighbors(i))
    return ObservationMatrix(rows[nbrs], coeffs.r[nbrs])


def observe(info: Info | str, graph: CommunicationGraph | None, i: int, consumptions: np.ndarray) -> np.ndarray:
    """The realized quantities agent i sees after the slot."""
    info = Info(info)
    if info is Info.PRIVATE:
        return np.zeros(0)
    if info is Info.BROADCAST:
        return np.array([consumptions.sum()])
    return consumptions[list(graph.neighbors(i))]


def kalman_gain(M: np.ndarray, H: np.ndarray, reference: float = 0.0) -> np.ndarray:
    """``M H' (H M H')^+`` with an SVD pseudo-inverse.

    Singular values below ``GAIN_RCOND * |H|^2 * max(|M|, reference)`` (or
    below that fraction of the largest one) are dropped. ``reference`` is the
    spectral norm of the prior covariance: once an agent has learned
    everything, ``M`` is pure round-off and must not be inverted as signal.
    """
    H = np.atleast_2d(H)
    if H.shape[0] == 0 or not np.any(H):
        return np.zeros((M.shape[0], H.shape[0]))
    S = H @ M @ H.T
    u, s, vt = np.linalg.svd((S + S.T) / 2)
    scale = max(s[0], np.linalg.norm(H, 2) ** 2 * max(np.linalg.norm(M, 2), reference))
    keep = s > GAIN_RCOND * scale
    if scale == 0 or not keep.any():
        return np.zeros((M.shape[0], H.shape[0]))
    S_pinv = (vt[keep].T / s[keep]) @ u[:, keep].T
    return M @ H.T @ S_pinv


def propagate_weights(T: np.ndarray, K: np.ndarray, H: np.ndarray) -> np.ndarray:
    if K.shape[1] == 0:
        return T.copy()
    return T + K @ (H - H @ T)


def propagate_covariance(M: np.ndarray, K: np.ndarray, H: np.ndarray) -> np.ndarray:
    """Error covariance after the update, in Joseph form ``(I - K H) M (I - K H)'``.

    For the optimal gain this equals ``M - K H M``; the congruence form stays
    positive semidefinite up to round-off of order ``eps |I - K H|^2 |M|``,
    which is large when an observation is almost fully anticipated (huge
    gain). Negative eigenvalues within that bound are clamped to 0; larger
    ones raise.
    """
    if K.shape[1] == 0:
        return M.copy()
    A = np.eye(M.shape[0]) - K @ H
    nxt = A @ M @ A.T
    nxt = (nxt + nxt.T) / 2
    roundoff = M.shape[0] * np.finfo(float).eps * np.linalg.norm(A, 2) ** 2 * np.linalg.norm(M, 2)
    tol = PSD_TOL * max(1.0, np.abs(M).max()) + roundoff
    values, vectors = np.linalg.eigh(nxt)
    if values[0] < -tol:
        raise NumericalError(f"covariance update lost positive semidefiniteness (eigenvalue {values[0]:.3g})")
    if values[0] < 0:
        exact = np.all(nxt == 0, axis=1)
        nxt = (vectors * np.clip(values, 0, None)) @ vectors.T
        nxt = (nxt + nxt.T) / 2
        nxt[exact, :] = 0.0
        nxt[:, exact] = 0.0
    return nxt


def local_mean_update(mean: np.ndarray, K: np.ndarray, observed: np.ndarray, predicted: np.ndarray) -> np.ndarray:
    if K.shape[1] == 0:
        return mean.copy()
    return mean + K @ (observed - predicted)


@dataclass(frozen=True, eq=False)
class SlotPlan:
    """The public part of one slot: identical for every agent and every realization."""

    constants: BehaviorConstants
    omega_bar: float
    coeffs: StrategyCoefficients
    weights: np.ndarray
    covariances: np.ndarray
    observations: tuple[ObservationMatrix, ...]
    gains: tuple[np.ndarray, ...]
    next_weights: np.ndarray
    next_covariances: np.ndarray
    selector: np.ndarray | None = None

    @cached_property
    def stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """All agents' observation rows in one block: (owner, selector, H, offset, K').

        ``selector @ consumptions`` gives every observed scalar; row k belongs
        to agent ``owner[k]``.
        """
        m = self.weights.shape[1]
        dims = [obs.dim for obs in self.observations]
        owner = np.repeat(np.arange(len(dims)), dims)
        if not owner.size:
            empty = np.zeros((0, m))
            return owner, np.zeros((0, len(dims))), empty, np.zeros(0), empty
        H = np.concatenate([obs.H for obs in self.observations])
        offset = np.concatenate([obs.offset for obs in self.observations])
        gains_t = np.concatenate([K.T for K in self.gains])
        return owner, self.selector, H, offset, gains_t


def plan_slot(
    scenario: Scenario,
    h: int,
    weights: np.ndarray,
    covariances: np.ndarray,
    previous: SlotPlan | None = None,
) -> SlotPlan:
    """Equilibrium, observation matrices, gains and weight/covariance updates (full-network emulation)."""
    constants = scenario.constants(h)
    omega_bar = scenario.forecast.at(h).omega_bar
    static = scenario.info is Info.PRIVATE and previous is not None and previous.constants == constants
    if static:
        coeffs = previous.coeffs
        if omega_bar != previous.omega_bar:
            coeffs = StrategyCoefficients(coeffs.v, solve_offsets(constants, scenario.n, omega_bar))
    else:
        coeffs = solve_bne(constants, weights, omega_bar)

    if scenario.info is Info.PRIVATE:
        m = scenario.n + 1
        empty = ObservationMatrix(np.zeros((0, m)), np.zeros(0))
        observations = (empty,) * scenario.n
        gains = (np.zeros((m, 0)),) * scenario.n
        return SlotPlan(constants, omega_bar, coeffs, weights, covariances, observations, gains, weights, covariances)

    observations, gains, next_w, next_c = [], [], np.empty_like(weights), np.empty_like(covariances)
    selector = []
    reference = np.linalg.norm(scenario.prior.covariance, 2)
    for j in range(scenario.n):
        obs = observation_matrix(scenario.info, scenario.graph, coeffs, weights, j)
        K = kalman_gain(covariances[j], obs.H, reference)
        observations.append(obs)
        gains.append(K)
        next_w[j] = propagate_weights(weights[j], K, obs.H)
        next_c[j] = propagate_covariance(covariances[j], K, obs.H)
        if scenario.info is Info.BROADCAST:
            selector.append(np.ones((1, scenario.n)))
        else:
            selector.append(np.eye(scenario.n)[list(scenario.graph.neighbors(j))])
    return SlotPlan(
        constants, omega_bar, coeffs, weights, covariances, tuple(observations), tuple(gains), next_w, next_c,
        np.concatenate(selector),
    )


def plan_time_zone(scenario: Scenario) -> list[SlotPlan]:
    """Public plans for every slot of the zone; reusable across realizations."""
    weights, covariances = prior_weights(scenario.prior)
    plans: list[SlotPlan] = []
    for h in range(scenario.horizon):
        plan = plan_slot(scenario, h, weights, covariances, plans[-1] if plans else None)
        plans.append(plan)
        weights, covariances = plan.next_weights, plan.next_covariances
    return plans


def play_slot(scenario: Scenario, plan: SlotPlan, means: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Consume according to the plan, then let each agent update its own mean."""
    consumptions = plan.coeffs.play(means)
    if scenario.info is Info.PRIVATE:
        return consumptions, means
    # batched form of local_mean_update(means[i], K_i, observed_i, predicted_i) for every i
    owner, selector, H, offset, gains_t = plan.stacked
    innovation = selector @ consumptions - (np.einsum("km,km->k", H, means[owner]) + offset)
    nxt = means.copy()
    np.add.at(nxt, owner, gains_t * innovation[:, None])
    return consumptions, nxt


def filter_step(scenario: Scenario, h: int, state: BeliefState) -> tuple[np.ndarray, BeliefState]:
    """One slot of the filter for the whole population: play, observe, update."""
    if not 0 <= h < scenario.horizon:
        raise InvalidParameterError(f"slot {h} outside horizon {scenario.horizon}")
    plan = plan_slot(scenario, h, state.weights, state.covariances)
    consumptions, means = play_slot(scenario, plan, state.means)
    return consumptions, BeliefState(plan.next_weights, plan.next_covariances, means)


def plan_demand_variance(prior: PreferencePrior, plans: list[SlotPlan]) -> np.ndarray:
    """Exact Var(L_h / N) per slot; consumption is linear in the preference profile."""
    n = prior.n
    out = np.empty(len(plans))
    for h, plan in enumerate(plans):
        c = plan.coeffs.effective(plan.weights).sum(axis=0)[:n]
        out[h] = c @ prior.covariance @ c / n**2
    return out
