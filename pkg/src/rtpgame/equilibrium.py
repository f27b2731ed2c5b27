"""Bayesian Nash equilibrium of the linear-quadratic consumption game.

Agent ``i`` believes the augmented profile ``g~ = [g_1..g_N, g_bar]`` has mean
``T_i @ g~`` (the estimation weights ``T_i`` are public). Its equilibrium
consumption is ``v_i @ E_i[g~] + r_i``.

Matching coefficients of ``g~`` in the fixed point gives, for every ``i``::

    v_i' T_i + rho*lam * sum_{j != i} v_j' T_j T_i = rho * e_i'
    r_i      + rho*lam * sum_{j != i} r_j          = -rho * mu * omega_bar

The first system is singular in ``v`` whenever some ``T_i`` is rank deficient
(always the case under private information), because only the effective row
``w_i' = v_i' T_i`` is identified. We therefore solve the well-posed system in
``w``::

    w_i + rho*lam * sum_{j != i} T_i' w_j = rho * e_i

and recover the canonical ``v_i = rho*e_i - rho*lam * sum_{j != i} w_j``, which
satisfies the original equations exactly because row ``i`` of ``T_i`` is
``e_i'`` (agents know their own preference).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import DegenerateParameterError, InvalidParameterError, SolverError
from .model import BehaviorConstants

RESIDUAL_TOL = 1e-9


@dataclass(frozen=True, eq=False)
class StrategyCoefficients:
    """Linear strategies: row ``v[i]`` weighs agent i's mean estimate, ``r[i]`` is its offset."""

    v: np.ndarray
    r: np.ndarray

    @property
    def n(self) -> int:
        return self.v.shape[0]

    def effective(self, weights: np.ndarray) -> np.ndarray:
        """Rows ``v_i' T_i``: each agent's consumption as a function of the realized profile."""
        return np.einsum("ia,iab->ib", self.v, weights)

    def play(self, means: np.ndarray) -> np.ndarray:
        """Consumptions given every agent's own mean estimate (shape (N, N+1))."""
        return np.einsum("ia,ia->i", self.v, means) + self.r


@dataclass(frozen=True)
class ClosedFormCoefficients:
    """Symmetric strategy ``a*(g_i - c) + b*(c - mu*omega_bar)``.

    ``c`` is the prior mean under private information and the realized
    population average under complete information.
    """

    a: float
    b: float
    mu: float
    info: str

    def strategy(self, g: np.ndarray, g_bar: float, omega_bar: float = 0.0) -> np.ndarray:
        g = np.asarray(g, dtype=float)
        center = g_bar if self.info == "private" else g.mean()
        return self.a * (g - center) + self.b * (center - self.mu * omega_bar)

    def embed(self, n: int, omega_bar: float = 0.0) -> StrategyCoefficients:
        """Express the private-information strategy in (v, r) form for the prior weights.

        With prior weights agent ``i`` knows ``g_i`` and ``g_bar`` exactly, so
        ``v_i = a*e_i + (b - a)*e_N`` reproduces ``a*(g_i - g_bar) + b*g_bar``.
        """
        if self.info != "private":
            raise InvalidParameterError("only private-information coefficients embed into prior weights")
        v = self.a * np.eye(n, n + 1)
        v[:, n] = self.b - self.a
        return StrategyCoefficients(v, np.full(n, -self.b * self.mu * omega_bar))


def _check_weights(weights: np.ndarray) -> np.ndarray:
    weights = np.asarray(weights, dtype=float)
    if weights.ndim != 3 or weights.shape[1:] != (weights.shape[0] + 1,) * 2:
        raise InvalidParameterError(f"weights must have shape (N, N+1, N+1), got {weights.shape}")
    return weights


def _lu_solve(matrix: np.ndarray, rhs: np.ndarray, what: str) -> np.ndarray:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(matrix, check_finite=False)
    anorm = np.abs(matrix).sum(axis=0).max()
    rcond, _ = scipy.linalg.lapack.dgecon(lu, anorm, norm="1")
    if not rcond > np.finfo(float).eps:
        condition = math.inf if rcond == 0 else 1.0 / rcond
        raise SolverError(f"{what} system is singular (condition estimate {condition:.3g})", condition)
    return scipy.linalg.lu_solve((lu, piv), rhs, check_finite=False)


def solve_bne(constants: BehaviorConstants, weights: np.ndarray, omega_bar: float = 0.0) -> StrategyCoefficients:
    """Equilibrium coefficients for all agents given everyone's estimation weights."""
    weights = _check_weights(weights)
    n, m = weights.shape[0], weights.shape[1]
    rho, coupling = constants.rho, constants.rho * constants.lam

    blocks = coupling * np.broadcast_to(weights.transpose(0, 2, 1)[:, :, None, :], (n, m, n, m)).copy()
    for i in range(n):
        blocks[i, :, i, :] = np.eye(m)
    rhs = rho * np.eye(n, m)
    w = _lu_solve(blocks.reshape(n * m, n * m), rhs.reshape(-1), "strategy-weight").reshape(n, m)
    v = rhs - coupling * (w.sum(axis=0) - w)

    coeffs = StrategyCoefficients(v, solve_offsets(constants, n, omega_bar))
    residual = equilibrium_residual(coeffs, weights, constants, omega_bar)
    if residual > RESIDUAL_TOL:
        raise SolverError(f"equilibrium residual {residual:.3g} exceeds {RESIDUAL_TOL:g}")
    return coeffs


def solve_offsets(constants: BehaviorConstants, n: int, omega_bar: float = 0.0) -> np.ndarray:
    """Constant terms ``r``; they only depend on the announced renewable mean."""
    coupling = constants.rho * constants.lam
    matrix = (1.0 - coupling) * np.eye(n) + coupling
    return _lu_solve(matrix, np.full(n, -constants.rho * constants.mu * omega_bar), "offset")


def equilibrium_residual(
    coeffs: StrategyCoefficients, weights: np.ndarray, constants: BehaviorConstants, omega_bar: float = 0.0
) -> float:
    """Max-norm violation of the coefficient fixed-point equations (0 at a BNE)."""
    weights = _check_weights(weights)
    n, m = weights.shape[0], weights.shape[1]
    if coeffs.v.shape != (n, m) or coeffs.r.shape != (n,):
        raise InvalidParameterError("coefficients and weights are dimensionally inconsistent")
    rho, coupling = constants.rho, constants.rho * constants.lam
    w = coeffs.effective(weights)
    others = np.einsum("ia,iab->ib", w.sum(axis=0) - w, weights)
    res_v = w + coupling * others - rho * np.eye(n, m)
    res_r = coeffs.r + coupling * (coeffs.r.sum() - coeffs.r) + rho * constants.mu * omega_bar
    return float(max(np.abs(res_v).max(), np.abs(res_r).max()))


def _check_sigma(sigma: float, n: int) -> None:
    if not 0.0 <= sigma <= 1.0:
        raise InvalidParameterError(f"sigma must lie in [0, 1], got {sigma}")
    if n < 1:
        raise InvalidParameterError(f"population size must be >= 1, got {n}")


def closed_form_private(constants: BehaviorConstants, sigma: float, n: int) -> ClosedFormCoefficients:
    """Symmetric equilibrium when agents know only their own preference.

    ``sigma`` is the correlation coefficient of the homogeneous prior, so any
    common diagonal variance is allowed.
    """
    _check_sigma(sigma, n)
    rho, lam = constants.rho, constants.lam
    a = rho / (1 + lam * rho * sigma * (n - 1))
    b = rho / (1 + lam * rho * (n - 1))
    return ClosedFormCoefficients(a, b, constants.mu, "private")


def closed_form_complete(constants: BehaviorConstants, sigma: float, n: int) -> ClosedFormCoefficients:
    """Symmetric equilibrium when agents also know the population total of preferences."""
    _check_sigma(sigma, n)
    rho, lam = constants.rho, constants.lam
    if math.isclose(lam * rho, 1.0, rel_tol=1e-12):
        raise DegenerateParameterError("lambda * rho == 1 makes the complete-information weight undefined")
    a = rho / (1 - lam * rho)
    b = rho / (1 + lam * rho * (n - 1))
    return ClosedFormCoefficients(a, b, constants.mu, "complete")


def best_response(constants: BehaviorConstants, g_i, omega_bar, expected_sum_of_others):
    """Consumption maximizing expected payoff given the expected total of the others."""
    return (g_i - constants.mu * omega_bar - constants.lam * expected_sum_of_others) * constants.rho


def best_response_iteration(
    constants: BehaviorConstants,
    g: np.ndarray,
    omega_bar: float = 0.0,
    damping: float = 1.0,
    tol: float = 1e-13,
    max_iter: int = 100_000,
) -> np.ndarray:
    """Jacobi best-response dynamics under full information, started from zero.

    ``damping`` < 1 mixes in the previous iterate; it is needed when
    ``rho*lam*(N-1) >= 1`` (e.g. altruists with gamma > alpha) where plain
    Jacobi is not a contraction.
    """
    g = np.asarray(g, dtype=float)
    s = np.zeros_like(g)
    for _ in range(max_iter):
        target = best_response(constants, g, omega_bar, s.sum() - s)
        step = damping * (target - s)
        s = s + step
        if np.abs(step).max() <= tol * max(1.0, np.abs(s).max()):
            return s
    raise SolverError(f"best-response iteration did not converge in {max_iter} steps")
