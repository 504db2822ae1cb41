"""Two-state Markov market and the steady-state search equilibrium algebra.

Stores are either low cost (``LOW``) or high cost (``HIGH``).  State vectors
use the integer coding ``LOW = 1``, ``HIGH = 0``; the transition matrix is
indexed ``[Low, High]`` in that order.
"""

import enum
import math
from dataclasses import dataclass, field, replace

import numpy as np

from .errors import (
    InconsistencyError,
    InvalidArgumentError,
    NonErgodicError,
    UnsupportedConfigurationError,
)

CONSISTENCY_TOL = 1e-9


class StoreState(enum.IntEnum):
    HIGH = 0
    LOW = 1

    @property
    def row(self):
        """Row/column of this state in the transition matrix."""
        return 0 if self is StoreState.LOW else 1


def _prob(name, value):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise InvalidArgumentError(f"{name} must lie in [0, 1], got {value}")


@dataclass(frozen=True)
class MarketParams:
    m_total: int = 10
    beta_low: float = 0.9
    beta_high: float = 0.9
    delta: float = 0.95
    cost: float = 0.3
    s_low: float = 10.0
    s_high: float = 4.0

    def __post_init__(self):
        if isinstance(self.m_total, bool) or int(self.m_total) != self.m_total or self.m_total < 1:
            raise InvalidArgumentError(f"m_total must be an integer >= 1, got {self.m_total}")
        _prob("beta_low", self.beta_low)
        _prob("beta_high", self.beta_high)
        if not (0.0 <= self.delta < 1.0):
            raise InvalidArgumentError(f"delta must lie in [0, 1), got {self.delta}")
        if not self.cost >= 0.0:
            raise InvalidArgumentError(f"cost must be >= 0, got {self.cost}")
        if not (math.isfinite(self.s_low) and math.isfinite(self.s_high)):
            raise InvalidArgumentError("surplus levels must be finite")
        if self.s_low < self.s_high:
            raise InvalidArgumentError(
                f"s_low must be >= s_high, got s_low={self.s_low}, s_high={self.s_high}"
            )

    @classmethod
    def symmetric(cls, beta, **kwargs):
        return cls(beta_low=beta, beta_high=beta, **kwargs)

    @property
    def beta(self):
        """Common persistence probability; only defined for symmetric markets."""
        if self.beta_low != self.beta_high:
            raise UnsupportedConfigurationError(
                "beta is only defined when beta_low == beta_high "
                f"(got {self.beta_low}, {self.beta_high})"
            )
        return self.beta_low

    def with_(self, **changes):
        return replace(self, **changes)

    def transition_matrix(self):
        return transition_matrix(self.beta_low, self.beta_high)

    def rewards(self):
        """Reward vector indexed ``[Low, High]``."""
        return np.array([self.s_low, self.s_high], dtype=float)


@dataclass(frozen=True)
class EquilibriumReport:
    s_reservation: float
    v_low: float
    v_high: float
    residual: float = field(default=0.0)

    def as_dict(self):
        return {
            "s_reservation": self.s_reservation,
            "v_low": self.v_low,
            "v_high": self.v_high,
            "residual": self.residual,
        }


def transition_matrix(beta_low, beta_high):
    _prob("beta_low", beta_low)
    _prob("beta_high", beta_high)
    return np.array([[beta_low, 1.0 - beta_low], [1.0 - beta_high, beta_high]])


def reward(state, params):
    return params.s_low if StoreState(state) is StoreState.LOW else params.s_high


def surplus_linear_demand(intercept, slope, price):
    """Consumer surplus under ``D(p) = max(0, a - b p)`` at ``price``."""
    if intercept <= 0 or slope <= 0:
        raise InvalidArgumentError(
            f"intercept and slope must be positive, got a={intercept}, b={slope}"
        )
    if price < 0:
        raise InvalidArgumentError(f"price must be >= 0, got {price}")
    if price >= intercept / slope:
        return 0.0
    return (intercept - slope * price) ** 2 / (2.0 * slope)


def steady_state(p_matrix):
    """Stationary distribution ``(pi_low, pi_high)`` of a 2x2 chain."""
    p = np.asarray(p_matrix, dtype=float)
    if p.shape != (2, 2):
        raise InvalidArgumentError(f"expected a 2x2 matrix, got shape {p.shape}")
    if np.any(p < 0) or np.any(p > 1) or not np.allclose(p.sum(axis=1), 1.0, atol=1e-12, rtol=0):
        raise InvalidArgumentError("transition matrix must be row-stochastic")
    leave_low = p[0, 1]
    leave_high = p[1, 0]
    total = leave_low + leave_high
    if total == 0.0:
        raise NonErgodicError(
            "both states are absorbing; the stationary distribution is not unique"
        )
    pi_low = leave_high / total
    return np.array([pi_low, 1.0 - pi_low])


def reservation_surplus(params):
    """Surplus at the reservation price, ``S_L + (4 beta delta - 2 delta - 2) c``."""
    beta = params.beta
    d = params.delta
    return params.s_low + (4.0 * beta * d - 2.0 * d - 2.0) * params.cost


def implied_search_cost(params, s_reservation):
    """Search cost that makes ``s_reservation`` the indifference surplus.

    Inverse of :func:`reservation_surplus` in the cost argument.  At
    ``beta = 1`` it reduces to ``(S_L - S_r) / (2 (1 - delta))`` and at
    ``beta = 1/2`` to ``(S_L - S_r) / 2``.
    """
    beta = params.beta
    d = params.delta
    return (params.s_low - s_reservation) / (2.0 * (1.0 + d - 2.0 * beta * d))


def fishman_residuals(params, s_reservation, v_low, v_high):
    """Residuals of the three equilibrium equations at ``(v_low, v_high)``."""
    beta = params.beta
    d = params.delta
    r_high = v_high - (s_reservation + d * (beta * v_high + (1.0 - beta) * v_low))
    r_low = v_low - (params.s_low + d * (beta * v_low + (1.0 - beta) * v_high))
    r_indiff = v_high - (-params.cost + 0.5 * v_high + 0.5 * v_low)
    return r_high, r_low, r_indiff


def solve_fishman_system(params, s_reservation):
    """Solve the steady-state value system and check search indifference.

    The two Bellman equations

        V_H = S_r + delta [beta V_H + (1 - beta) V_L]
        V_L = S_L + delta [beta V_L + (1 - beta) V_H]

    are solved exactly; the indifference condition
    ``V_H = -c + V_H / 2 + V_L / 2`` must then hold, otherwise
    :class:`InconsistencyError` is raised with its residual.
    """
    beta = params.beta
    d = params.delta
    gap = (params.s_low - s_reservation) / (1.0 - d * (2.0 * beta - 1.0))
    v_low = (params.s_low - d * (1.0 - beta) * gap) / (1.0 - d)
    v_high = v_low - gap
    _, _, r_indiff = fishman_residuals(params, s_reservation, v_low, v_high)
    if abs(r_indiff) > CONSISTENCY_TOL:
        raise InconsistencyError(
            f"indifference condition violated by {r_indiff:.3e} "
            f"(reservation surplus {s_reservation} inconsistent with cost {params.cost})",
            residual=r_indiff,
        )
    return EquilibriumReport(
        s_reservation=float(s_reservation),
        v_low=float(v_low),
        v_high=float(v_high),
        residual=float(r_indiff),
    )


def equilibrium(params):
    """Reservation surplus and the values it induces."""
    return solve_fishman_system(params, reservation_surplus(params))


def initial_states(p_matrix, m_total, rng):
    """Draw ``m_total`` i.i.d. states from the stationary distribution."""
    pi_low = steady_state(p_matrix)[0]
    return (rng.random(m_total) < pi_low).astype(np.int8)


def transition_step(states, p_matrix, rng):
    """Advance every store one period; visited or not makes no difference."""
    states = np.asarray(states, dtype=np.int8)
    p = np.asarray(p_matrix, dtype=float)
    stay = np.where(states == StoreState.LOW, p[0, 0], p[1, 1])
    keep = rng.random(states.shape[0]) < stay
    return np.where(keep, states, 1 - states).astype(np.int8)
