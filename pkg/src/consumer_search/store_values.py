"""Per-period store values for one exploration sequence.

Each period the consumer sits at last period's store and may sample further
stores at cost ``c`` each.  After ``j`` extra samples the value of stopping
is the best reward seen so far, less ``j * c``, plus the discounted value of
starting next period at the running-best store.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgumentError
from .market import StoreState


@dataclass(frozen=True)
class ContinuationValues:
    v0_low: float
    v0_high: float

    def as_array(self):
        return np.array([self.v0_low, self.v0_high])


@dataclass(frozen=True)
class ValueSequence:
    values: np.ndarray
    best_index: int
    observed_states: tuple


def solve_continuation(params):
    """Fixed point of ``V = pi + delta P V`` for the two store states.

    Uses that rows of ``P`` sum to one: the gap ``V_L - V_H`` solves a scalar
    equation, after which ``V_L`` follows from its own row.
    """
    d = params.delta
    if not 0.0 <= d < 1.0:
        raise InvalidArgumentError(f"delta must lie in [0, 1), got {d}")
    b_l, b_h = params.beta_low, params.beta_high
    gap = (params.s_low - params.s_high) / (1.0 - d * (b_l + b_h - 1.0))
    v_low = (params.s_low - d * (1.0 - b_l) * gap) / (1.0 - d)
    return ContinuationValues(v0_low=float(v_low), v0_high=float(v_low - gap))


def bellman_residual(params, continuation):
    """Sup-norm of ``V - (pi + delta P V)``."""
    v = continuation.as_array()
    p = params.transition_matrix()
    return float(np.max(np.abs(v - (params.rewards() + params.delta * p @ v))))


def expected_continuation(params, continuation):
    """``sum_s P[x, s] V_0(s)`` for ``x`` in ``[Low, High]``."""
    return params.transition_matrix() @ continuation.as_array()


def value_sequence(observed, params, continuation):
    """Values ``V_0..V_{n-1}`` for stores observed in ``observed`` order."""
    observed = tuple(StoreState(s) for s in observed)
    if not observed:
        raise InvalidArgumentError("at least one observed store is required")
    if len(observed) > params.m_total:
        raise InvalidArgumentError(
            f"observed {len(observed)} stores but the market has {params.m_total}"
        )
    cont = expected_continuation(params, continuation)
    values = np.empty(len(observed))
    best_reward = -np.inf
    best_state = None
    for j, state in enumerate(observed):
        r = params.s_low if state is StoreState.LOW else params.s_high
        # strict: earliest store keeps the running-best slot on ties
        if r > best_reward:
            best_reward, best_state = r, state
        values[j] = best_reward - j * params.cost + params.delta * cont[best_state.row]
    return ValueSequence(
        values=values,
        best_index=int(np.argmax(values)),
        observed_states=observed,
    )


def viable_flags(values):
    """Flag entries that strictly beat every earlier entry."""
    if isinstance(values, ValueSequence):
        values = values.values
    flags = []
    running = -np.inf
    for v in values:
        flags.append(bool(v > running))
        running = max(running, v)
    return flags
