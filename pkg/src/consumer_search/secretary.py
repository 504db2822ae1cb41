"""Rank-based optimal stopping over M sequentially sampled stores.

The consumer sees stores one at a time, can only compare each new store with
the ones already seen, and wants to maximise the probability of ending the
period at the single best store.  ``backward_induction`` solves the dynamic
program directly; ``exact_cutoff``/``policy_value`` give the harmonic-sum
closed forms; ``oracle_success_probability`` enumerates every rank order and
is kept deliberately naive so it can serve as an independent check.
"""

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import InvalidArgumentError, ResourceBoundError

ORACLE_MAX_STORES = 10


def _check_store_count(m_total, minimum=1):
    if isinstance(m_total, bool) or not isinstance(m_total, (int, np.integer)):
        raise InvalidArgumentError(f"store count must be an integer, got {m_total!r}")
    if m_total < minimum:
        raise InvalidArgumentError(f"store count must be >= {minimum}, got {m_total}")
    return int(m_total)


def tail_harmonic(m_total):
    """Return ``t`` with ``t[m] = sum(1/k for k in m..M-1)`` for ``m = 1..M``.

    ``t[0]`` is unused (set to ``inf``) and ``t[M] = 0``.  Sums are
    accumulated from the small end in extended precision.
    """
    m_total = _check_store_count(m_total)
    recip = np.ones(m_total, dtype=np.longdouble)
    recip[1:] = recip[1:] / np.arange(1, m_total, dtype=np.longdouble)
    out = np.empty(m_total + 1, dtype=np.longdouble)
    out[m_total] = 0
    # reversed cumulative sum: smallest terms first
    out[1:m_total] = np.cumsum(recip[:0:-1])[::-1]
    out[0] = np.inf
    return out


@dataclass(frozen=True)
class SecretarySolution:
    m_total: int
    y_values: np.ndarray
    u_values: np.ndarray
    exact_cutoff: int
    approx_cutoff: int
    optimal_value: float

    def as_dict(self):
        return {
            "m_total": self.m_total,
            "exact_cutoff": self.exact_cutoff,
            "approx_cutoff": self.approx_cutoff,
            "optimal_value": self.optimal_value,
            "y_values": [float(v) for v in self.y_values],
            "u_values": [float(v) for v in self.u_values],
        }


@dataclass(frozen=True)
class Table1Row:
    """One line of the published policy-value table.

    ``skip_count`` is the printed "m* - 1" column, ``max(0, m* - 1)``.
    ``policy_skip`` is the skip actually used to compute ``y0``; the two
    differ for M = 2..5, where the table evaluates skip 1.
    """

    m_total: int
    m_over_e: float
    m_star_approx: int
    skip_count: int
    policy_skip: int
    y0: float


def backward_induction(m_total):
    """Solve the stopping problem by backward induction from the last store.

    ``Y_m`` is the success probability after rejecting store ``m``; ``U_m``
    is the value of holding a viable ``m``-th store, ``max(m/M, Y_m)``.
    """
    m_total = _check_store_count(m_total)
    big_m = m_total
    y = [0.0] * (big_m + 1)
    u = [0.0] * (big_m + 1)
    y_next, u_next = 0.0, 1.0
    u[big_m] = 1.0
    cutoff = big_m
    for m in range(big_m - 1, 0, -1):
        y_next = (m * y_next + u_next) / (m + 1)
        stop_value = m / big_m
        if stop_value >= y_next:
            u_next = stop_value
            cutoff = m
        else:
            u_next = y_next
        y[m] = y_next
        u[m] = u_next
    # m = 0: nothing seen yet, the first store is always viable
    y[0] = u[1]
    return SecretarySolution(
        m_total=big_m,
        y_values=np.array(y),
        u_values=np.array(u[1:]),
        exact_cutoff=cutoff,
        approx_cutoff=approx_cutoff(big_m),
        optimal_value=float(y[0]),
    )


def exact_cutoff(m_total):
    """Smallest ``m*`` with ``sum_{k=m*}^{M-1} 1/k <= 1``."""
    m_total = _check_store_count(m_total, minimum=2)
    tails = tail_harmonic(m_total)
    # tails is decreasing on 1..M; first index with tail <= 1
    idx = np.searchsorted(-tails[1:], -1.0, side="left")
    return int(idx) + 1


def approx_cutoff(m_total):
    m_total = _check_store_count(m_total)
    return int(math.floor(m_total / math.e))


def policy_value(m_total, skip_count):
    """Success probability of "skip ``skip_count`` stores, then take the first record".

    For ``skip_count = s >= 1`` this is ``(s/M) * sum_{k=s}^{M-1} 1/k``;
    ``s = 0`` means accepting the first store, which is best with
    probability ``1/M``.
    """
    m_total = _check_store_count(m_total)
    if isinstance(skip_count, bool) or not isinstance(skip_count, (int, np.integer)):
        raise InvalidArgumentError(f"skip_count must be an integer, got {skip_count!r}")
    if not 0 <= skip_count < m_total:
        raise InvalidArgumentError(
            f"skip_count must satisfy 0 <= s < M={m_total}, got {skip_count}"
        )
    if skip_count == 0:
        return 1.0 / m_total
    tail = math.fsum(1.0 / k for k in range(skip_count, m_total))
    return skip_count / m_total * tail


def policy_values(m_total):
    """Vector of ``policy_value(M, s)`` for ``s = 0..M-1``."""
    m_total = _check_store_count(m_total)
    tails = tail_harmonic(m_total)
    out = np.empty(m_total, dtype=np.longdouble)
    out[0] = np.longdouble(1) / m_total
    out[1:] = np.arange(1, m_total, dtype=np.longdouble) / m_total * tails[1:m_total]
    return out.astype(float)


def best_skip_by_scan(m_total):
    """Argmax of ``policy_value(M, s)`` over ``s``, smallest ``s`` on ties."""
    return int(np.argmax(policy_values(m_total)))


def oracle_success_probability(m_total, skip_count, exact=False):
    """Enumerate all ``M!`` rank orders and count how often the rule wins.

    Rule: pass over the first ``skip_count`` stores, then take the first store
    better than everything before it; if none appears, take the final store.
    Returns a float, or a :class:`~fractions.Fraction` when ``exact`` is set.
    """
    m_total = _check_store_count(m_total)
    if m_total > ORACLE_MAX_STORES:
        raise ResourceBoundError(
            f"enumeration limited to M <= {ORACLE_MAX_STORES}, got {m_total}"
        )
    if not 0 <= skip_count < m_total:
        raise InvalidArgumentError(
            f"skip_count must satisfy 0 <= s < M={m_total}, got {skip_count}"
        )
    best = m_total - 1
    wins = 0
    total = 0
    for order in itertools.permutations(range(m_total)):
        total += 1
        running = max(order[:skip_count], default=-1)
        chosen = order[-1]
        for rank in order[skip_count:]:
            if rank > running:
                chosen = rank
                break
        if chosen == best:
            wins += 1
    ratio = Fraction(wins, total)
    return ratio if exact else float(ratio)


def table1_skip(m_total):
    """Skip count the published table evaluates for ``M`` stores."""
    m_total = _check_store_count(m_total)
    if m_total == 1:
        return 0
    return max(1, approx_cutoff(m_total) - 1)


def table1(m_list):
    rows = []
    for m_total in m_list:
        m_total = _check_store_count(m_total)
        m_star = approx_cutoff(m_total)
        skip = table1_skip(m_total)
        y0 = 1.0 if m_total == 1 else policy_value(m_total, skip)
        rows.append(
            Table1Row(
                m_total=m_total,
                m_over_e=m_total / math.e,
                m_star_approx=m_star,
                skip_count=max(0, m_star - 1),
                policy_skip=skip,
                y0=y0,
            )
        )
    return rows


def continuous_value(m, m_total):
    """Large-M approximation ``Y(m; M) = (m/M) ln(M/m)``."""
    if m <= 0:
        raise InvalidArgumentError(f"m must be positive, got {m}")
    if m > m_total:
        raise InvalidArgumentError(f"m must not exceed M, got m={m} > M={m_total}")
    return m / m_total * math.log(m_total / m)


def curve(m_total, points):
    """``points`` evenly spaced samples of ``Y(m; M)`` over ``(0, M]``."""
    if points < 1:
        raise InvalidArgumentError(f"points must be >= 1, got {points}")
    if m_total <= 0:
        raise InvalidArgumentError(f"M must be positive, got {m_total}")
    ms = [m_total * (i + 1) / points for i in range(points)]
    return [(m, continuous_value(m, m_total)) for m in ms]
