"""Monte-Carlo simulation of a consumer searching a Markov market.

Every period the consumer starts at the store she bought from last period
(observed for free), samples further stores in a fresh uniformly random
order at cost ``c`` each, stops according to a policy, and buys at the best
store she has seen.  Afterwards every store moves one step along the chain.

Randomness
----------
An episode with ``(master_seed, replication)`` draws from three independent
generators built from ``SeedSequence(master_seed, spawn_key=(replication, k))``:
``k = 0`` drives the market (initial states, transitions, continuous rewards),
``k = 1`` the consumer's start store and exploration orders, ``k = 2`` the
policy's own coin flips.  The market path therefore does not depend on the
policy, which makes replications with equal seeds paired across policies.
``monte_carlo`` runs replication ``r`` with ``spawn_key=(r, k)``, so the
output does not depend on the order replications are executed in.
"""

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from statistics import NormalDist

import numpy as np

from .errors import InvalidArgumentError, NonErgodicError, ResourceBoundError
from .market import StoreState, reservation_surplus, steady_state, transition_step
from .store_values import expected_continuation, solve_continuation

MAX_SEED = 2**64 - 1
MAX_WORK = 2 * 10**9  # replications * periods * stores


class PolicyKind(str, enum.Enum):
    SECRETARY = "secretary"
    RESERVATION = "reservation"
    NO_EXPLORATION = "none"
    RANDOM_EXPLORATION = "random"
    EPSILON_GREEDY = "epsilon"


class RewardMode(str, enum.Enum):
    TWO_POINT = "two_point"
    # harness only: i.i.d. U(0, 1) rewards so store values never tie
    CONTINUOUS = "continuous"


def default_secretary_skip(explore_cap):
    """Skip count for a period with ``explore_cap + 1`` observable stores."""
    return max(1, math.floor((explore_cap + 1) / math.e) - 1)


@dataclass(frozen=True)
class PolicySpec:
    kind: PolicyKind = PolicyKind.SECRETARY
    skip_count: int | None = None
    reservation_reward: float | None = None
    epsilon: float = 0.1
    explore_cap: int | None = None
    # RandomExploration only: always search explore_cap stores
    exhaust: bool = False

    def __post_init__(self):
        object.__setattr__(self, "kind", PolicyKind(self.kind))

    def resolve(self, params):
        """Validate against ``params`` and fill in defaults."""
        m_total = params.m_total
        cap = m_total - 1 if self.explore_cap is None else self.explore_cap
        if int(cap) != cap or not 0 <= cap <= m_total - 1:
            raise InvalidArgumentError(
                f"explore_cap must be an integer in [0, {m_total - 1}], got {cap}"
            )
        if not 0.0 <= self.epsilon <= 1.0:
            raise InvalidArgumentError(f"epsilon must lie in [0, 1], got {self.epsilon}")
        skip = self.skip_count
        if self.kind is PolicyKind.SECRETARY:
            if skip is None:
                skip = default_secretary_skip(cap)
            if int(skip) != skip or skip < 0:
                raise InvalidArgumentError(f"skip_count must be an integer >= 0, got {skip}")
        threshold = self.reservation_reward
        if self.kind is PolicyKind.RESERVATION:
            if threshold is None:
                threshold = reservation_surplus(params)
            if math.isnan(threshold):
                raise InvalidArgumentError("reservation_reward must be a number")
        return replace(
            self,
            explore_cap=int(cap),
            skip_count=None if skip is None else int(skip),
            reservation_reward=threshold,
        )

    def as_dict(self):
        d = asdict(self)
        d["kind"] = self.kind.value
        return d


@dataclass
class EpisodeTrace:
    """Per-period record of one simulated episode."""

    params: object
    policy: PolicySpec
    master_seed: int
    replication: int
    reward_mode: RewardMode
    initial_states: np.ndarray
    searches: np.ndarray
    start_store: np.ndarray
    chosen_store: np.ndarray
    chosen_state: np.ndarray
    reward: np.ndarray
    net_surplus: np.ndarray
    best_reward: np.ndarray
    low_count: np.ndarray
    metadata: dict = field(default_factory=dict)

    @property
    def periods(self):
        return len(self.searches)

    def rows(self):
        for t in range(self.periods):
            yield {
                "t": t,
                "searches": int(self.searches[t]),
                "start_store": int(self.start_store[t]),
                "chosen_store": int(self.chosen_store[t]),
                "chosen_state": int(self.chosen_state[t]),
                "reward": float(self.reward[t]),
                "net_surplus": float(self.net_surplus[t]),
                "best_reward": float(self.best_reward[t]),
                "low_count": int(self.low_count[t]),
            }


@dataclass(frozen=True)
class RegretReport:
    horizon: int
    cumulative_regret: float
    clairvoyant_regret: float
    discounted_net_surplus: float
    mean_searches: float
    best_store_rate: float

    def as_dict(self):
        return asdict(self)


METRICS = (
    "cumulative_regret",
    "clairvoyant_regret",
    "discounted_net_surplus",
    "mean_searches",
    "best_store_rate",
)


@dataclass(frozen=True)
class MetricSummary:
    mean: float
    variance: float
    std_error: float
    ci_low: float
    ci_high: float


@dataclass
class MonteCarloSummary:
    replications: int
    periods: int
    master_seed: int
    confidence: float
    metrics: dict
    samples: dict
    policy: PolicySpec

    def rows(self):
        for name in METRICS:
            s = self.metrics[name]
            yield {
                "metric": name,
                "mean": s.mean,
                "variance": s.variance,
                "std_error": s.std_error,
                "ci_low": s.ci_low,
                "ci_high": s.ci_high,
            }


def _check_seed(seed):
    if isinstance(seed, bool) or int(seed) != seed or not 0 <= seed <= MAX_SEED:
        raise InvalidArgumentError(f"seed must be an unsigned 64-bit integer, got {seed}")
    return int(seed)


def episode_streams(master_seed, replication=0):
    """The three generators (market, orders, policy) for one replication."""
    master_seed = _check_seed(master_seed)
    return tuple(
        np.random.default_rng(
            np.random.SeedSequence(master_seed, spawn_key=(replication, k))
        )
        for k in range(3)
    )


def run_episode(
    params,
    policy,
    periods,
    master_seed,
    *,
    replication=0,
    initial_states=None,
    reward_mode=RewardMode.TWO_POINT,
    fallback=None,
):
    """Simulate ``periods`` periods and return the trace.

    ``fallback`` decides what happens when a secretary or reservation
    consumer reaches ``explore_cap`` without stopping: ``"best"`` buys at
    the best store seen this period (returns within a period are free),
    ``"last"`` buys at the last store sampled, the classical secretary
    convention.  The default is ``"best"`` for two-point rewards and
    ``"last"`` in continuous mode, where the trace is compared with the
    analytic rank model.
    """
    reward_mode = RewardMode(reward_mode)
    if fallback is None:
        fallback = "last" if reward_mode is RewardMode.CONTINUOUS else "best"
    if fallback not in ("best", "last"):
        raise InvalidArgumentError(f"fallback must be 'best' or 'last', got {fallback!r}")
    if isinstance(periods, bool) or int(periods) != periods or periods < 1:
        raise InvalidArgumentError(f"periods must be an integer >= 1, got {periods}")
    periods = int(periods)
    master_seed = _check_seed(master_seed)
    policy = policy.resolve(params)

    m_total = params.m_total
    p = params.transition_matrix()
    market_rng, order_rng, policy_rng = episode_streams(master_seed, replication)

    if initial_states is None:
        try:
            steady_state(p)
        except NonErgodicError as exc:
            raise InvalidArgumentError(
                "frozen market: pass initial_states explicitly"
            ) from exc
        states = (market_rng.random(m_total) < steady_state(p)[0]).astype(np.int8)
    else:
        states = np.asarray(initial_states, dtype=np.int8).copy()
        if states.shape != (m_total,) or not np.isin(states, (0, 1)).all():
            raise InvalidArgumentError(
                f"initial_states must be {m_total} entries coded 1=Low, 0=High"
            )
    initial = states.copy()

    continuous = reward_mode is RewardMode.CONTINUOUS
    cont = expected_continuation(params, solve_continuation(params))
    delta, c = params.delta, params.cost
    s_low, s_high = params.s_low, params.s_high
    kind = policy.kind
    cap = policy.explore_cap
    skip = policy.skip_count
    threshold = policy.reservation_reward
    # value bound for any later store: best reward and best continuation
    value_ceiling = max(s_low, s_high) + delta * float(np.max(cont))
    cont_low, cont_high = delta * float(cont[0]), delta * float(cont[1])

    searches = np.zeros(periods, dtype=np.int64)
    start_store = np.zeros(periods, dtype=np.int64)
    chosen_store = np.zeros(periods, dtype=np.int64)
    chosen_state = np.zeros(periods, dtype=np.int8)
    reward = np.zeros(periods)
    best_reward = np.zeros(periods)
    low_count = np.zeros(periods, dtype=np.int64)

    pos = int(order_rng.integers(m_total))
    for t in range(periods):
        if continuous:
            rewards = market_rng.random(m_total)
        else:
            rewards = np.where(states == StoreState.LOW, s_low, s_high)
        perm = order_rng.permutation(m_total - 1)
        order = [pos] + [int(k) + (k >= pos) for k in perm[:cap]]
        rlist = rewards[order].tolist()

        if kind is PolicyKind.NO_EXPLORATION:
            n, pick = 0, 0
        elif kind is PolicyKind.RANDOM_EXPLORATION or kind is PolicyKind.EPSILON_GREEDY:
            if kind is PolicyKind.RANDOM_EXPLORATION:
                n = cap if policy.exhaust else int(policy_rng.integers(cap + 1))
            else:
                n = 1 if cap >= 1 and policy_rng.random() < policy.epsilon else 0
            seen = rlist[: n + 1]
            pick = seen.index(max(seen))
        elif kind is PolicyKind.RESERVATION:
            n, pick = cap, None
            for j in range(cap + 1):
                if rlist[j] >= threshold:
                    n, pick = j, j
                    break
            if pick is None:
                seen = rlist[: cap + 1]
                pick = cap if fallback == "last" else seen.index(max(seen))
        else:
            n, pick = _secretary_period(
                rlist, order, states, cap, skip, c, cont_low, cont_high,
                value_ceiling, continuous, fallback,
            )

        store = order[pick]
        searches[t] = n
        start_store[t] = pos
        chosen_store[t] = store
        chosen_state[t] = states[store]
        reward[t] = rewards[store]
        best_reward[t] = rewards.max()
        low_count[t] = int(states.sum())

        pos = store
        states = transition_step(states, p, market_rng)

    net = reward - c * searches
    return EpisodeTrace(
        params=params,
        policy=policy,
        master_seed=master_seed,
        replication=replication,
        reward_mode=reward_mode,
        initial_states=initial,
        searches=searches,
        start_store=start_store,
        chosen_store=chosen_store,
        chosen_state=chosen_state,
        reward=reward,
        net_surplus=net,
        best_reward=best_reward,
        low_count=low_count,
        metadata={"skip_count": skip, "explore_cap": cap, "fallback": fallback},
    )


def _secretary_period(
    rlist, order, states, cap, skip, c, cont_low, cont_high, ceiling, continuous, fallback
):
    """Return ``(searches, index into order of the purchase)``.

    Walks the period's value sequence: pass over the first ``skip`` values,
    then stop at the first viable one.  With two-point rewards the walk also
    stops as soon as no later store could possibly be viable, since going on
    would only add search cost before settling at the same store.
    """
    best_r = -math.inf
    best_j = 0
    top_value = -math.inf
    for j in range(cap + 1):
        r = rlist[j]
        if r > best_r:
            best_r, best_j = r, j
        if continuous:
            value = best_r - j * c
        else:
            low = states[order[best_j]] == StoreState.LOW
            value = best_r - j * c + (cont_low if low else cont_high)
        viable = value > top_value
        if viable:
            top_value = value
        if j >= skip and viable:
            return j, best_j
        if not continuous and ceiling - (j + 1) * c <= top_value:
            return j, best_j
    if fallback == "last":
        return cap, cap
    return cap, best_j


def steady_state_mean_reward(params, initial_states=None):
    """Largest per-arm mean reward used as the regret benchmark.

    With an ergodic chain every arm has the stationary mean.  A fully frozen
    market has no stationary distribution; each arm then keeps its initial
    reward forever and the best of those is used.
    """
    p = params.transition_matrix()
    try:
        pi_low, pi_high = steady_state(p)
    except NonErgodicError:
        if initial_states is None:
            raise
        return params.s_low if np.any(np.asarray(initial_states) == 1) else params.s_high
    return pi_low * params.s_low + pi_high * params.s_high


def regret_report(trace, params=None):
    params = trace.params if params is None else params
    horizon = trace.periods
    if horizon < 1:
        raise InvalidArgumentError("trace is empty")
    if trace.reward_mode is RewardMode.CONTINUOUS:
        mu_star = 0.5
    else:
        mu_star = steady_state_mean_reward(params, trace.initial_states)
    net = trace.reward - params.cost * trace.searches
    discounts = params.delta ** np.arange(horizon)
    return RegretReport(
        horizon=horizon,
        cumulative_regret=float(horizon * mu_star - trace.reward.sum()),
        clairvoyant_regret=float(np.sum(trace.best_reward - net)),
        discounted_net_surplus=float(np.sum(discounts * net)),
        mean_searches=float(np.mean(trace.searches)),
        best_store_rate=float(np.mean(trace.reward == trace.best_reward)),
    )


def summarize(samples, confidence=0.95):
    """Mean, unbiased variance, and normal-approximation interval."""
    x = np.asarray(samples, dtype=float)
    n = x.size
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1)) if n > 1 else 0.0
    se = math.sqrt(var / n)
    z = NormalDist().inv_cdf(0.5 + confidence / 2.0)
    return MetricSummary(mean, var, se, mean - z * se, mean + z * se)


def monte_carlo(
    params,
    policy,
    periods,
    replications,
    master_seed,
    *,
    confidence=0.95,
    initial_states=None,
    reward_mode=RewardMode.TWO_POINT,
):
    """Run ``replications`` independent episodes and summarise their reports."""
    if isinstance(replications, bool) or int(replications) != replications or replications < 1:
        raise InvalidArgumentError(f"replications must be an integer >= 1, got {replications}")
    if not 0.0 < confidence < 1.0:
        raise InvalidArgumentError(f"confidence must lie in (0, 1), got {confidence}")
    work = int(replications) * int(periods) * params.m_total
    if work > MAX_WORK:
        raise ResourceBoundError(
            f"replications * periods * stores = {work} exceeds limit {MAX_WORK}"
        )
    master_seed = _check_seed(master_seed)
    reports = [
        regret_report(
            run_episode(
                params,
                policy,
                periods,
                master_seed,
                replication=r,
                initial_states=initial_states,
                reward_mode=reward_mode,
            )
        )
        for r in range(int(replications))
    ]
    samples = {
        name: np.array([getattr(rep, name) for rep in reports]) for name in METRICS
    }
    return MonteCarloSummary(
        replications=int(replications),
        periods=int(periods),
        master_seed=master_seed,
        confidence=confidence,
        metrics={name: summarize(samples[name], confidence) for name in METRICS},
        samples=samples,
        policy=policy.resolve(params),
    )


def paired_difference(a, b, metric="clairvoyant_regret", confidence=0.99):
    """Summary of ``a - b`` per replication; ``a`` and ``b`` share seeds."""
    if a.replications != b.replications or a.master_seed != b.master_seed:
        raise InvalidArgumentError("paired comparison needs equal seeds and replication counts")
    return summarize(a.samples[metric] - b.samples[metric], confidence)
