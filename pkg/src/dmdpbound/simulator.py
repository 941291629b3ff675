"""Seeded simulation of learning policies on a DMDP and regret accounting.

Regret is reported in expectation given the visit counts,
``sum_e N_T(e) * (g* - r(e))``, so reward noise only enters through the
policy's decisions. Rewards are drawn from a counter-based generator keyed by
``(seed, step, edge index)``: a run is a pure function of its inputs and
independent replications never share a stream.
"""

from __future__ import annotations

import math
import statistics
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Mapping, Protocol, Sequence

import numpy as np

from . import _kernels
from .errors import (
    NonDisjointError,
    PolicyContractError,
    RatioUndefinedError,
    StructuralError,
    UnsupportedError,
)
from .graph import enumerate_simple_cycles, optimal_cycle, shared_edges
from .model import Dmdp, Edge, Family, RewardModel, validate

_MASK = (1 << 64) - 1


def _key(x: int) -> np.uint64:
    return np.uint64(x & _MASK)


def uniform(seed: int, step: int, edge: int, stream: int = 0) -> float:
    """Deterministic uniform in [0, 1) for one (seed, step, edge, stream) key."""
    return float(_kernels.uniform(_key(seed), _key(step), _key(edge), _key(stream)))


def sample_reward(model: RewardModel, seed: int, step: int, edge: int) -> float:
    gaussian = model.family is Family.GAUSSIAN
    sd = math.sqrt(model.variance) if gaussian else 0.0
    return float(_kernels.draw(_key(seed), _key(step), _key(edge), model.mean, gaussian, sd))


@dataclass
class EnvironmentState:
    dmdp: Dmdp
    current_state: str
    rng_seed: int
    step_count: int = 0


def step(env: EnvironmentState, action: str) -> tuple[float, str]:
    """Take ``action``, sample its reward and advance the environment in place."""
    e = Edge(env.current_state, action)
    idx = env.dmdp.edge_index.get(e)
    if idx is None:
        raise PolicyContractError(
            f"action {action!r} is not available at state {env.current_state!r}", env.step_count
        )
    reward = sample_reward(env.dmdp.rewards[e], env.rng_seed, env.step_count, idx)
    env.current_state = env.dmdp.next_state[e]
    env.step_count += 1
    return reward, env.current_state


@dataclass
class Statistics:
    """What a learner may look at: per-edge counts and reward sums, state and time.

    Arrays are indexed like ``dmdp.edges``. Policies must treat them as read-only.
    """

    dmdp: Dmdp
    counts: np.ndarray
    sums: np.ndarray
    state: str
    t: int = 0


class LearnerPolicy(Protocol):
    name: str
    is_learner: bool

    def reset(self, dmdp: Dmdp, seed: int) -> None: ...

    def plan(self, stats: Statistics) -> Sequence[str]:
        """Actions to play from ``stats.state`` before being asked again."""
        ...


@dataclass
class SimulationTrace:
    horizon: int
    seed: int
    initial_state: str
    policy: str
    counts: Mapping[Edge, int]
    cumulative_reward: float
    expected_regret: float
    checkpoints: list[tuple[int, float]] = field(default_factory=list)
    optimal_gain: float = 0.0

    def regret_at(self, t: int) -> float:
        for when, value in self.checkpoints:
            if when == t:
                return value
        raise KeyError(t)


def expected_regret(dmdp: Dmdp, counts: Mapping[Edge, int], optimal_gain: float) -> float:
    return math.fsum(n * (optimal_gain - dmdp.rewards[e].mean) for e, n in counts.items())


def run(
    dmdp: Dmdp,
    policy: LearnerPolicy,
    horizon: int,
    seed: int,
    checkpoints: Sequence[int] = (),
    initial_state: str | None = None,
) -> SimulationTrace:
    """Play ``policy`` for ``horizon`` steps and record counts and regret."""
    problems = validate(dmdp)
    if problems:
        raise StructuralError("invalid DMDP: " + "; ".join(problems))
    if horizon < 1:
        raise ValueError("horizon must be at least 1")
    checkpoints = list(checkpoints)
    if checkpoints != sorted(checkpoints) or any(not 1 <= c <= horizon for c in checkpoints):
        raise ValueError("checkpoints must be sorted and lie in [1, horizon]")
    state = dmdp.states[0] if initial_state is None else initial_state
    if state not in dmdp.states:
        raise ValueError(f"unknown initial state {state!r}")

    _, g_star = optimal_cycle(dmdp, enumerate_simple_cycles(dmdp))
    edges = dmdp.edges
    index = dmdp.edge_index
    models = [dmdp.rewards[e] for e in edges]
    means = np.array([m.mean for m in models])
    gaussian = np.array([m.family is Family.GAUSSIAN for m in models])
    sd = np.array([math.sqrt(m.variance) if m.variance else 0.0 for m in models])
    gaps = g_star - means
    counts = np.zeros(len(edges), dtype=np.int64)
    sums = np.zeros(len(edges))
    stats = Statistics(dmdp, counts, sums, state, 0)
    policy.reset(dmdp, seed)
    key = _key(seed)

    # plans are resolved to edge indices once per (state, actions)
    resolved: dict[tuple, tuple[np.ndarray, list[str]]] = {}
    pending = deque(checkpoints)
    recorded: list[tuple[int, float]] = []
    total_reward = 0.0
    t = 0
    while t < horizon:
        stats.state, stats.t = state, t
        actions = tuple(policy.plan(stats))
        if not actions:
            raise PolicyContractError(f"{policy.name} returned an empty plan", t)
        plan = resolved.get((state, actions))
        if plan is None:
            idx, visited, s = [], [], state
            for j, a in enumerate(actions):
                i = index.get(Edge(s, a))
                if i is None:
                    raise PolicyContractError(
                        f"{policy.name} chose {a!r}, which is not available at {s!r}", t + j
                    )
                idx.append(i)
                s = dmdp.next_state[edges[i]]
                visited.append(s)
            plan = (np.array(idx, dtype=np.int64), visited)
            resolved[(state, actions)] = plan
        idx, visited = plan
        pos = 0
        while pos < len(idx) and t < horizon:
            stop = min(len(idx) - pos, horizon - t)
            if pending:
                stop = min(stop, pending[0] - t)
            total_reward += _kernels.execute(
                idx[pos:pos + stop], key, t, counts, sums, means, gaussian, sd
            )
            t += stop
            pos += stop
            while pending and pending[0] == t:
                pending.popleft()
                recorded.append((t, float(counts @ gaps)))
        state = visited[pos - 1]

    count_map = {e: int(counts[i]) for i, e in enumerate(edges)}
    return SimulationTrace(
        horizon=horizon,
        seed=seed,
        initial_state=initial_state or dmdp.states[0],
        policy=policy.name,
        counts=count_map,
        cumulative_reward=total_reward,
        expected_regret=float(counts @ gaps),
        checkpoints=recorded,
        optimal_gain=g_star,
    )


def shortest_path(dmdp: Dmdp, start: str, goal: set[str]) -> tuple[Edge, ...]:
    """Fewest-edge walk from ``start`` into ``goal``; ties go to smaller edges."""
    if start in goal:
        return ()
    parent: dict[str, Edge] = {}
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for e in dmdp.out_edges(s):
            t = dmdp.next_state[e]
            if t in seen:
                continue
            seen.add(t)
            parent[t] = e
            if t in goal:
                path = []
                while t != start:
                    path.append(parent[t])
                    t = parent[t].state
                return tuple(reversed(path))
            queue.append(t)
    raise StructuralError(f"no state of {sorted(goal)} is reachable from {start!r}")


class CyclePolicy:
    """Treat each simple cycle as an arm.

    At every decision epoch the policy picks a cycle, walks the shortest path
    onto it and traverses it once. Subclasses only implement :meth:`choose`.
    """

    name = "cycles"
    is_learner = True

    def reset(self, dmdp: Dmdp, seed: int) -> None:
        self.dmdp = dmdp
        self.cycles = enumerate_simple_cycles(dmdp)
        shared = shared_edges(self.cycles)
        if shared:
            raise NonDisjointError(
                f"{self.name} needs edge-disjoint cycles; shared edges: "
                + ", ".join(map(str, shared))
            )
        index = dmdp.edge_index
        self.cycle_edges = [np.array([index[e] for e in c.edges], dtype=np.int64) for c in self.cycles]
        self.traversals = [0] * len(self.cycles)
        self.navigation = [0] * len(dmdp.edges)
        self.ptr = np.zeros(len(self.cycles) + 1, dtype=np.int64)
        self.ptr[1:] = np.cumsum([len(c) for c in self.cycle_edges])
        self.flat = np.concatenate(self.cycle_edges)
        self.epochs = 0
        self._plans: dict[tuple[str, int], tuple[tuple[str, ...], tuple[int, ...]]] = {}

    def _plan_for(self, state: str, k: int) -> tuple[tuple[str, ...], tuple[int, ...]]:
        key = (state, k)
        if key not in self._plans:
            cycle = self.cycles[k]
            path = shortest_path(self.dmdp, state, set(cycle.states))
            entry = self.dmdp.next_state[path[-1]] if path else state
            walk = path + cycle.rotated_to(entry)
            nav = tuple(self.dmdp.edge_index[e] for e in path)
            self._plans[key] = (tuple(e.action for e in walk), nav)
        return self._plans[key]

    def choose(self, stats: Statistics) -> int:
        raise NotImplementedError

    def plan(self, stats: Statistics) -> Sequence[str]:
        k = self.choose(stats)
        actions, nav = self._plan_for(stats.state, k)
        for i in nav:
            self.navigation[i] += 1
        self.traversals[k] += 1
        self.epochs += 1
        return actions


class KlUcbCyclePolicy(CyclePolicy):
    """Optimistic choice among cycles with a KL confidence region over edge means.

    The index of a cycle is the largest gain reachable by mean vectors ``q``
    with ``sum_e N(e) KL(mean_hat(e), q(e)) <= log t``. When every edge of the
    cycle has been seen the same number of times this is the exploration
    budget ``log(t) / traversals`` spread over the cycle's edges.
    """

    name = "klucb"

    def reset(self, dmdp: Dmdp, seed: int) -> None:
        super().reset(dmdp, seed)
        families = dmdp.families
        if len(families) != 1:
            raise UnsupportedError("klucb needs a single reward family")
        self.gaussian = Family.GAUSSIAN in families
        self.variance = float(next(iter(dmdp.rewards.values())).variance or 1.0)

    def indices(self, stats: Statistics) -> np.ndarray:
        budget = math.log(stats.t) if stats.t > 1 else 0.0
        return _kernels.cycle_indices(
            stats.sums, stats.counts, self.ptr, self.flat, self.gaussian, self.variance, budget
        )

    def choose(self, stats: Statistics) -> int:
        return int(self.indices(stats).argmax())


class GreedyCyclePolicy(CyclePolicy):
    """Traverse every cycle once, then always exploit the best empirical gain."""

    name = "greedy"

    def choose(self, stats: Statistics) -> int:
        if self.epochs < len(self.cycles):
            return self.epochs
        gains = _kernels.cycle_means(stats.sums, stats.counts, self.ptr, self.flat)
        return int(gains.argmax())


class OracleCyclePolicy(CyclePolicy):
    """Knows the means: heads for the optimal cycle and stays there. Not a learner."""

    name = "oracle"
    is_learner = False

    def reset(self, dmdp: Dmdp, seed: int) -> None:
        self.dmdp = dmdp
        self.cycles = enumerate_simple_cycles(dmdp)
        best, _ = optimal_cycle(dmdp, self.cycles)
        self.best = self.cycles.index(best)
        self.traversals = [0] * len(self.cycles)
        self.navigation = [0] * len(dmdp.edges)
        self.epochs = 0
        self._plans = {}

    def choose(self, stats: Statistics) -> int:
        return self.best


class UniformRandomPolicy:
    """Picks an available action uniformly at every step."""

    name = "uniform"
    is_learner = True

    def reset(self, dmdp: Dmdp, seed: int) -> None:
        self.dmdp = dmdp
        self.seed = seed

    def plan(self, stats: Statistics) -> Sequence[str]:
        actions = self.dmdp.actions_at[stats.state]
        u = uniform(self.seed ^ 0x5EED, stats.t, 0)
        return (actions[min(int(u * len(actions)), len(actions) - 1)],)


def klucb_cycle_policy(dmdp: Dmdp) -> KlUcbCyclePolicy:
    policy = KlUcbCyclePolicy()
    policy.reset(dmdp, 0)  # surfaces precondition errors early
    return policy


def greedy_policy(dmdp: Dmdp) -> GreedyCyclePolicy:
    policy = GreedyCyclePolicy()
    policy.reset(dmdp, 0)
    return policy


def oracle_policy(dmdp: Dmdp) -> OracleCyclePolicy:
    policy = OracleCyclePolicy()
    policy.reset(dmdp, 0)
    return policy


POLICIES: dict[str, Callable[[Dmdp], LearnerPolicy]] = {
    "klucb": klucb_cycle_policy,
    "greedy": greedy_policy,
    "oracle": oracle_policy,
}


@dataclass(frozen=True)
class RatioRow:
    horizon: int
    mean_regret: float
    std_regret: float
    ratio: float


@dataclass
class RatioReport:
    constant: float
    rows: list[RatioRow]
    per_seed: dict[int, SimulationTrace]
    flags: list[str] = field(default_factory=list)

    def ratio_at(self, horizon: int) -> float:
        return next(r.ratio for r in self.rows if r.horizon == horizon)


def regret_ratio_report(
    dmdp: Dmdp,
    policy: LearnerPolicy,
    horizons: Sequence[int],
    seeds: Sequence[int],
    constant: float | None = None,
    initial_state: str | None = None,
) -> RatioReport:
    """Mean regret over seeds at each horizon, divided by ``C(phi) log T``.

    One run per seed up to the largest horizon; smaller horizons are read off
    checkpoints of the same trajectory.
    """
    if constant is None:
        from .lowerbound import solve_disjoint

        constant = solve_disjoint(dmdp).constant
    if constant <= 0:
        raise RatioUndefinedError(
            "C(phi) is 0, so the ratio is undefined; inspect the raw expected regret instead"
        )
    horizons = sorted(set(horizons))
    traces = {
        s: run(dmdp, policy, horizons[-1], s, horizons, initial_state) for s in seeds
    }
    rows = []
    for T in horizons:
        values = [traces[s].regret_at(T) for s in seeds]
        mean = statistics.fmean(values)
        std = statistics.stdev(values) if len(values) > 1 else 0.0
        rows.append(RatioRow(T, mean, std, mean / (constant * math.log(T))))
    flags = []
    if not policy.is_learner:
        flags.append(f"{policy.name} is not a learner; its ratio is expected to vanish")
    elif rows[-1].ratio < 0.8:
        flags.append(
            f"ratio {rows[-1].ratio:.3g} at T={rows[-1].horizon} is below 0.8: suspicious "
            "for a uniformly good policy"
        )
    return RatioReport(constant, rows, traces, flags)
