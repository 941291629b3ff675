"""DMDP data model: reward families, the transition graph, policies and cycle gains.

State and action identifiers are opaque strings. Every enumeration in the
package walks them in lexicographic order so results are reproducible.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from types import MappingProxyType
from typing import Iterable, Mapping, NamedTuple, Sequence

from .errors import DomainError, StructuralError


class Family(str, Enum):
    BERNOULLI = "bernoulli"
    GAUSSIAN = "gaussian"


class Edge(NamedTuple):
    state: str
    action: str

    def __str__(self) -> str:
        return f"({self.state},{self.action})"


@dataclass(frozen=True)
class RewardModel:
    """One-parameter exponential-family reward distribution of a single edge.

    ``variance`` is only meaningful for the Gaussian family, where it is held
    fixed and the mean is the free parameter.
    """

    family: Family
    mean: float
    variance: float | None = None

    @classmethod
    def bernoulli(cls, mean: float) -> RewardModel:
        return cls(Family.BERNOULLI, float(mean))

    @classmethod
    def gaussian(cls, mean: float, variance: float = 1.0) -> RewardModel:
        return cls(Family.GAUSSIAN, float(mean), float(variance))

    def with_mean(self, mean: float) -> RewardModel:
        return RewardModel(self.family, float(mean), self.variance)

    def problems(self) -> list[str]:
        out = []
        if not math.isfinite(self.mean):
            out.append(f"mean {self.mean!r} is not finite")
        elif self.family is Family.BERNOULLI and not 0.0 < self.mean < 1.0:
            out.append(f"Bernoulli mean {self.mean!r} outside the open interval (0, 1)")
        if self.family is Family.GAUSSIAN:
            if self.variance is None:
                out.append("Gaussian reward without a variance")
            elif not (math.isfinite(self.variance) and self.variance > 0):
                out.append(f"Gaussian variance {self.variance!r} is not strictly positive")
        elif self.variance is not None:
            out.append("Bernoulli reward must not carry a variance")
        return out


def _check_admissible(model: RewardModel, q: float) -> None:
    if model.family is Family.BERNOULLI:
        if not 0.0 < q < 1.0:
            raise DomainError(f"Bernoulli mean {q!r} outside (0, 1)")
    elif not math.isfinite(q):
        raise DomainError(f"Gaussian mean {q!r} is not finite")


def kl(model_p: RewardModel, mean_q: float) -> float:
    """KL divergence from ``model_p`` to the same family with mean ``mean_q``."""
    _check_admissible(model_p, mean_q)
    p = model_p.mean
    if model_p.family is Family.GAUSSIAN:
        return (p - mean_q) ** 2 / (2.0 * model_p.variance)
    if p == mean_q:
        return 0.0
    # log1p form stays accurate when q is close to p
    d = mean_q - p
    out = 0.0
    if p > 0.0:
        out -= p * math.log1p(d / p)
    if p < 1.0:
        out -= (1.0 - p) * math.log1p(-d / (1.0 - p))
    return max(out, 0.0)


def kl_mean_derivative(model_p: RewardModel, mean_q: float) -> float:
    """Partial derivative of ``kl(model_p, q)`` with respect to ``q``."""
    _check_admissible(model_p, mean_q)
    p = model_p.mean
    if model_p.family is Family.GAUSSIAN:
        return (mean_q - p) / model_p.variance
    return (mean_q - p) / (mean_q * (1.0 - mean_q))


def mean_at_slope(model_p: RewardModel, slope: float) -> float:
    """Inverse of ``kl_mean_derivative`` in its second argument.

    Returns the unique ``q`` with ``kl_mean_derivative(model_p, q) == slope``.
    For Bernoulli this is the admissible root of
    ``slope*q**2 + (1 - slope)*q - p = 0``, written so that neither branch
    cancels catastrophically.
    """
    p = model_p.mean
    if model_p.family is Family.GAUSSIAN:
        return p + slope * model_p.variance
    if slope == 0.0:
        return p
    b = 1.0 - slope
    disc = math.sqrt(b * b + 4.0 * slope * p)
    if b > 0.0:
        return 2.0 * p / (b + disc)
    return (disc - b) / (2.0 * slope)


@dataclass(frozen=True)
class Dmdp:
    """Deterministic MDP: the edge graph plus one reward model per edge.

    Construction normalises the containers (sorted tuples, read-only
    mappings) but does not reject malformed data; call :func:`validate`.
    """

    states: tuple[str, ...]
    actions_at: Mapping[str, tuple[str, ...]]
    next_state: Mapping[Edge, str]
    rewards: Mapping[Edge, RewardModel]

    def __post_init__(self):
        object.__setattr__(self, "states", tuple(sorted(set(self.states))))
        actions = {s: tuple(sorted(set(a))) for s, a in self.actions_at.items()}
        object.__setattr__(self, "actions_at", MappingProxyType(actions))
        nxt = {Edge(*e): s for e, s in self.next_state.items()}
        object.__setattr__(self, "next_state", MappingProxyType(nxt))
        rew = {Edge(*e): r for e, r in self.rewards.items()}
        object.__setattr__(self, "rewards", MappingProxyType(rew))

    @classmethod
    def from_transitions(
        cls,
        transitions: Mapping[tuple[str, str], tuple[str, RewardModel]],
        states: Iterable[str] | None = None,
    ) -> Dmdp:
        """Build from ``{(state, action): (next_state, reward_model)}``."""
        actions: dict[str, list[str]] = {}
        for s, a in transitions:
            actions.setdefault(s, []).append(a)
        if states is None:
            states = set(actions) | {nxt for nxt, _ in transitions.values()}
        for s in states:
            actions.setdefault(s, [])
        return cls(
            states=tuple(states),
            actions_at=actions,
            next_state={e: nxt for e, (nxt, _) in transitions.items()},
            rewards={e: r for e, (_, r) in transitions.items()},
        )

    @cached_property
    def edges(self) -> tuple[Edge, ...]:
        return tuple(Edge(s, a) for s in self.states for a in self.actions_at.get(s, ()))

    @cached_property
    def edge_index(self) -> Mapping[Edge, int]:
        return MappingProxyType({e: i for i, e in enumerate(self.edges)})

    def mean(self, edge: Edge) -> float:
        return self.rewards[edge].mean

    def step(self, edge: Edge) -> str:
        return self.next_state[edge]

    def out_edges(self, state: str) -> tuple[Edge, ...]:
        return tuple(Edge(state, a) for a in self.actions_at.get(state, ()))

    @cached_property
    def families(self) -> frozenset[Family]:
        return frozenset(r.family for r in self.rewards.values())


def validate(dmdp: Dmdp) -> list[str]:
    """Return a description of every structural or reward violation."""
    out = []
    state_set = set(dmdp.states)
    for s in dmdp.actions_at:
        if s not in state_set:
            out.append(f"actions declared for unknown state {s!r}")
    for s in dmdp.states:
        if not dmdp.actions_at.get(s):
            out.append(f"state {s!r} has no action")
    declared = set(dmdp.edges)
    for e in dmdp.edges:
        if e not in dmdp.next_state:
            out.append(f"edge {e} has no transition")
        elif dmdp.next_state[e] not in state_set:
            out.append(f"edge {e} transitions to unknown state {dmdp.next_state[e]!r}")
        if e not in dmdp.rewards:
            out.append(f"edge {e} has no reward model")
        else:
            out.extend(f"edge {e}: {msg}" for msg in dmdp.rewards[e].problems())
    for e in dmdp.next_state:
        if e not in declared:
            out.append(f"transition given for undeclared edge {e}")
    for e in dmdp.rewards:
        if e not in declared:
            out.append(f"reward given for undeclared edge {e}")
    variances = {
        r.variance for r in dmdp.rewards.values()
        if r.family is Family.GAUSSIAN and r.variance is not None
    }
    if len(variances) > 1:
        out.append(f"Gaussian edges must share one variance, found {sorted(variances)}")
    return out


def reachable_from(dmdp: Dmdp, start: str) -> set[str]:
    seen = {start}
    queue = deque([start])
    while queue:
        s = queue.popleft()
        for e in dmdp.out_edges(s):
            t = dmdp.next_state[e]
            if t not in seen:
                seen.add(t)
                queue.append(t)
    return seen


def unreachable_pair(dmdp: Dmdp) -> tuple[str, str] | None:
    """First ordered pair ``(s, t)`` with ``t`` not reachable from ``s``, if any."""
    for s in dmdp.states:
        seen = reachable_from(dmdp, s)
        for t in dmdp.states:
            if t not in seen:
                return s, t
    return None


def is_communicating(dmdp: Dmdp) -> bool:
    # strongly connected iff everything is reachable from one state in the
    # graph and in its reverse
    if not dmdp.states:
        return False
    root = dmdp.states[0]
    if len(reachable_from(dmdp, root)) != len(dmdp.states):
        return False
    preds: dict[str, list[str]] = {s: [] for s in dmdp.states}
    for e, t in dmdp.next_state.items():
        preds[t].append(e.state)
    seen = {root}
    stack = [root]
    while stack:
        for s in preds[stack.pop()]:
            if s not in seen:
                seen.add(s)
                stack.append(s)
    return len(seen) == len(dmdp.states)


@dataclass(frozen=True)
class Policy:
    """Stationary deterministic Markov policy, one action per state."""

    choice: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "choice", MappingProxyType(dict(self.choice)))

    def __call__(self, state: str) -> str:
        return self.choice[state]


def cycle_gain(dmdp: Dmdp, cycle: SimpleCycle | Sequence[Edge]) -> float:
    """Average mean reward along a cycle."""
    edges = cycle.edges if isinstance(cycle, SimpleCycle) else tuple(cycle)
    if not edges:
        raise StructuralError("gain of an empty cycle is undefined")
    # fsum keeps the result independent of the rotation
    return math.fsum(dmdp.rewards[Edge(*e)].mean for e in edges) / len(edges)


@dataclass(frozen=True, order=True)
class SimpleCycle:
    """Closed path in the edge graph, stored in canonical rotation."""

    edges: tuple[Edge, ...]
    gain: float = field(compare=False)

    @property
    def length(self) -> int:
        return len(self.edges)

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def states(self) -> tuple[str, ...]:
        return tuple(e.state for e in self.edges)

    def __str__(self) -> str:
        return " ".join(str(e) for e in self.edges)

    @classmethod
    def from_edges(cls, dmdp: Dmdp, edges: Sequence[tuple[str, str]]) -> SimpleCycle:
        edges = [Edge(*e) for e in edges]
        if not edges:
            raise StructuralError("a cycle needs at least one edge")
        for i, e in enumerate(edges):
            if e not in dmdp.next_state:
                raise StructuralError(f"edge {e} is not declared")
            if dmdp.next_state[e] != edges[(i + 1) % len(edges)].state:
                raise StructuralError(f"edge {e} does not chain into the next edge")
        if len({e.state for e in edges}) != len(edges):
            raise StructuralError("a simple cycle may not revisit a state")
        k = min(range(len(edges)), key=edges.__getitem__)
        edges = tuple(edges[k:] + edges[:k])
        return cls(edges, cycle_gain(dmdp, edges))

    def rotated_to(self, state: str) -> tuple[Edge, ...]:
        """Edges of one traversal starting at ``state``."""
        k = self.states.index(state)
        return self.edges[k:] + self.edges[:k]


def policy_cycle(dmdp: Dmdp, policy: Policy, start: str) -> SimpleCycle:
    """Cycle that ``policy`` eventually repeats forever when started at ``start``."""
    for s in dmdp.states:
        if policy.choice.get(s) not in dmdp.actions_at.get(s, ()):
            raise StructuralError(f"policy action at {s!r} is not available")
    seen: dict[str, int] = {}
    walk: list[Edge] = []
    s = start
    while s not in seen:
        seen[s] = len(walk)
        e = Edge(s, policy(s))
        walk.append(e)
        s = dmdp.next_state[e]
    return SimpleCycle.from_edges(dmdp, walk[seen[s]:])
