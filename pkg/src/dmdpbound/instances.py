"""Generators for the two example topologies: line search and state-dependent rewards."""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .model import Dmdp, Family, RewardModel


# three-cycle Bernoulli line search (cycle gains 0.4, 0.7, 0.5) used for
# the simulation consistency runs
REFERENCE_SEGMENTS = ((0.45, 0.35), (0.75, 0.65), (0.55, 0.45))


def _names(prefix: str, count: int) -> list[str]:
    # zero-padded so lexicographic order is numeric order
    width = len(str(count))
    return [f"{prefix}{i:0{width}d}" for i in range(1, count + 1)]


def _reward(family: Family | str, mean: float, variance: float | None) -> RewardModel:
    if Family(family) is Family.GAUSSIAN:
        return RewardModel.gaussian(mean, 1.0 if variance is None else variance)
    return RewardModel.bernoulli(mean)


def line_search(
    segment_means: Sequence[tuple[float, float]],
    family: Family | str = Family.BERNOULLI,
    variance: float | None = None,
) -> Dmdp:
    """Chain of ``n + 1`` states; ``a1`` moves right, ``a2`` moves left.

    ``segment_means[i]`` gives the means of the right move out of state i and
    of the left move back into it, i.e. the two edges of the i-th cycle.
    """
    n = len(segment_means)
    if n < 1:
        raise ValueError("a line search needs at least one segment")
    states = _names("s", n + 1)
    transitions = {}
    for i, (right, left) in enumerate(segment_means):
        transitions[(states[i], "a1")] = (states[i + 1], _reward(family, right, variance))
        transitions[(states[i + 1], "a2")] = (states[i], _reward(family, left, variance))
    return Dmdp.from_transitions(transitions, states)


def state_rewards(
    state_means: Sequence[float],
    family: Family | str = Family.BERNOULLI,
    variance: float | None = None,
) -> Dmdp:
    """Ring plus self-loops, with each state's reward on every edge entering it.

    Action ``a<j>`` leads to state ``s<j>``. The ring runs
    ``s1 -> sk -> s(k-1) -> ... -> s2 -> s1``; for ``k = 4`` this is the
    four-state example with its five simple cycles.
    """
    k = len(state_means)
    if k < 1:
        raise ValueError("at least one state is required")
    states = _names("s", k)
    actions = _names("a", k)
    models = [_reward(family, m, variance) for m in state_means]
    transitions = {}
    for i, s in enumerate(states):
        transitions[(s, actions[i])] = (s, models[i])
    if k > 1:
        for i in range(k):
            j = (i - 1) % k
            transitions[(states[i], actions[j])] = (states[j], models[j])
    return Dmdp.from_transitions(transitions, states)


def random_segment_means(
    rng: np.random.Generator, n: int, family: Family | str = Family.BERNOULLI
) -> list[tuple[float, float]]:
    if Family(family) is Family.GAUSSIAN:
        values = rng.normal(0.0, 1.0, size=(n, 2))
    else:
        values = rng.uniform(0.05, 0.95, size=(n, 2))
    return [(float(a), float(b)) for a, b in values]


def random_state_means(
    rng: np.random.Generator, k: int, family: Family | str = Family.BERNOULLI
) -> list[float]:
    if Family(family) is Family.GAUSSIAN:
        return [float(v) for v in rng.normal(0.0, 1.0, size=k)]
    return [float(v) for v in rng.uniform(0.05, 0.95, size=k)]
