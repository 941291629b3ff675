"""Shared helpers: random DMDPs and brute-force oracles independent of the library."""

from __future__ import annotations

import math

import numpy as np
import pytest

from dmdpbound.model import Dmdp, Edge, RewardModel

ACCEPTANCE_RESULTS: dict[int, str] = {}


def random_dmdp(rng: np.random.Generator, max_states: int = 8, max_actions: int = 3,
                min_states: int = 1) -> Dmdp:
    """Arbitrary valid DMDP with Bernoulli rewards; not necessarily communicating."""
    n = int(rng.integers(min_states, max_states + 1))
    states = [f"s{i}" for i in range(n)]
    transitions = {}
    for s in states:
        for j in range(int(rng.integers(1, max_actions + 1))):
            nxt = states[int(rng.integers(n))]
            # rounded means make exact gain ties possible, which the tie rule must handle
            mean = round(float(rng.uniform(0.05, 0.95)), 2)
            transitions[(s, f"a{j}")] = (nxt, RewardModel.bernoulli(mean))
    return Dmdp.from_transitions(transitions, states)


def brute_force_cycles(dmdp: Dmdp) -> set[tuple[Edge, ...]]:
    """Every closed path without repeated states, rotated to start at its smallest edge."""
    found = set()

    def extend(path: list[Edge], seen: list[str]):
        here = dmdp.next_state[path[-1]]
        if here == seen[0]:
            k = path.index(min(path))
            found.add(tuple(path[k:] + path[:k]))
            return
        if here in seen:
            return
        for e in dmdp.out_edges(here):
            extend(path + [e], seen + [here])

    for e in dmdp.edges:
        extend([e], [e.state])
    return found


def brute_force_gain(dmdp: Dmdp, edges) -> float:
    return math.fsum(dmdp.rewards[e].mean for e in edges) / len(edges)


def bfs_reaches(dmdp: Dmdp, src: str, dst: str) -> bool:
    frontier, seen = [src], {src}
    while frontier:
        nxt = []
        for s in frontier:
            for e in dmdp.out_edges(s):
                t = dmdp.next_state[e]
                if t not in seen:
                    seen.add(t)
                    nxt.append(t)
        frontier = nxt
    return dst in seen


def bernoulli_kl(p: float, q: float) -> float:
    return p * math.log(p / q) + (1 - p) * math.log((1 - p) / (1 - q))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for k in sorted(ACCEPTANCE_RESULTS):
            terminalreporter.write_line(ACCEPTANCE_RESULTS[k])
