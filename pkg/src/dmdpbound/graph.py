"""Cycle structure of the DMDP edge graph."""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .errors import CycleLimitError, StructuralError
from .model import Dmdp, Edge, SimpleCycle

DEFAULT_CYCLE_CAP = 10**6


def _component_of(dmdp: Dmdp, root: str, allowed: set[str]) -> set[str]:
    """States of ``allowed`` that are strongly connected to ``root`` inside ``allowed``."""

    def sweep(neighbours):
        seen = {root}
        stack = [root]
        while stack:
            for t in neighbours(stack.pop()):
                if t in allowed and t not in seen:
                    seen.add(t)
                    stack.append(t)
        return seen

    preds: dict[str, list[str]] = {}
    for e, t in dmdp.next_state.items():
        preds.setdefault(t, []).append(e.state)
    forward = sweep(lambda s: (dmdp.next_state[e] for e in dmdp.out_edges(s)))
    backward = sweep(lambda s: preds.get(s, ()))
    return forward & backward


def enumerate_simple_cycles(dmdp: Dmdp, cap: int = DEFAULT_CYCLE_CAP) -> tuple[SimpleCycle, ...]:
    """All simple cycles of the edge graph, canonical and sorted.

    Johnson's circuit search, run once per start state over the strongly
    connected part of the states not smaller than it. Parallel edges are
    distinct edges, so two cycles through the same states with different
    actions are reported separately.
    """
    found: list[tuple[Edge, ...]] = []
    order = dmdp.states

    for i, start in enumerate(order):
        comp = _component_of(dmdp, start, set(order[i:]))
        blocked: set[str] = set()
        blocked_by: dict[str, set[str]] = {s: set() for s in comp}
        path: list[Edge] = []

        def unblock(v: str) -> None:
            stack = [v]
            while stack:
                u = stack.pop()
                if u in blocked:
                    blocked.discard(u)
                    stack.extend(blocked_by[u])
                    blocked_by[u].clear()

        def circuit(v: str) -> bool:
            closed = False
            blocked.add(v)
            for e in dmdp.out_edges(v):
                w = dmdp.next_state[e]
                if w not in comp:
                    continue
                if w == start:
                    found.append(tuple(path) + (e,))
                    if len(found) > cap:
                        raise CycleLimitError(cap)
                    closed = True
                elif w not in blocked:
                    path.append(e)
                    if circuit(w):
                        closed = True
                    path.pop()
            if closed:
                unblock(v)
            else:
                for e in dmdp.out_edges(v):
                    w = dmdp.next_state[e]
                    if w in comp:
                        blocked_by[w].add(v)
            return closed

        circuit(start)

    return tuple(sorted(SimpleCycle.from_edges(dmdp, c) for c in found))


def optimal_cycle(dmdp: Dmdp, cycles: Iterable[SimpleCycle]) -> tuple[SimpleCycle, float]:
    """Highest-gain cycle; among equal gains the canonically smallest one."""
    best = None
    for c in sorted(cycles):
        if best is None or c.gain > best.gain:
            best = c
    if best is None:
        raise StructuralError("no cycle to choose from")
    return best, best.gain


def shared_edges(cycles: Iterable[SimpleCycle]) -> list[Edge]:
    counts = Counter(e for c in set(cycles) for e in c.edges)
    return sorted(e for e, n in counts.items() if n > 1)


def are_disjoint(cycles: Iterable[SimpleCycle]) -> bool:
    """True iff no state-action pair belongs to two distinct cycles."""
    return not shared_edges(cycles)


@dataclass(frozen=True)
class WalkDecomposition:
    cycle_counts: Mapping[SimpleCycle, int] = field(default_factory=dict)
    residual_path: tuple[Edge, ...] = ()

    def edge_multiset(self) -> Counter:
        out = Counter(self.residual_path)
        for c, m in self.cycle_counts.items():
            for e in c.edges:
                out[e] += m
        return out


def check_walk(dmdp: Dmdp, walk: Sequence[tuple[str, str]]) -> list[Edge]:
    walk = [Edge(*e) for e in walk]
    for i, e in enumerate(walk):
        if e not in dmdp.next_state:
            raise StructuralError(f"walk index {i}: edge {e} is not declared")
        if i and dmdp.next_state[walk[i - 1]] != e.state:
            raise StructuralError(f"walk index {i}: edge {e} does not follow {walk[i - 1]}")
    return walk


def decompose_walk(dmdp: Dmdp, walk: Sequence[tuple[str, str]]) -> WalkDecomposition:
    """Peel simple cycles off a walk as soon as they close.

    The removed cycles plus the leftover path use exactly the edges of the
    input walk, with multiplicity.
    """
    walk = check_walk(dmdp, walk)
    path: list[Edge] = []
    where: dict[str, int] = {}  # state -> index of the path edge leaving it
    counts: Counter = Counter()
    for e in walk:
        where[e.state] = len(path)
        path.append(e)
        nxt = dmdp.next_state[e]
        if nxt in where:
            k = where[nxt]
            loop = path[k:]
            del path[k:]
            for f in loop:
                del where[f.state]
            counts[SimpleCycle.from_edges(dmdp, loop)] += 1
    ordered = {c: counts[c] for c in sorted(counts)}
    return WalkDecomposition(ordered, tuple(path))
