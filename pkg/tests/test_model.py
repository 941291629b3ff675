from itertools import product

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import bernoulli_kl, bfs_reaches, random_dmdp
from dmdpbound.errors import DomainError, StructuralError
from dmdpbound.instances import line_search
from dmdpbound.model import (
    Dmdp,
    Edge,
    Policy,
    RewardModel,
    SimpleCycle,
    cycle_gain,
    is_communicating,
    kl,
    kl_mean_derivative,
    policy_cycle,
    validate,
)

B = RewardModel.bernoulli
G = RewardModel.gaussian


def chain2():
    return Dmdp.from_transitions(
        {("s1", "a"): ("s2", B(0.3)), ("s2", "a"): ("s1", B(0.5))}, ["s1", "s2"]
    )


def test_valid_chain_has_no_violations():
    assert validate(chain2()) == []


def test_missing_transition_is_named():
    d = chain2()
    broken = Dmdp(d.states, d.actions_at, {Edge("s1", "a"): "s2"}, d.rewards)
    problems = validate(broken)
    assert len(problems) == 1
    assert "(s2,a)" in problems[0]


def test_dangling_transition_is_reported():
    d = Dmdp.from_transitions({("s1", "a"): ("nowhere", B(0.3))}, ["s1"])
    problems = validate(d)
    assert len(problems) == 1 and "nowhere" in problems[0]


def test_bernoulli_mean_one_is_a_violation():
    d = Dmdp.from_transitions({("s1", "a"): ("s1", B(1.0))}, ["s1"])
    problems = validate(d)
    assert len(problems) == 1 and "s1" in problems[0]


def test_gaussian_variances_must_agree():
    d = Dmdp.from_transitions(
        {("s1", "a"): ("s1", G(0.0, 1.0)), ("s1", "b"): ("s1", G(0.0, 2.0))}, ["s1"]
    )
    assert validate(d)


def test_kl_examples():
    assert kl(B(0.5), 0.5) == 0.0
    assert kl(B(0.5), 0.75) == pytest.approx(0.143841, abs=1e-6)
    assert kl(G(0.0, 1.0), 1.0) == 0.5


def test_kl_derivative_examples():
    assert kl_mean_derivative(B(0.5), 0.5) == 0.0
    assert kl_mean_derivative(G(0.3, 1.0), 0.7) == pytest.approx(0.4)
    assert kl_mean_derivative(B(0.5), 0.75) == pytest.approx(4 / 3)


@pytest.mark.parametrize("q", [0.0, 1.0, -0.1, 1.5])
def test_kl_outside_open_interval_is_a_domain_error(q):
    with pytest.raises(DomainError):
        kl(B(0.5), q)
    with pytest.raises(DomainError):
        kl_mean_derivative(B(0.5), q)


@given(st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_kl_matches_formula_and_is_nonnegative(p, q):
    value = kl(B(p), q)
    assert value >= 0.0
    assert value == pytest.approx(bernoulli_kl(p, q), rel=1e-12, abs=1e-15)
    if p != q:
        assert value > 0.0


def test_kl_derivative_matches_central_difference():
    h = 1e-6
    grid = np.linspace(0.05, 0.95, 19)
    for p, q in product(grid, grid):
        if abs(p - q) < 1e-9:
            continue
        fd = (kl(B(p), q + h) - kl(B(p), q - h)) / (2 * h)
        assert kl_mean_derivative(B(p), q) == pytest.approx(fd, rel=1e-6)
    for sigma2 in (0.5, 1.0, 3.0):
        for p, q in product(grid, grid):
            if abs(p - q) < 1e-3:
                continue
            fd = (kl(G(p, sigma2), q + h) - kl(G(p, sigma2), q - h)) / (2 * h)
            assert kl_mean_derivative(G(p, sigma2), q) == pytest.approx(fd, rel=1e-6)


def test_communicating_examples():
    assert is_communicating(line_search([(0.3, 0.5), (0.2, 0.4), (0.6, 0.1)]))
    assert is_communicating(Dmdp.from_transitions({("s", "a"): ("s", B(0.5))}, ["s"]))
    sink = Dmdp.from_transitions(
        {("s1", "a"): ("s2", B(0.5)), ("s2", "a"): ("s2", B(0.5))}, ["s1", "s2"]
    )
    assert not is_communicating(sink)


def test_communicating_matches_pairwise_bfs(rng):
    for _ in range(300):
        d = random_dmdp(rng)
        expected = all(bfs_reaches(d, a, b) for a in d.states for b in d.states)
        assert is_communicating(d) == expected


def test_always_right_on_line_search_ends_on_last_segment():
    d = line_search([(0.1, 0.2), (0.3, 0.4), (0.5, 0.6)])
    choice = {s: ("a1" if "a1" in d.actions_at[s] else "a2") for s in d.states}
    c = policy_cycle(d, Policy(choice), "s1")
    assert c.edges == (Edge("s3", "a1"), Edge("s4", "a2"))


def test_self_loop_policy_gives_length_one():
    d = Dmdp.from_transitions({("s", "a"): ("s", B(0.5))}, ["s"])
    assert policy_cycle(d, Policy({"s": "a"}), "s").length == 1


def test_ring_policy_is_the_ring_from_any_start():
    d = Dmdp.from_transitions(
        {("x", "go"): ("y", B(0.1)), ("y", "go"): ("z", B(0.2)), ("z", "go"): ("x", B(0.3))},
        ["x", "y", "z"],
    )
    p = Policy({s: "go" for s in d.states})
    cycles = {policy_cycle(d, p, s) for s in d.states}
    assert len(cycles) == 1
    (c,) = cycles
    assert c.edges == (Edge("x", "go"), Edge("y", "go"), Edge("z", "go"))


def test_policy_cycle_is_closed_and_simple(rng):
    for _ in range(200):
        d = random_dmdp(rng)
        choice = {s: d.actions_at[s][int(rng.integers(len(d.actions_at[s])))] for s in d.states}
        c = policy_cycle(d, Policy(choice), d.states[int(rng.integers(len(d.states)))])
        assert d.next_state[c.edges[-1]] == c.edges[0].state
        for a, b in zip(c.edges, c.edges[1:]):
            assert d.next_state[a] == b.state
        assert len(set(c.states)) == c.length


def test_policy_rejects_unavailable_action():
    d = chain2()
    with pytest.raises(StructuralError):
        policy_cycle(d, Policy({"s1": "zz", "s2": "a"}), "s1")


def test_cycle_gain_examples():
    ring = {("s%d" % i, "a"): ("s%d" % ((i + 1) % 4), B(m)) for i, m in enumerate([0.1, 0.2, 0.3, 0.4])}
    d4 = Dmdp.from_transitions(ring, ["s0", "s1", "s2", "s3"])
    assert cycle_gain(d4, d4.edges) == pytest.approx(0.25)
    assert cycle_gain(chain2(), chain2().edges) == pytest.approx(0.4)
    loop = Dmdp.from_transitions({("s", "a"): ("s", B(0.9))}, ["s"])
    assert cycle_gain(loop, loop.edges) == 0.9
    with pytest.raises(StructuralError):
        cycle_gain(loop, [])


@settings(max_examples=50)
@given(st.lists(st.floats(0.01, 0.99), min_size=1, max_size=7), st.integers(0, 6))
def test_gain_is_rotation_invariant(means, shift):
    n = len(means)
    states = [f"s{i}" for i in range(n)]
    d = Dmdp.from_transitions(
        {(states[i], "a"): (states[(i + 1) % n], B(m)) for i, m in enumerate(means)}, states
    )
    edges = [Edge(s, "a") for s in states]
    k = shift % n
    rotated = edges[k:] + edges[:k]
    assert cycle_gain(d, rotated) == cycle_gain(d, edges)
    assert SimpleCycle.from_edges(d, rotated) == SimpleCycle.from_edges(d, edges)


def test_from_edges_rejects_open_paths():
    d = line_search([(0.1, 0.2), (0.3, 0.4)])
    with pytest.raises(StructuralError):
        SimpleCycle.from_edges(d, [("s1", "a1"), ("s2", "a1")])
