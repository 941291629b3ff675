"""Asymptotic regret lower bound C(phi) for DMDPs whose simple cycles are edge-disjoint.

The bound is a nested program. The inner problem finds, for each suboptimal
cycle, the cheapest (in KL) change of that cycle's edge means which lifts its
gain to the optimal gain. The outer problem then visits each suboptimal cycle
at rate ``1/I(C)`` per unit of ``log T``, where ``I(C)`` is that cheapest cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Mapping, Sequence

from scipy.optimize import brentq

from .errors import (
    DegenerateOptimumError,
    InfeasibleError,
    NonDisjointError,
    NotCommunicatingError,
    StructuralError,
    UnsupportedError,
)
from .graph import enumerate_simple_cycles, optimal_cycle, shared_edges
from .model import (
    Dmdp,
    Family,
    RewardModel,
    SimpleCycle,
    is_communicating,
    kl,
    kl_mean_derivative,
    mean_at_slope,
    validate,
)

_MAX_BRACKET_DOUBLINGS = 200


@dataclass(frozen=True)
class ConfusingRewards:
    cycle: SimpleCycle
    means: tuple[float, ...]
    kl_cost: float
    multiplier: float  # common KL slope at the optimum


@dataclass(frozen=True)
class CycleBound:
    information_number: float
    rate: float
    confusing: ConfusingRewards
    contribution: float


@dataclass(frozen=True)
class LowerBoundSolution:
    per_cycle: Mapping[SimpleCycle, CycleBound]
    constant: float
    optimal_cycle: SimpleCycle
    optimal_gain: float
    # cycles whose information constraint is implied by others (rate 0)
    dominated: tuple[SimpleCycle, ...] = ()
    reward_sharing: str = "edge"
    cycles: tuple[SimpleCycle, ...] = field(default=(), repr=False)


def _cycle_models(dmdp: Dmdp, cycle: SimpleCycle) -> list[RewardModel]:
    models = [dmdp.rewards[e] for e in cycle.edges]
    if len({m.family for m in models}) > 1:
        raise UnsupportedError(f"cycle {cycle} mixes reward families")
    if models[0].family is Family.GAUSSIAN and len({m.variance for m in models}) > 1:
        raise UnsupportedError(f"cycle {cycle} mixes Gaussian variances")
    return models


def _solve_slope(models: Sequence[RewardModel], total: float) -> float:
    """Common slope ``lam`` with ``sum(mean_at_slope(m, lam)) == total``, by bisection."""

    def excess(lam: float) -> float:
        return math.fsum(mean_at_slope(m, lam) for m in models) - total

    base = excess(0.0)
    if base == 0.0:
        return 0.0
    sign = -1.0 if base > 0 else 1.0
    lo, hi = 0.0, sign
    for _ in range(_MAX_BRACKET_DOUBLINGS):
        if sign * excess(hi) >= 0:
            break
        lo, hi = hi, 2 * hi
    else:
        raise InfeasibleError("could not bracket the Lagrange multiplier")
    if sign < 0:
        lo, hi = hi, lo
    # run to float exhaustion; the residual then sits at rounding level
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if excess(mid) < 0:
            lo = mid
        else:
            hi = mid
    return lo if abs(excess(lo)) <= abs(excess(hi)) else hi


def inner_confusing(
    dmdp: Dmdp,
    cycle: SimpleCycle,
    target_gain: float,
    method: Literal["auto", "closed_form", "lagrangian"] = "auto",
) -> ConfusingRewards:
    """KL-closest mean vector for ``cycle`` whose gain equals ``target_gain``.

    Gaussian cycles have the exact solution of shifting every edge mean by
    the gain gap; ``method="lagrangian"`` forces the generic multiplier
    search instead, which is the only route for Bernoulli cycles.
    """
    models = _cycle_models(dmdp, cycle)
    family = models[0].family
    n = len(models)
    total = n * target_gain
    if family is Family.BERNOULLI and not 0.0 < target_gain < 1.0:
        raise InfeasibleError(
            f"no Bernoulli means in (0, 1) give cycle {cycle} the gain {target_gain!r}"
        )
    if method == "auto":
        method = "closed_form" if family is Family.GAUSSIAN else "lagrangian"
    if method == "closed_form" and family is not Family.GAUSSIAN:
        raise UnsupportedError("the uniform shift is exact only for Gaussian rewards")

    if n == 1:
        means = (float(target_gain),)
        lam = kl_mean_derivative(models[0], target_gain)
    elif method == "closed_form":
        shift = target_gain - cycle.gain
        means = tuple(m.mean + shift for m in models)
        lam = shift / models[0].variance
    else:
        lam = _solve_slope(models, total)
        means = tuple(mean_at_slope(m, lam) for m in models)
    cost = math.fsum(kl(m, q) for m, q in zip(models, means))
    return ConfusingRewards(cycle, means, cost, lam)


def information_number(dmdp: Dmdp, cycle: SimpleCycle, target_gain: float) -> float:
    return inner_confusing(dmdp, cycle, target_gain).kl_cost


def has_state_rewards(dmdp: Dmdp) -> bool:
    """True when rewards depend only on the state reached and every state can stay put."""
    by_target: dict[str, RewardModel] = {}
    for e, t in dmdp.next_state.items():
        r = dmdp.rewards[e]
        if by_target.setdefault(t, r) != r:
            return False
    looped = {e.state for e, t in dmdp.next_state.items() if e.state == t}
    return looped == set(dmdp.states)


def _require_solvable(dmdp: Dmdp) -> tuple[SimpleCycle, ...]:
    problems = validate(dmdp)
    if problems:
        raise StructuralError("invalid DMDP: " + "; ".join(problems))
    if not is_communicating(dmdp):
        raise NotCommunicatingError("the DMDP is not communicating")
    cycles = enumerate_simple_cycles(dmdp)
    shared = shared_edges(cycles)
    if shared:
        raise NonDisjointError(
            "cycles share the edges " + ", ".join(map(str, shared))
            + "; only edge-disjoint cycle structures reduce to a finite program"
        )
    return cycles


def solve_disjoint(
    dmdp: Dmdp, reward_sharing: Literal["auto", "edge", "state"] = "auto"
) -> LowerBoundSolution:
    """Regret lower-bound constant for a DMDP with edge-disjoint simple cycles.

    With ``reward_sharing="edge"`` every edge has its own reward parameter and
    each suboptimal cycle C contributes ``|C| (g* - g(C)) / I(C)``.

    With ``"state"`` the edges entering a state share that state's reward
    distribution and each state has a self-loop. Any alternative model making
    a longer cycle optimal must raise some state's reward to the optimum, so
    only self-loops carry information constraints and the longer cycles get
    rate zero. ``"auto"`` picks ``"state"`` when the reward models have that
    structure.
    """
    cycles = _require_solvable(dmdp)
    if reward_sharing == "auto":
        reward_sharing = "state" if has_state_rewards(dmdp) else "edge"
    best, g_star = optimal_cycle(dmdp, cycles)
    tied = [c for c in cycles if c != best and c.gain == g_star]
    if tied:
        raise DegenerateOptimumError(
            f"cycles {best} and {tied[0]} both attain the optimal gain {g_star!r}"
        )

    if reward_sharing == "state":
        if not has_state_rewards(dmdp):
            raise UnsupportedError("rewards are not state-dependent")
        arms: dict[str, SimpleCycle] = {}
        for c in cycles:
            if c.length == 1:
                arms.setdefault(c.states[0], c)
        constrained = [c for c in arms.values() if c != best]
        dominated = tuple(c for c in cycles if c != best and c not in constrained)
    else:
        constrained = [c for c in cycles if c != best]
        dominated = ()

    per_cycle = {}
    for c in constrained:
        conf = inner_confusing(dmdp, c, g_star)
        rate = 1.0 / conf.kl_cost
        per_cycle[c] = CycleBound(
            information_number=conf.kl_cost,
            rate=rate,
            confusing=conf,
            contribution=rate * c.length * (g_star - c.gain),
        )
    constant = math.fsum(b.contribution for b in per_cycle.values())
    return LowerBoundSolution(
        per_cycle=per_cycle,
        constant=constant,
        optimal_cycle=best,
        optimal_gain=g_star,
        dominated=dominated,
        reward_sharing=reward_sharing,
        cycles=cycles,
    )


def _unique_best(values: Sequence[float], what: str) -> float:
    if not values:
        raise StructuralError(f"at least one {what} is required")
    best = max(values)
    if sum(v == best for v in values) > 1:
        raise DegenerateOptimumError(f"several {what}s attain the best value {best!r}")
    return best


def _model(family: Family | str, mean: float, variance: float | None) -> RewardModel:
    family = Family(family)
    if family is Family.GAUSSIAN:
        return RewardModel.gaussian(mean, 1.0 if variance is None else variance)
    return RewardModel.bernoulli(mean)


def _pair_information(a: RewardModel, b: RewardModel, g_star: float) -> float:
    """Cheapest KL cost moving a two-edge cycle to mean ``g_star``, solved on the slice."""
    target = 2.0 * g_star
    if a.family is Family.GAUSSIAN:
        gain = 0.5 * (a.mean + b.mean)
        # shifted pair: each edge takes g* + g - (other edge's mean)
        return kl(a, g_star + gain - b.mean) + kl(b, g_star + gain - a.mean)
    if not 0.0 < g_star < 1.0:
        raise InfeasibleError(f"Bernoulli gain {g_star!r} outside (0, 1)")
    gap = target - a.mean - b.mean
    # the optimum raises both edges, and both confusing means stay inside (0, 1)
    lo = max(a.mean, target - 1.0 + 4 * math.ulp(1.0))
    hi = min(a.mean + gap, math.nextafter(1.0, 0.0), target - math.ulp(target))

    def stationarity(x: float) -> float:
        return kl_mean_derivative(a, x) - kl_mean_derivative(b, target - x)

    x = brentq(stationarity, lo, hi, xtol=1e-16, rtol=4 * 2.220446049250313e-16, maxiter=500)
    return kl(a, x) + kl(b, target - x)


def line_search_bound(
    segment_means: Sequence[tuple[float, float]],
    family: Family | str = Family.BERNOULLI,
    variance: float | None = None,
) -> float:
    """Closed-form bound for the line search: sum of ``2 (g* - g_i) / I_i``.

    ``segment_means[i]`` holds the means of the two edges of the i-th cycle,
    going right then coming back.
    """
    pairs = [(_model(family, a, variance), _model(family, b, variance)) for a, b in segment_means]
    gains = [0.5 * (a.mean + b.mean) for a, b in pairs]
    g_star = _unique_best(gains, "segment gain")
    terms = []
    for (a, b), g in zip(pairs, gains):
        if g == g_star:
            continue
        terms.append(2.0 * (g_star - g) / _pair_information(a, b, g_star))
    return math.fsum(terms)


def state_dependent_bound(
    state_means: Sequence[float],
    family: Family | str = Family.BERNOULLI,
    variance: float | None = None,
) -> float:
    """Bandit-form bound: sum over suboptimal states of ``(r* - r) / KL(r, r*)``."""
    r_star = _unique_best(list(state_means), "state mean")
    terms = []
    for r in state_means:
        if r == r_star:
            continue
        terms.append((r_star - r) / kl(_model(family, r, variance), r_star))
    return math.fsum(terms)
