"""JSON problem files.

Layout::

    {
      "states": ["s1", "s2"],
      "actions": {
        "s1": {"a1": {"next": "s2", "reward": {"family": "bernoulli", "mean": 0.4}}},
        "s2": {"a2": {"next": "s1", "reward": {"family": "gaussian", "mean": 0.1, "variance": 1.0}}}
      },
      "initial_state": "s1"
    }

Unknown keys anywhere are rejected.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any

from .model import Dmdp, Edge, Family, RewardModel


class ProblemFormatError(ValueError):
    pass


@dataclass(frozen=True)
class Problem:
    dmdp: Dmdp
    initial_state: str | None = None


def _keys(obj: Any, where: str, required: set[str], optional: set[str] = frozenset()) -> None:
    if not isinstance(obj, dict):
        raise ProblemFormatError(f"{where}: expected an object")
    # unknown first: a misspelt key also shows up as a missing one
    unknown = obj.keys() - required - optional
    if unknown:
        raise ProblemFormatError(f"{where}: unknown key(s) {sorted(unknown)}")
    missing = required - obj.keys()
    if missing:
        raise ProblemFormatError(f"{where}: missing key(s) {sorted(missing)}")


def _number(value: Any, where: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ProblemFormatError(f"{where}: expected a number")
    return float(value)


def _reward(obj: Any, where: str) -> RewardModel:
    _keys(obj, where, {"family", "mean"}, {"variance"})
    try:
        family = Family(obj["family"])
    except ValueError:
        raise ProblemFormatError(f"{where}: unknown family {obj['family']!r}") from None
    mean = _number(obj["mean"], f"{where}.mean")
    variance = obj.get("variance")
    if variance is not None:
        variance = _number(variance, f"{where}.variance")
    return RewardModel(family, mean, variance)


def problem_from_dict(data: Any) -> Problem:
    _keys(data, "problem", {"states", "actions"}, {"initial_state"})
    states = data["states"]
    if not isinstance(states, list) or not all(isinstance(s, str) for s in states):
        raise ProblemFormatError("states: expected a list of strings")
    if len(set(states)) != len(states):
        raise ProblemFormatError("states: duplicate identifiers")
    actions = data["actions"]
    if not isinstance(actions, dict):
        raise ProblemFormatError("actions: expected an object")
    actions_at: dict[str, list[str]] = {}
    next_state: dict[Edge, str] = {}
    rewards: dict[Edge, RewardModel] = {}
    for s, table in actions.items():
        if not isinstance(table, dict):
            raise ProblemFormatError(f"actions.{s}: expected an object")
        actions_at[s] = list(table)
        for a, entry in table.items():
            where = f"actions.{s}.{a}"
            _keys(entry, where, {"next", "reward"})
            if not isinstance(entry["next"], str):
                raise ProblemFormatError(f"{where}.next: expected a string")
            next_state[Edge(s, a)] = entry["next"]
            rewards[Edge(s, a)] = _reward(entry["reward"], f"{where}.reward")
    initial = data.get("initial_state")
    if initial is not None and not isinstance(initial, str):
        raise ProblemFormatError("initial_state: expected a string")
    return Problem(Dmdp(tuple(states), actions_at, next_state, rewards), initial)


def read_problem(path: str | Path) -> Problem:
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ProblemFormatError(f"not valid JSON: {exc}") from None
    return problem_from_dict(data)


def problem_to_dict(dmdp: Dmdp, initial_state: str | None = None) -> dict:
    actions: dict[str, dict] = {}
    for s in dmdp.states:
        actions[s] = {}
        for e in dmdp.out_edges(s):
            r = dmdp.rewards[e]
            reward: dict[str, Any] = {"family": r.family.value, "mean": r.mean}
            if r.variance is not None:
                reward["variance"] = r.variance
            actions[s][e.action] = {"next": dmdp.next_state[e], "reward": reward}
    out: dict[str, Any] = {"states": list(dmdp.states), "actions": actions}
    if initial_state is not None:
        out["initial_state"] = initial_state
    return out


def dumps_problem(dmdp: Dmdp, initial_state: str | None = None) -> str:
    # json writes floats with repr, which round-trips exactly
    data = problem_to_dict(dmdp, initial_state)
    for table in data["actions"].values():
        for entry in table.values():
            if not math.isfinite(entry["reward"]["mean"]):
                raise ProblemFormatError("cannot serialise a non-finite mean")
    return json.dumps(data, indent=2) + "\n"
