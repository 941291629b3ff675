"""Command-line front end.

Exit codes: 0 ok, 2 invalid problem, 3 not communicating, 4 cycles not
edge-disjoint, 5 tied optimal cycles, 6 other unsupported input, 64 bad usage.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import statistics
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import instances
from .errors import (
    DegenerateOptimumError,
    DmdpError,
    NonDisjointError,
    NotCommunicatingError,
    StructuralError,
)
from .graph import enumerate_simple_cycles
from .lowerbound import solve_disjoint
from .model import Family, unreachable_pair, validate
from .problem import Problem, ProblemFormatError, dumps_problem, read_problem
from .simulator import POLICIES, run

log = logging.getLogger("dmdpbound")

EXIT_OK = 0
EXIT_INVALID = 2
EXIT_NOT_COMMUNICATING = 3
EXIT_NOT_DISJOINT = 4
EXIT_TIE = 5
EXIT_UNSUPPORTED = 6
EXIT_USAGE = 64

CYCLE_HEADER = ["cycle_id", "length", "gain", "edges"]
BOUND_HEADER = ["cycle_id", "information_number", "rate", "contribution"]
SIMULATION_HEADER = ["T", "seed", "expected_regret", "ratio"]
TOTAL_ROW_ID = "C(phi)"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def fmt(x) -> str:
    """12 significant digits, plain decimal point, empty for missing values."""
    if x is None:
        return ""
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    if isinstance(x, str):
        return x
    return f"{float(x):.12g}"


def _json_value(x):
    if x is None or isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return int(x)
    return float(f"{float(x):.12g}")


def render(header: Sequence[str], rows: Sequence[Sequence], fmt_name: str = "csv") -> str:
    if fmt_name == "json":
        data = [{h: _json_value(v) for h, v in zip(header, row)} for row in rows]
        return json.dumps(data, indent=2) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([fmt(v) for v in row])
    return buf.getvalue()


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _load(path: str) -> Problem:
    """Parse and validate; raises StructuralError / NotCommunicatingError."""
    try:
        problem = read_problem(path)
    except (OSError, ProblemFormatError) as exc:
        raise StructuralError(str(exc)) from None
    problems = validate(problem.dmdp)
    if problems:
        raise StructuralError("\n".join(problems))
    pair = unreachable_pair(problem.dmdp)
    if pair is not None:
        raise NotCommunicatingError(f"state {pair[1]!r} is not reachable from {pair[0]!r}")
    return problem


def _cycle_ids(cycles) -> dict:
    return {c: f"C{i}" for i, c in enumerate(cycles, start=1)}


def _edges_text(cycle) -> str:
    return " ".join(f"{e.state}:{e.action}" for e in cycle.edges)


def cmd_validate(args) -> int:
    problem = _load(args.path)
    d = problem.dmdp
    print(f"ok: {len(d.states)} states, {len(d.edges)} edges, communicating")
    return EXIT_OK


def cmd_cycles(args) -> int:
    problem = _load(args.path)
    cycles = enumerate_simple_cycles(problem.dmdp)
    ids = _cycle_ids(cycles)
    rows = [(ids[c], c.length, c.gain, _edges_text(c)) for c in cycles]
    _emit(render(CYCLE_HEADER, rows, args.format), args.out)
    return EXIT_OK


def cmd_bound(args) -> int:
    problem = _load(args.path)
    sol = solve_disjoint(problem.dmdp)
    ids = _cycle_ids(sol.cycles)
    rows = []
    for c in sol.cycles:
        if c in sol.per_cycle:
            b = sol.per_cycle[c]
            rows.append((ids[c], b.information_number, b.rate, b.contribution))
        elif c in sol.dominated:
            rows.append((ids[c], None, 0.0, 0.0))
    rows.append((TOTAL_ROW_ID, None, None, sol.constant))
    _emit(render(BOUND_HEADER, rows, args.format), args.out)
    return EXIT_OK


def _floats(text: str | None) -> list[float] | None:
    if text is None:
        return None
    try:
        return [float(v) for v in text.replace(";", ",").split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse means {text!r}") from None


def cmd_generate(args) -> int:
    means = _floats(args.means)
    rng = np.random.default_rng(args.seed)
    if args.kind == "line-search":
        n = args.size if args.size is not None else (len(means) // 2 if means else None)
        if n is None or n < 1:
            raise UsageError("line-search needs --size N (segments) or --means")
        if means is None:
            pairs = instances.random_segment_means(rng, n, args.family)
        elif len(means) != 2 * n:
            raise UsageError(f"line-search with {n} segments needs {2 * n} means, got {len(means)}")
        else:
            pairs = list(zip(means[::2], means[1::2]))
        dmdp = instances.line_search(pairs, args.family, args.variance)
    else:
        k = args.size if args.size is not None else (len(means) if means else None)
        if k is None or k < 1:
            raise UsageError("state-rewards needs --size K (states) or --means")
        if means is None:
            means = instances.random_state_means(rng, k, args.family)
        elif len(means) != k:
            raise UsageError(f"state-rewards with {k} states needs {k} means, got {len(means)}")
        dmdp = instances.state_rewards(means, args.family, args.variance)
    problems = validate(dmdp)
    if problems:
        raise UsageError("generated problem is invalid: " + "; ".join(problems))
    _emit(dumps_problem(dmdp), args.out)
    return EXIT_OK


def parse_seeds(text: str) -> list[int]:
    """``"1,2,3"`` or ``"count@base"`` (``"20@100"`` is 100..119)."""
    try:
        if "@" in text:
            count, base = text.split("@", 1)
            return list(range(int(base), int(base) + int(count)))
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise UsageError(f"cannot parse seeds {text!r}") from None


def parse_horizons(text: str) -> list[int]:
    try:
        values = sorted({int(float(v)) for v in text.split(",") if v.strip()})
    except ValueError:
        raise UsageError(f"cannot parse horizons {text!r}") from None
    if not values or values[0] < 1:
        raise UsageError("horizons must be positive integers")
    return values


def cmd_simulate(args) -> int:
    problem = _load(args.path)
    dmdp = problem.dmdp
    horizons = parse_horizons(args.horizons)
    seeds = parse_seeds(args.seeds)
    if not seeds:
        raise UsageError("at least one seed is required")
    initial = args.initial_state or problem.initial_state
    try:
        constant = solve_disjoint(dmdp).constant
    except DmdpError as exc:
        log.warning("no lower bound for this problem (%s); ratio column left empty", exc)
        constant = None
    policy = POLICIES[args.policy](dmdp)
    traces = {s: run(dmdp, policy, horizons[-1], s, horizons, initial) for s in seeds}

    def ratio(value: float, T: int):
        if not constant or T < 2:
            return None
        return value / (constant * math.log(T))

    rows = []
    for T in horizons:
        values = [traces[s].regret_at(T) for s in seeds]
        rows.extend((T, s, v, ratio(v, T)) for s, v in zip(seeds, values))
        mean = statistics.fmean(values)
        rows.append((T, "mean", mean, ratio(mean, T)))
        rows.append((T, "std", statistics.stdev(values) if len(values) > 1 else 0.0, None))
    _emit(render(SIMULATION_HEADER, rows, args.format), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dmdpbound", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="check a problem file")
    p.add_argument("path")
    p.set_defaults(func=cmd_validate)

    for name, func, help_text in [
        ("cycles", cmd_cycles, "list simple cycles and their gains"),
        ("bound", cmd_bound, "compute the regret lower-bound constant C(phi)"),
    ]:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("path")
        p.add_argument("--format", choices=["csv", "json"], default="csv")
        p.add_argument("--out")
        p.set_defaults(func=func)

    p = sub.add_parser("generate", help="write a line-search or state-reward problem file")
    p.add_argument("kind", choices=["line-search", "state-rewards"])
    p.add_argument("--size", type=int, help="segments (line-search) or states (state-rewards)")
    p.add_argument("--means", help="comma-separated means; drawn from --seed when omitted")
    p.add_argument("--family", choices=[f.value for f in Family], default="bernoulli")
    p.add_argument("--variance", type=float)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("simulate", help="measure regret of a policy against C(phi) log T")
    p.add_argument("path")
    p.add_argument("--policy", choices=sorted(POLICIES), default="klucb")
    p.add_argument("--horizons", default="1000,10000,100000")
    p.add_argument("--seeds", default="10@0", help="comma list or count@base")
    p.add_argument("--initial-state")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except StructuralError as exc:
        print(f"invalid problem:\n{exc}", file=sys.stderr)
        return EXIT_INVALID
    except NotCommunicatingError as exc:
        print(f"not communicating: {exc}", file=sys.stderr)
        return EXIT_NOT_COMMUNICATING
    except NonDisjointError as exc:
        print(f"cycles are not edge-disjoint: {exc}\n"
              "the general (non-disjoint) lower bound is not supported", file=sys.stderr)
        return EXIT_NOT_DISJOINT
    except DegenerateOptimumError as exc:
        print(f"tied optimum: {exc}", file=sys.stderr)
        return EXIT_TIE
    except DmdpError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_UNSUPPORTED


if __name__ == "__main__":
    sys.exit(main())
