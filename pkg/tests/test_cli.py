import csv
import io
import json
from pathlib import Path

import pytest

from dmdpbound.cli import main
from dmdpbound.graph import enumerate_simple_cycles
from dmdpbound.model import Edge
from dmdpbound.problem import read_problem

DATA = Path(__file__).parent / "data"
GOLDEN = Path(__file__).parent / "golden"


def cli(capsys, *args):
    code = main([str(a) for a in args])
    out, err = capsys.readouterr()
    return code, out, err


@pytest.mark.parametrize(
    "args, golden",
    [
        (["bound", DATA / "line_search_gaussian.json"], "bound_line_search_gaussian.csv"),
        (["bound", DATA / "line_search_gaussian.json", "--format", "json"], "bound_line_search_gaussian.json"),
        (["bound", DATA / "state_rewards.json"], "bound_state_rewards.csv"),
        (["bound", DATA / "single_cycle.json"], "bound_single_cycle.csv"),
        (["cycles", DATA / "state_rewards.json"], "cycles_state_rewards.csv"),
        (
            ["simulate", DATA / "line_search_gaussian.json", "--policy", "oracle",
             "--horizons", "10,100", "--seeds", "2@0"],
            "simulate_oracle.csv",
        ),
    ],
)
def test_reports_match_golden_files(capsys, args, golden):
    code, out, _ = cli(capsys, *args)
    assert code == 0
    assert out.encode("utf-8") == (GOLDEN / golden).read_bytes()


def test_bound_values(capsys):
    _, out, _ = cli(capsys, "bound", DATA / "line_search_gaussian.json")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert rows[-1]["cycle_id"] == "C(phi)" and float(rows[-1]["contribution"]) == 10.0
    _, out, _ = cli(capsys, "bound", DATA / "state_rewards.json")
    rows = list(csv.DictReader(io.StringIO(out)))
    assert float(rows[-1]["contribution"]) == pytest.approx(3.0352, abs=1e-4)


def test_json_mirrors_csv_fields(capsys):
    _, as_csv, _ = cli(capsys, "bound", DATA / "state_rewards.json")
    _, as_json, _ = cli(capsys, "bound", DATA / "state_rewards.json", "--format", "json")
    rows = list(csv.DictReader(io.StringIO(as_csv)))
    data = json.loads(as_json)
    assert [list(r) for r in rows] == [list(d) for d in data]
    for r, d in zip(rows, data):
        for k in r:
            if isinstance(d[k], float):
                assert float(r[k]) == d[k]


def test_out_flag_writes_the_same_bytes(tmp_path, capsys):
    target = tmp_path / "bound.csv"
    code, out, _ = cli(capsys, "bound", DATA / "state_rewards.json", "--out", target)
    assert code == 0 and out == ""
    assert target.read_bytes() == (GOLDEN / "bound_state_rewards.csv").read_bytes()


def test_validate_ok(capsys):
    code, out, _ = cli(capsys, "validate", DATA / "line_search_gaussian.json")
    assert code == 0 and out.startswith("ok")


@pytest.mark.parametrize(
    "name, code, needle",
    [
        ("dangling.json", 2, "(s1,a1)"),
        ("typo_key.json", 2, "maen"),
        ("not_communicating.json", 3, "'s1' is not reachable from 's2'"),
    ],
)
def test_validate_failures(capsys, name, code, needle):
    got, _, err = cli(capsys, "validate", DATA / name)
    assert got == code
    assert needle in err


def test_missing_file_is_invalid(capsys, tmp_path):
    code, _, err = cli(capsys, "validate", tmp_path / "absent.json")
    assert code == 2 and "absent.json" in err


def test_bound_exit_codes(capsys):
    code, _, err = cli(capsys, "bound", DATA / "shared_edge.json")
    assert code == 4 and "(s1,a1)" in err and "not supported" in err
    code, _, err = cli(capsys, "bound", DATA / "tie.json")
    assert code == 5 and "optimal gain" in err
    code, _, _ = cli(capsys, "bound", DATA / "not_communicating.json")
    assert code == 3


def test_simulate_needs_disjoint_cycles(capsys):
    code, _, _ = cli(capsys, "simulate", DATA / "shared_edge.json", "--horizons", "10", "--seeds", "1")
    assert code == 4


@pytest.mark.parametrize(
    "args",
    [
        ["generate", "line-search", "--size", "2", "--means", "0.1,0.2,0.3"],
        ["generate", "state-rewards", "--size", "3", "--means", "0.1,0.2"],
        ["generate", "line-search", "--means", "0.1,abc"],
        ["generate", "state-rewards", "--means", "0.5,1.5"],
        ["generate", "line-search"],
        ["simulate", DATA / "line_search_gaussian.json", "--seeds", "x@y"],
        ["simulate", DATA / "line_search_gaussian.json", "--horizons", "0,10"],
    ],
)
def test_malformed_parameters_are_usage_errors(capsys, args):
    code, _, err = cli(capsys, *args)
    assert code == 64 and "usage error" in err


def test_unknown_flag_is_a_usage_error(capsys):
    with pytest.raises(SystemExit) as info:
        main(["bound", str(DATA / "state_rewards.json"), "--fromat", "json"])
    assert info.value.code == 64


@pytest.mark.parametrize("n", [1, 3, 11])
def test_generated_line_search_round_trips(capsys, tmp_path, n):
    path = tmp_path / "ls.json"
    assert cli(capsys, "generate", "line-search", "--size", n, "--seed", 5, "--out", path)[0] == 0
    problem = read_problem(path)
    states = problem.dmdp.states
    assert len(states) == n + 1
    cycles = enumerate_simple_cycles(problem.dmdp)
    assert {c.edges for c in cycles} == {
        (Edge(states[i], "a1"), Edge(states[i + 1], "a2")) for i in range(n)
    }


def test_generated_state_rewards_round_trip(capsys, tmp_path):
    path = tmp_path / "sr.json"
    cli(capsys, "generate", "state-rewards", "--means", "0.9,0.8,0.5,0.3", "--out", path)
    d = read_problem(path).dmdp
    cycles = enumerate_simple_cycles(d)
    assert len(cycles) == 5
    # each state's reward sits on every edge entering it
    for e, s in d.next_state.items():
        assert d.rewards[e] == d.rewards[Edge(s, "a" + s[1:])]


def test_generate_is_seeded(capsys):
    a = cli(capsys, "generate", "line-search", "--size", 4, "--seed", 3)[1]
    b = cli(capsys, "generate", "line-search", "--size", 4, "--seed", 3)[1]
    c = cli(capsys, "generate", "line-search", "--size", 4, "--seed", 4)[1]
    assert a == b != c


def test_simulate_rows_and_aggregates(capsys):
    code, out, _ = cli(
        capsys, "simulate", DATA / "state_rewards.json", "--policy", "klucb",
        "--horizons", "100,1000", "--seeds", "3,1,2",
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [(r["T"], r["seed"]) for r in rows] == [
        (T, s) for T in ("100", "1000") for s in ("3", "1", "2", "mean", "std")
    ]
    per_seed = [float(r["expected_regret"]) for r in rows[:3]]
    assert float(rows[3]["expected_regret"]) == pytest.approx(sum(per_seed) / 3, rel=1e-11)
    assert rows[4]["ratio"] == ""


def test_simulate_without_bound_leaves_ratio_blank(capsys):
    code, out, err = cli(
        capsys, "simulate", DATA / "single_cycle.json", "--horizons", "50", "--seeds", "1"
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert all(r["ratio"] == "" for r in rows)


def test_problem_files_round_trip_at_full_precision(tmp_path):
    from dmdpbound.problem import dumps_problem, problem_from_dict
    from dmdpbound.instances import line_search

    d = line_search([(0.1 + 0.2, 1 / 3), (2 / 7, 0.7)])
    path = tmp_path / "p.json"
    path.write_text(dumps_problem(d, "s2"))
    problem = read_problem(path)
    assert problem.dmdp == d and problem.initial_state == "s2"
    with pytest.raises(ValueError, match="number"):
        problem_from_dict({"states": ["s"], "actions": {"s": {"a": {
            "next": "s", "reward": {"family": "bernoulli", "mean": True}}}}})


def test_initial_state_flag(capsys):
    code, out, _ = cli(
        capsys, "simulate", DATA / "line_search_gaussian.json", "--policy", "oracle",
        "--horizons", "10", "--seeds", "1", "--initial-state", "s2",
    )
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    # starting on the best cycle: five full laps, no regret
    assert abs(float(rows[0]["expected_regret"])) <= 1e-9
