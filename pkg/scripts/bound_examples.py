"""Print C(phi) for the worked line-search and state-reward examples.

For each instance the generic disjoint-cycle solver is compared with the
closed-form bound for that topology.

    python3 scripts/bound_examples.py
"""

from dmdpbound.instances import REFERENCE_SEGMENTS, line_search, state_rewards
from dmdpbound.lowerbound import line_search_bound, solve_disjoint, state_dependent_bound

LINE_SEARCH = [
    ("gaussian, gains 0.4 / 0.6", [(0.3, 0.5), (0.5, 0.7)], "gaussian", 1.0),
    ("bernoulli reference, gains 0.4 / 0.7 / 0.5", list(REFERENCE_SEGMENTS), "bernoulli", None),
]
STATE_REWARDS = [
    ("bernoulli, three states", [0.9, 0.8, 0.5], "bernoulli", None),
    ("bernoulli, four states", [0.9, 0.8, 0.5, 0.3], "bernoulli", None),
    ("gaussian, two states", [1.0, 0.0], "gaussian", 1.0),
]


def main():
    print(f"{'instance':52s} {'solver':>16s} {'closed form':>16s}")
    for label, segs, family, variance in LINE_SEARCH:
        sol = solve_disjoint(line_search(segs, family, variance))
        closed = line_search_bound(segs, family, variance)
        print(f"{'line search, ' + label:52s} {sol.constant:16.10f} {closed:16.10f}")
    for label, means, family, variance in STATE_REWARDS:
        sol = solve_disjoint(state_rewards(means, family, variance))
        closed = state_dependent_bound(means, family, variance)
        print(f"{'state rewards, ' + label:52s} {sol.constant:16.10f} {closed:16.10f}")


if __name__ == "__main__":
    main()
