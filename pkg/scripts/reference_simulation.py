"""Regret of klucb and greedy on the reference line search, relative to C(phi) log T.

    python3 scripts/reference_simulation.py --seeds 20 --max-exponent 6

Writes one CSV row per (policy, horizon) to stdout.
"""

import argparse
import csv
import sys

from dmdpbound.instances import REFERENCE_SEGMENTS, line_search
from dmdpbound.simulator import POLICIES, regret_ratio_report


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--seeds", type=int, default=20, help="number of seeds, starting at 1")
    parser.add_argument("--max-exponent", type=int, default=6, help="largest horizon is 10**k")
    parser.add_argument("--policies", default="klucb,greedy,oracle")
    args = parser.parse_args(argv)

    dmdp = line_search(REFERENCE_SEGMENTS)
    horizons = [10**k for k in range(2, args.max_exponent + 1)]
    seeds = range(1, args.seeds + 1)
    writer = csv.writer(sys.stdout, lineterminator="\n")
    writer.writerow(["policy", "T", "mean_regret", "std_regret", "ratio"])
    for name in args.policies.split(","):
        report = regret_ratio_report(dmdp, POLICIES[name](dmdp), horizons, seeds)
        for row in report.rows:
            writer.writerow([name, row.horizon, f"{row.mean_regret:.6g}",
                             f"{row.std_regret:.6g}", f"{row.ratio:.6g}"])
        for flag in report.flags:
            print(f"# {name}: {flag}", file=sys.stderr)


if __name__ == "__main__":
    main()
