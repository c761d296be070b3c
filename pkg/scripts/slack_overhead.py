"""Variable count of the slack-variable encoding versus the ADMM form.

    python scripts/slack_overhead.py --ns 16 32 64 128 --delta 0.6
"""

import argparse

from qubo_admm import qkp
from qubo_admm.problem import slack_encode


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[16, 32, 64, 128])
    ap.add_argument("--delta", type=float, default=0.6)
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    print(f"{'n':>5} {'admm vars':>10} {'slack vars (mean)':>18} {'max':>5}")
    for n in args.ns:
        sizes = [
            slack_encode(qkp.to_problem(inst), 1.0).num_variables
            for inst in qkp.generate_suite(n, args.delta, args.instances, args.seed)
        ]
        print(f"{n:>5} {n:>10} {sum(sizes) / len(sizes):>18.1f} {max(sizes):>5}")


if __name__ == "__main__":
    main()
