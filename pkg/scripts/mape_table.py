"""Delta-dependence of MAPE per postprocess mode at desk scale.

    python scripts/mape_table.py --n 16 --instances 10 --seed 0
"""

import argparse

from qubo_admm import bench
from qubo_admm.admm import Postprocess

MODES = ["greedy", "boltzmann-0.1", "boltzmann-1", "boltzmann-10"]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=16)
    ap.add_argument("--deltas", type=float, nargs="+", default=[0.2, 0.6, 1.0])
    ap.add_argument("--instances", type=int, default=10)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--csv", help="also write the aggregate CSV here")
    args = ap.parse_args()

    pps = [Postprocess.parse(m) for m in MODES]
    _, tasks = bench.build_tasks([args.n], args.deltas, args.instances, ["admm-sa"], pps, args.seed)
    rows = bench.aggregate(bench.run_tasks(tasks, args.workers))

    table = {(r["delta"], r["postprocess"]): r["mape"] for r in rows}
    print(f"MAPE at n={args.n} ({args.instances} instances per delta)")
    print("delta   " + "".join(f"{m:>15}" for m in MODES))
    for d in args.deltas:
        print(f"{d:<8}" + "".join(f"{table[(d, m)]:>15.4f}" for m in MODES))
    if args.csv:
        with open(args.csv, "w") as fh:
            fh.write(bench.rows_to_csv(rows))


if __name__ == "__main__":
    main()
