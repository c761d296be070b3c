"""N-dependence of ADMM phase timings next to the enumeration oracle.

Absolute times say nothing about the annealer; only the relative split
(sampler vs postprocess vs bookkeeping) is meaningful.

    python scripts/timing_vs_n.py --ns 8 12 16 20 --delta 1.0 --seed 0
"""

import argparse

from qubo_admm import bench
from qubo_admm.admm import Postprocess


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--ns", type=int, nargs="+", default=[8, 12, 16, 20])
    ap.add_argument("--delta", type=float, default=1.0)
    ap.add_argument("--instances", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--plot-data", help="write long-format series here")
    args = ap.parse_args()

    _, tasks = bench.build_tasks(
        args.ns, [args.delta], args.instances, ["admm-sa", "oracle"],
        [Postprocess("boltzmann", 10.0)], args.seed,
    )
    rows = bench.aggregate(bench.run_tasks(tasks))
    print(bench.summary_table(rows))
    if args.plot_data:
        with open(args.plot_data, "w") as fh:
            fh.write(bench.rows_to_plot_data(rows))


if __name__ == "__main__":
    main()
