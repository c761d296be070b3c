"""Command-line interface: ``generate``, ``solve`` and ``benchmark``.

Exit codes: 0 feasible result, 2 no feasible solution, 3 input error,
4 parameter error. ``QUBO_ADMM_OUTPUT_DIR`` sets the default output directory.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
from pathlib import Path

from . import bench, qkp
from .admm import AdmmParams, Postprocess
from .samplers import BRUTE_FORCE_MAX_N, SaParams

EXIT_OK = 0
EXIT_NO_FEASIBLE = 2
EXIT_INPUT = 3
EXIT_PARAM = 4

OUTPUT_ENV = "QUBO_ADMM_OUTPUT_DIR"

log = logging.getLogger("qubo_admm")


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage, which collides with the no-feasible code
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_PARAM, f"{self.prog}: error: {message}\n")


def _default_dir() -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "."))


def _add_solver_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("ADMM")
    g.add_argument("--rho", type=float, default=0.1)
    g.add_argument("--t-max", type=int, default=30)
    g.add_argument("--t-conv", type=int, default=10)
    g.add_argument("--epsilon", type=float, default=1e-3)
    g.add_argument("--gamma", type=float, default=None, help="default: 10 x sum|objective terms|")
    g.add_argument("--mu", type=float, default=1.0, help="equality penalty weight")
    s = p.add_argument_group("sampler")
    s.add_argument("--reads", type=int, default=2000)
    s.add_argument("--sweeps", type=int, default=100)
    s.add_argument("--beta-min", type=float, default=0.1)
    s.add_argument("--beta-max", type=float, default=10.0)
    s.add_argument("--gibbs-sweeps", type=int, default=10)
    s.add_argument("--slack-mu", type=float, default=None, help="slack penalty weight (slack-sa)")


def _config(args, postprocess: Postprocess) -> bench.SolverConfig:
    try:
        admm = AdmmParams(
            rho=args.rho, t_max=args.t_max, t_conv=args.t_conv, epsilon=args.epsilon,
            gamma=args.gamma, mu=args.mu, postprocess=postprocess,
        )
        sa = SaParams(args.reads, args.sweeps, args.beta_min, args.beta_max)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    return bench.SolverConfig(admm, sa, args.slack_mu)


def _postprocess(tag: str, gibbs_sweeps: int) -> Postprocess:
    try:
        return Postprocess.parse(tag, gibbs_sweeps)
    except ValueError as exc:
        raise UsageError(f"bad postprocess {tag!r}: {exc}") from exc


def cmd_generate(args) -> int:
    if not 0 < args.delta <= 1:
        raise UsageError("--delta must lie in (0, 1]")
    if args.n < 1 or args.count < 1:
        raise UsageError("--n and --count must be >= 1")
    out = Path(args.out) if args.out else _default_dir()
    out.mkdir(parents=True, exist_ok=True)
    for inst in qkp.generate_suite(args.n, args.delta, args.count, args.seed):
        path = out / f"{bench.instance_id(inst)}.json"
        path.write_text(inst.to_json())
        print(path)
    return EXIT_OK


def load_instance(path: str) -> qkp.QkpInstance:
    try:
        return qkp.QkpInstance.from_json(Path(path).read_text())
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise InputError(f"cannot read instance {path}: {exc}") from exc


def cmd_solve(args) -> int:
    inst = load_instance(args.instance)
    if args.method in ("admm-exact", "oracle") and inst.n > BRUTE_FORCE_MAX_N:
        raise UsageError(f"{args.method} needs n <= {BRUTE_FORCE_MAX_N}")
    config = _config(args, _postprocess(args.postprocess, args.gibbs_sweeps))
    opt = None
    if args.with_oracle or args.method == "oracle":
        if inst.n > BRUTE_FORCE_MAX_N:
            raise UsageError(f"oracle needs n <= {BRUTE_FORCE_MAX_N}")
        opt = qkp.brute_force_opt(inst)[1]
    rec = bench.run_method(inst, args.method, config, args.seed, opt)
    print(json.dumps(rec.as_dict()))
    return EXIT_OK if rec.feasible else EXIT_NO_FEASIBLE


def cmd_benchmark(args) -> int:
    if args.seed is None:
        raise UsageError("benchmark requires --seed")
    for m in args.methods:
        if m not in bench.METHODS:
            raise UsageError(f"unknown method {m!r}")
    for d in args.delta:
        if not 0 < d <= 1:
            raise UsageError("--delta values must lie in (0, 1]")
    if any(n > BRUTE_FORCE_MAX_N for n in args.n) and (
        "oracle" in args.methods or "admm-exact" in args.methods
    ):
        raise UsageError(f"oracle/admm-exact need n <= {BRUTE_FORCE_MAX_N}")
    pps = [_postprocess(t, args.gibbs_sweeps) for t in args.postprocess]
    config = _config(args, Postprocess())
    insts, tasks = bench.build_tasks(
        args.n, args.delta, args.instances, args.methods, pps, args.seed,
        repeats=args.repeats, config=config, with_oracle=not args.no_oracle,
    )
    if args.instances_dir:
        d = Path(args.instances_dir)
        d.mkdir(parents=True, exist_ok=True)
        for inst in insts:
            (d / f"{bench.instance_id(inst)}.json").write_text(inst.to_json())
    records = bench.run_tasks(tasks, args.workers)
    rows = bench.aggregate(records)

    out = Path(args.out) if args.out else _default_dir() / "benchmark.csv"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(bench.rows_to_csv(rows))
    if args.records:
        Path(args.records).write_text("".join(json.dumps(r.as_dict()) + "\n" for r in records))
    if args.plot_data:
        Path(args.plot_data).write_text(bench.rows_to_plot_data(rows))
    print(bench.summary_table(rows))
    print(f"wrote {out}")
    return EXIT_OK if all(r.feasible for r in records) else EXIT_NO_FEASIBLE


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="qubo-admm", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="write random QKP instance files")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--delta", type=float, required=True)
    g.add_argument("--count", type=int, default=10)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or .)")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="solve one instance; prints a JSON record")
    s.add_argument("instance")
    s.add_argument("--method", choices=bench.METHODS, default="admm-sa")
    s.add_argument("--postprocess", default="none", help="none | greedy | boltzmann-<beta>")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--with-oracle", action="store_true", help="also compute the exact optimum")
    _add_solver_flags(s)
    s.set_defaults(func=cmd_solve)

    b = sub.add_parser("benchmark", help="accuracy/timing grid over n and delta")
    b.add_argument("--n", type=int, nargs="+", default=[16])
    b.add_argument("--delta", type=float, nargs="+", default=[0.2, 0.6, 1.0])
    b.add_argument("--instances", type=int, default=10)
    b.add_argument("--methods", nargs="+", default=["admm-sa"])
    b.add_argument("--postprocess", nargs="+", default=["none"])
    b.add_argument("--repeats", type=int, default=1, help="solver seeds per instance")
    b.add_argument("--seed", type=int, default=None, help="required")
    b.add_argument("--workers", type=int, default=1)
    b.add_argument("--out", help="CSV path (default $QUBO_ADMM_OUTPUT_DIR/benchmark.csv)")
    b.add_argument("--records", help="write per-run JSON lines here")
    b.add_argument("--plot-data", help="write long-format plot series here")
    b.add_argument("--instances-dir", help="also save the generated instances here")
    b.add_argument("--no-oracle", action="store_true", help="skip exact optima (no MAPE)")
    _add_solver_flags(b)
    b.set_defaults(func=cmd_benchmark)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"qubo-admm: error: {exc}", file=sys.stderr)
        return EXIT_PARAM
    except InputError as exc:
        print(f"qubo-admm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except OSError as exc:
        print(f"qubo-admm: error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
