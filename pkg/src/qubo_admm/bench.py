"""Run solvers on QKP instances and aggregate benchmark cells."""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import qkp
from .admm import AdmmParams, Postprocess, solve
from .problem import slack_encode
from .samplers import BRUTE_FORCE_MAX_N, BruteForceSampler, SaParams, SimulatedAnnealingSampler

log = logging.getLogger(__name__)

METHODS = ("admm-sa", "admm-exact", "slack-sa", "oracle")

# seed offsets: instance seeds for cell k start at seed + CELL_STRIDE * k;
# solver repeat r of an instance uses instance.seed + REPEAT_STRIDE * r
CELL_STRIDE = 100_000
REPEAT_STRIDE = 7919


@dataclass(frozen=True)
class SolverConfig:
    admm: AdmmParams = field(default_factory=AdmmParams)
    sa: SaParams = field(default_factory=SaParams)
    slack_mu: float | None = None  # None: objective range + 1

    def echo(self) -> dict:
        a = self.admm
        return {
            "rho": a.rho,
            "t_max": a.t_max,
            "t_conv": a.t_conv,
            "epsilon": a.epsilon,
            "gamma": a.gamma,
            "mu": a.mu,
            "num_reads": self.sa.num_reads,
            "sweeps": self.sa.sweeps,
            "beta_min": self.sa.beta_min,
            "beta_max": self.sa.beta_max,
            "gibbs_sweeps": a.postprocess.gibbs_sweeps,
            "slack_mu": self.slack_mu,
        }


@dataclass
class RunRecord:
    instance_id: str
    n: int
    delta: float
    method: str
    postprocess: str
    found_value: int | None
    optimal_value: int | None
    feasible: bool
    x: str | None
    iterations: int
    status: str
    time_total: float
    time_sampler: float
    time_anneal: float
    time_postprocess: float
    time_bookkeeping: float
    seed: int
    num_variables: int
    slack_bits: int = 0
    params: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return asdict(self)


def instance_id(inst: qkp.QkpInstance) -> str:
    return f"qkp-n{inst.n}-d{inst.delta:g}-s{inst.seed}"


def _bits(x) -> str:
    return "".join(str(int(b)) for b in x)


def run_method(
    inst: qkp.QkpInstance,
    method: str,
    config: SolverConfig = SolverConfig(),
    seed: int = 0,
    optimal_value: int | None = None,
) -> RunRecord:
    """Solve one instance with one method and package the outcome."""
    if method not in METHODS:
        raise ValueError(f"unknown method {method!r}; expected one of {METHODS}")
    pp = config.admm.postprocess
    base = dict(
        instance_id=instance_id(inst),
        n=inst.n,
        delta=inst.delta,
        method=method,
        postprocess="none" if method == "oracle" else pp.tag,
        optimal_value=optimal_value,
        seed=seed,
        params=config.echo(),
    )
    if method == "oracle":
        t0 = time.perf_counter()
        x, v = qkp.brute_force_opt(inst)
        dt = time.perf_counter() - t0
        return RunRecord(
            **base, found_value=v, feasible=True, x=_bits(x), iterations=0, status="exact",
            time_total=dt, time_sampler=0.0, time_anneal=0.0, time_postprocess=0.0,
            time_bookkeeping=dt, num_variables=inst.n,
        )

    problem = qkp.to_problem(inst)
    if method == "slack-sa":
        return _run_slack(inst, problem, config, seed, base)

    sampler = (
        BruteForceSampler() if method == "admm-exact" else SimulatedAnnealingSampler(config.sa)
    )
    params = AdmmParams(**{**vars(config.admm), "seed": seed})
    res = solve(problem, params, sampler)
    tm = res.timings
    found = None if res.x is None else inst.profit(res.x)
    return RunRecord(
        **base,
        found_value=found,
        feasible=res.x is not None,
        x=None if res.x is None else _bits(res.x),
        iterations=res.iterations,
        status=res.status.value,
        time_total=tm.total,
        time_sampler=tm.sampler,
        time_anneal=tm.anneal,
        time_postprocess=tm.postprocess,
        time_bookkeeping=tm.bookkeeping,
        num_variables=inst.n,
    )


def _run_slack(inst, problem, config: SolverConfig, seed: int, base: dict) -> RunRecord:
    start = time.perf_counter()
    mu = config.slack_mu
    if mu is None:
        mu = float(np.abs(problem.objective.upper).sum()) + 1.0
    enc = slack_encode(problem, mu)
    q = enc.problem.objective
    t0 = time.perf_counter()
    samples = SimulatedAnnealingSampler(config.sa).sample(q, seed=seed)
    t1 = time.perf_counter()
    samples = config.admm.postprocess.apply(q, samples, seed)
    t2 = time.perf_counter()
    xs = samples.states[:, : inst.n]
    ok = problem.feasible_mask(xs)
    found = x = None
    if ok.any():
        cand = xs[ok]
        vals = -problem.objective.energies(cand)
        k = int(np.argmax(vals))
        x = cand[k]
        found = inst.profit(x)
    total = time.perf_counter() - start
    return RunRecord(
        **base,
        found_value=found,
        feasible=x is not None,
        x=None if x is None else _bits(x),
        iterations=1,
        status="sampled" if x is not None else "no-feasible-found",
        time_total=total,
        time_sampler=t1 - t0,
        time_anneal=float(samples.info.get("anneal_time", 0.0)),
        time_postprocess=t2 - t1,
        time_bookkeeping=total - (t2 - t0),
        num_variables=enc.num_variables,
        slack_bits=enc.num_slack_bits,
    )


@dataclass(frozen=True)
class Task:
    inst_json: str
    method: str
    postprocess: Postprocess
    config: SolverConfig
    seed: int
    optimal_value: int | None


def _run_task(task: Task) -> RunRecord:
    inst = qkp.QkpInstance.from_json(task.inst_json)
    admm = AdmmParams(**{**vars(task.config.admm), "postprocess": task.postprocess})
    cfg = SolverConfig(admm, task.config.sa, task.config.slack_mu)
    return run_method(inst, task.method, cfg, task.seed, task.optimal_value)


CSV_COLUMNS = [
    "n",
    "delta",
    "method",
    "postprocess",
    "runs",
    "mape",
    "feasible_rate",
    "mean_found",
    "mean_optimal",
    "mean_iterations",
    "mean_variables",
    "mean_time_total",
    "mean_time_sampler",
    "mean_time_anneal",
    "mean_time_postprocess",
    "mean_time_bookkeeping",
]


def build_tasks(
    ns: Sequence[int],
    deltas: Sequence[float],
    instances: int,
    methods: Sequence[str],
    postprocesses: Sequence[Postprocess],
    seed: int,
    repeats: int = 1,
    config: SolverConfig = SolverConfig(),
    with_oracle: bool = True,
) -> tuple[list[qkp.QkpInstance], list[Task]]:
    insts: list[qkp.QkpInstance] = []
    tasks: list[Task] = []
    cell = 0
    for n in ns:
        for delta in deltas:
            for inst in qkp.generate_suite(n, delta, instances, seed + CELL_STRIDE * cell):
                insts.append(inst)
                opt = None
                if with_oracle and n <= BRUTE_FORCE_MAX_N:
                    opt = qkp.brute_force_opt(inst)[1]
                text = inst.to_json()
                for method in methods:
                    pps = [Postprocess()] if method in ("oracle", "admm-exact") else postprocesses
                    for pp in pps:
                        for r in range(repeats if method != "oracle" else 1):
                            tasks.append(
                                Task(text, method, pp, config, inst.seed + REPEAT_STRIDE * r, opt)
                            )
            cell += 1
    return insts, tasks


def run_tasks(tasks: Sequence[Task], workers: int = 1) -> list[RunRecord]:
    if workers <= 1:
        return [_run_task(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_task, tasks, chunksize=1))


def _mean(vals: Iterable[float]) -> float:
    v = list(vals)
    return float(np.mean(v)) if v else math.nan


def aggregate(records: Sequence[RunRecord]) -> list[dict]:
    """One row per (n, delta, method, postprocess), sorted by that key."""
    groups: dict[tuple, list[RunRecord]] = {}
    for r in records:
        groups.setdefault((r.n, r.delta, r.method, r.postprocess), []).append(r)
    rows = []
    for key in sorted(groups):
        rs = groups[key]
        feas = [r for r in rs if r.feasible]
        m = math.nan
        if rs and all(r.optimal_value for r in rs):
            # infeasible runs count as found value 0 (100% error)
            m = qkp.mape([r.optimal_value for r in rs], [r.found_value or 0 for r in rs])
        rows.append(
            {
                "n": key[0],
                "delta": key[1],
                "method": key[2],
                "postprocess": key[3],
                "runs": len(rs),
                "mape": m,
                "feasible_rate": len(feas) / len(rs),
                "mean_found": _mean(r.found_value for r in feas),
                "mean_optimal": _mean(r.optimal_value for r in rs if r.optimal_value is not None),
                "mean_iterations": _mean(r.iterations for r in rs),
                "mean_variables": _mean(r.num_variables for r in rs),
                "mean_time_total": _mean(r.time_total for r in rs),
                "mean_time_sampler": _mean(r.time_sampler for r in rs),
                "mean_time_anneal": _mean(r.time_anneal for r in rs),
                "mean_time_postprocess": _mean(r.time_postprocess for r in rs),
                "mean_time_bookkeeping": _mean(r.time_bookkeeping for r in rs),
            }
        )
    return rows


def _fmt(v) -> str:
    if isinstance(v, float):
        return "" if math.isnan(v) else f"{v:.6g}"
    return str(v)


def rows_to_csv(rows: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for row in rows:
        w.writerow([_fmt(row[c]) for c in CSV_COLUMNS])
    return buf.getvalue()


PLOT_METRICS = [
    "mape",
    "feasible_rate",
    "mean_time_total",
    "mean_time_sampler",
    "mean_time_anneal",
    "mean_time_postprocess",
    "mean_time_bookkeeping",
]


def rows_to_plot_data(rows: Sequence[dict]) -> str:
    """Long-format series (accuracy and timing versus n) for external plotting."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["n", "delta", "method", "postprocess", "metric", "value"])
    for row in rows:
        for m in PLOT_METRICS:
            w.writerow([row["n"], _fmt(row["delta"]), row["method"], row["postprocess"], m, _fmt(row[m])])
    return buf.getvalue()


def summary_table(rows: Sequence[dict]) -> str:
    cols = ["n", "delta", "method", "postprocess", "runs", "mape", "feasible_rate",
            "mean_time_total", "mean_time_sampler", "mean_time_bookkeeping"]
    cells = [[_fmt(r[c]) for c in cols] for r in rows]
    widths = [max(len(c), *(len(x[i]) for x in cells)) if cells else len(c) for i, c in enumerate(cols)]
    lines = ["  ".join(c.ljust(wd) for c, wd in zip(cols, widths))]
    lines += ["  ".join(x.ljust(wd) for x, wd in zip(row, widths)) for row in cells]
    return "\n".join(lines)
