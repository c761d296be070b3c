"""Quadratic knapsack instances, exact oracle and MAPE."""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from .problem import ConstrainedProblem, le
from .qubo import QuboMatrix
from .samplers import BRUTE_FORCE_MAX_N

log = logging.getLogger(__name__)

GENERATOR = "numpy-pcg64/v1"
"""Draw order: presence uniforms for the row-major upper triangle (diagonal
included), then profit values ``integers(1, 101)`` for the same entries, then
weights ``integers(1, 51, n)``, then capacity ``integers(lo, sum(w) + 1)``."""


@dataclass(frozen=True, eq=False)
class QkpInstance:
    """maximize ``x^T P x`` subject to ``w . x <= c`` (P upper-triangular, nonnegative)."""

    n: int
    profits: np.ndarray
    weights: np.ndarray
    capacity: int
    delta: float
    seed: int
    generator: str = GENERATOR

    def __post_init__(self) -> None:
        p = np.array(self.profits, dtype=np.int64)
        w = np.array(self.weights, dtype=np.int64)
        if p.shape != (self.n, self.n) or w.shape != (self.n,):
            raise ValueError("profit/weight shapes do not match n")
        if np.any(np.tril(p, -1) != 0):
            raise ValueError("profits must be upper-triangular")
        if np.any(p < 0) or np.any(w < 0):
            raise ValueError("profits and weights must be nonnegative")
        for a in (p, w):
            a.setflags(write=False)
        object.__setattr__(self, "profits", p)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "capacity", int(self.capacity))

    def profit(self, x: Sequence[int] | np.ndarray) -> int:
        xv = np.asarray(x, dtype=np.int64)
        return int(xv @ self.profits @ xv)

    def feasible(self, x: Sequence[int] | np.ndarray) -> bool:
        return int(np.asarray(x, dtype=np.int64) @ self.weights) <= self.capacity

    def nonzero_fraction(self) -> float:
        iu = np.triu_indices(self.n)
        return float(np.count_nonzero(self.profits[iu])) / len(iu[0])

    def to_json(self) -> str:
        ii, jj = np.nonzero(self.profits)
        triplets = [[int(i), int(j), int(self.profits[i, j])] for i, j in zip(ii, jj)]
        doc = {
            "n": self.n,
            "delta": float(self.delta),
            "seed": int(self.seed),
            "profits": triplets,
            "weights": [int(v) for v in self.weights],
            "capacity": self.capacity,
            "generator": self.generator,
        }
        return json.dumps(doc, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> QkpInstance:
        doc = json.loads(text)
        n = int(doc["n"])
        p = np.zeros((n, n), dtype=np.int64)
        for i, j, v in doc["profits"]:
            if not (0 <= i <= j < n):
                raise ValueError(f"profit index ({i}, {j}) invalid for n={n}")
            p[i, j] = v
        return cls(
            n=n,
            profits=p,
            weights=np.asarray(doc["weights"], dtype=np.int64),
            capacity=int(doc["capacity"]),
            delta=float(doc["delta"]),
            seed=int(doc["seed"]),
            generator=str(doc.get("generator", GENERATOR)),
        )


def generate(n: int, delta: float, seed: int) -> QkpInstance:
    """Gallo-style random instance.

    Each upper-triangular profit (diagonal included) is nonzero with
    probability ``delta`` and then uniform on 1..100; weights are uniform on
    1..50 and the capacity uniform on ``[min(50, sum w), sum w]``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    rng = np.random.Generator(np.random.PCG64(seed))
    iu = np.triu_indices(n)
    present = rng.random(len(iu[0])) < delta
    values = rng.integers(1, 101, size=len(iu[0]))
    p = np.zeros((n, n), dtype=np.int64)
    p[iu] = np.where(present, values, 0)
    w = rng.integers(1, 51, size=n)
    total = int(w.sum())
    c = int(rng.integers(min(50, total), total + 1))
    return QkpInstance(n, p, w, c, float(delta), int(seed))


def is_degenerate(inst: QkpInstance) -> bool:
    """True when the optimal profit is 0.

    Profits are nonnegative, so a positive-profit feasible set exists iff some
    single item or pair with a positive profit term fits on its own.
    """
    ii, jj = np.nonzero(inst.profits)
    load = inst.weights[ii] + np.where(ii == jj, 0, inst.weights[jj])
    return not bool(np.any(load <= inst.capacity))


def generate_suite(n: int, delta: float, count: int, seed: int) -> Iterator[QkpInstance]:
    """``count`` non-degenerate instances from consecutive seeds starting at ``seed``.

    Degenerate draws are skipped and the next seed is tried.
    """
    s, made = seed, 0
    while made < count:
        inst = generate(n, delta, s)
        s += 1
        if is_degenerate(inst):
            log.info("skipping degenerate QKP instance n=%d delta=%g seed=%d", n, delta, s - 1)
            continue
        made += 1
        yield inst


def to_problem(inst: QkpInstance, gamma: float | None = None) -> ConstrainedProblem:
    """Minimization form: objective ``-x^T P x``, one constraint ``w . x <= c``."""
    obj = QuboMatrix(inst.n, -inst.profits.astype(np.float64))
    return ConstrainedProblem(obj, inequalities=(le(inst.weights, inst.capacity),), gamma=gamma)


def brute_force_opt(inst: QkpInstance, chunk: int = 1 << 16) -> tuple[np.ndarray, int]:
    """Exact optimum by enumeration; ties go to the lexicographically smallest x."""
    if inst.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {inst.n}")
    n = inst.n
    p = inst.profits.astype(np.int64)
    best_val, best_x = -1, None
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    for lo in range(0, 1 << n, chunk):
        idx = np.arange(lo, min(lo + chunk, 1 << n), dtype=np.int64)
        xs = (idx[:, None] >> shifts) & 1
        ok = xs @ inst.weights <= inst.capacity
        vals = np.einsum("ri,ij,rj->r", xs, p, xs)
        vals = np.where(ok, vals, -1)
        k = int(np.argmax(vals))
        # strict > keeps the earliest (lexicographically smallest) maximizer
        if vals[k] > best_val:
            best_val, best_x = int(vals[k]), xs[k].astype(np.int8)
    assert best_x is not None
    return best_x, best_val


def mape(opt_values: Sequence[float], found_values: Sequence[float]) -> float:
    """Mean of ``|opt - found| / opt`` over instances."""
    opt = np.asarray(opt_values, dtype=np.float64)
    found = np.asarray(found_values, dtype=np.float64)
    if opt.shape != found.shape:
        raise ValueError("opt and found must have equal lengths")
    if opt.size == 0:
        raise ValueError("no instances")
    if np.any(opt == 0):
        raise ValueError("optimal value 0 makes the relative error undefined")
    return float(np.mean(np.abs(opt - found) / opt))

