"""QUBO samplers and sample postprocessing.

All samplers minimize the QUBO energy; the constant offset never changes which
states they prefer but energies in the returned :class:`SampleSet` include it.

Temperatures (``beta_min``, ``beta_max`` for annealing and ``beta`` for Gibbs
resampling) are applied to the *normalized* problem, i.e. the QUBO divided by
its largest absolute coefficient. This keeps default schedules scale-free.
"""

from __future__ import annotations

import abc
import time
from dataclasses import dataclass, field, replace
from typing import Iterator

import numpy as np

from .qubo import DimensionError, QuboMatrix

BRUTE_FORCE_MAX_N = 24


def lex_order(states: np.ndarray, primary: np.ndarray | None = None) -> np.ndarray:
    """Indices sorting rows by ``primary`` then lexicographically by bits."""
    keys = [states[:, j] for j in reversed(range(states.shape[1]))]
    if primary is not None:
        keys.append(primary)
    if not keys:
        return np.arange(states.shape[0])
    return np.lexsort(keys)


@dataclass(frozen=True, eq=False)
class SampleSet:
    """Distinct states with energies and occurrence counts, sorted by energy.

    Ties in energy are ordered lexicographically by bit-vector, so ``states[0]``
    is the lexicographically smallest minimum-energy sample.
    """

    states: np.ndarray
    energies: np.ndarray
    counts: np.ndarray
    info: dict = field(default_factory=dict)

    @classmethod
    def from_states(cls, q: QuboMatrix, states: np.ndarray, info: dict | None = None) -> SampleSet:
        """Merge duplicate rows, compute energies against ``q`` and sort."""
        s = np.asarray(states, dtype=np.int8)
        if s.ndim != 2 or s.shape[1] != q.n:
            raise DimensionError(f"states shape {s.shape} incompatible with n={q.n}")
        if s.shape[0] == 0:
            raise ValueError("a SampleSet needs at least one state")
        uniq, counts = np.unique(s, axis=0, return_counts=True)
        energies = q.energies(uniq)
        order = lex_order(uniq, energies)
        return cls._frozen(uniq[order], energies[order], counts[order], info)

    @classmethod
    def _frozen(cls, states, energies, counts, info=None) -> SampleSet:
        for a in (states, energies, counts):
            a.setflags(write=False)
        return cls(states, energies, counts, dict(info or {}))

    @property
    def num_records(self) -> int:
        return int(self.states.shape[0])

    @property
    def total_reads(self) -> int:
        return int(self.counts.sum())

    @property
    def first(self) -> tuple[np.ndarray, float, int]:
        return self.states[0], float(self.energies[0]), int(self.counts[0])

    def records(self) -> Iterator[tuple[tuple[int, ...], float, int]]:
        for s, e, c in zip(self.states, self.energies, self.counts):
            yield tuple(int(b) for b in s), float(e), int(c)

    def expanded(self) -> np.ndarray:
        """One row per read (records repeated by their counts)."""
        return np.repeat(self.states, self.counts, axis=0)

    def check(self, q: QuboMatrix, atol: float = 1e-9) -> None:
        """Raise AssertionError if the set is internally inconsistent with ``q``."""
        assert np.allclose(q.energies(self.states), self.energies, rtol=0, atol=atol)
        assert np.all(self.counts >= 1)
        assert np.unique(self.states, axis=0).shape[0] == self.num_records
        order = lex_order(self.states, self.energies)
        assert np.array_equal(order, np.arange(self.num_records))


class Sampler(abc.ABC):
    """Anything that turns a QUBO into a :class:`SampleSet`."""

    @abc.abstractmethod
    def sample(self, q: QuboMatrix, seed: int = 0) -> SampleSet:
        ...


def all_states(n: int) -> np.ndarray:
    """All ``2**n`` bit-vectors in lexicographic order (``x_0`` most significant)."""
    idx = np.arange(1 << n, dtype=np.int64)
    shifts = np.arange(n - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def brute_force_sample(q: QuboMatrix) -> SampleSet:
    """Enumerate every assignment; the first record is the global minimum."""
    if q.n > BRUTE_FORCE_MAX_N:
        raise ValueError(f"brute force limited to n <= {BRUTE_FORCE_MAX_N}, got {q.n}")
    t0 = time.perf_counter()
    states = all_states(q.n)
    energies = q.energies(states)
    order = lex_order(states, energies)
    counts = np.ones(states.shape[0], dtype=np.int64)
    elapsed = time.perf_counter() - t0
    return SampleSet._frozen(states[order], energies[order], counts, {"anneal_time": elapsed})


class BruteForceSampler(Sampler):
    def sample(self, q: QuboMatrix, seed: int = 0) -> SampleSet:
        return brute_force_sample(q)


@dataclass(frozen=True)
class SaParams:
    num_reads: int = 2000
    sweeps: int = 100
    beta_min: float = 0.1
    beta_max: float = 10.0
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_reads < 1 or self.sweeps < 1:
            raise ValueError("num_reads and sweeps must be >= 1")
        if not 0 < self.beta_min <= self.beta_max:
            raise ValueError("need 0 < beta_min <= beta_max")


def _normalized(q: QuboMatrix) -> tuple[np.ndarray, np.ndarray]:
    scale = q.max_abs() or 1.0
    return q.linear / scale, q.coupling / scale


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def simulated_annealing_sample(q: QuboMatrix, params: SaParams = SaParams()) -> SampleSet:
    """Single-flip Metropolis annealing, all reads advanced in lockstep.

    Each read starts from a uniformly random state. One sweep proposes a flip
    of every variable in index order; inverse temperature rises geometrically
    from ``beta_min`` to ``beta_max`` over the sweeps. Random draws are laid
    out read-major, so the result depends only on ``params``.
    """
    n, reads = q.n, params.num_reads
    rng = _rng(params.seed)
    x = rng.integers(0, 2, size=(reads, n)).astype(np.float64)
    t0 = time.perf_counter()
    if n:
        h, w = _normalized(q)
        field_ = x @ w
        betas = np.geomspace(params.beta_min, params.beta_max, params.sweeps)
        for beta in betas:
            log_u = np.log1p(-rng.random((reads, n)))
            for i in range(n):
                xi = x[:, i]
                delta = (1.0 - 2.0 * xi) * (h[i] + field_[:, i])
                flip = (delta <= 0.0) | (log_u[:, i] < -beta * delta)
                if flip.any():
                    step = np.where(flip, 1.0 - 2.0 * xi, 0.0)
                    x[:, i] += step
                    field_ += np.outer(step, w[i])
    elapsed = time.perf_counter() - t0
    return SampleSet.from_states(q, x, {"anneal_time": elapsed})


@dataclass
class SimulatedAnnealingSampler(Sampler):
    params: SaParams = field(default_factory=SaParams)

    def sample(self, q: QuboMatrix, seed: int = 0) -> SampleSet:
        return simulated_annealing_sample(q, replace(self.params, seed=seed))


def _flip_deltas(x: np.ndarray, h: np.ndarray, w: np.ndarray) -> np.ndarray:
    return (1.0 - 2.0 * x) * (h + x @ w)


def greedy_descent_postprocess(q: QuboMatrix, s: SampleSet) -> SampleSet:
    """Drive every read to a single-flip local minimum by steepest descent."""
    x = s.expanded().astype(np.float64)
    h, w = q.linear, q.coupling
    active = np.arange(x.shape[0])
    while active.size and q.n:
        d = _flip_deltas(x[active], h, w)
        best = np.argmin(d, axis=1)
        gain = d[np.arange(active.size), best]
        # strict decrease only; a tiny tolerance keeps float noise from cycling
        moving = gain < -1e-12
        if not moving.any():
            break
        rows, cols = active[moving], best[moving]
        x[rows, cols] = 1.0 - x[rows, cols]
        active = rows
    return SampleSet.from_states(q, x, s.info)


def boltzmann_postprocess(
    q: QuboMatrix, s: SampleSet, beta: float, gibbs_sweeps: int = 10, seed: int = 0
) -> SampleSet:
    """Resample each read toward ``P(x) ~ exp(-beta * E(x) / max|Q|)`` by Gibbs sweeps."""
    if not beta > 0:
        raise ValueError("beta must be positive")
    x = s.expanded().astype(np.float64)
    rng = _rng(seed)
    if q.n:
        h, w = _normalized(q)
        field_ = x @ w
        for _ in range(gibbs_sweeps):
            u = rng.random(x.shape)
            for i in range(q.n):
                # P(x_i = 1) = 1 / (1 + exp(beta * dE)), dE = E(x_i=1) - E(x_i=0)
                de = h[i] + field_[:, i]
                p_one = 0.5 * (1.0 - np.tanh(0.5 * beta * de))
                new = (u[:, i] < p_one).astype(np.float64)
                step = new - x[:, i]
                if step.any():
                    x[:, i] = new
                    field_ += np.outer(step, w[i])
    return SampleSet.from_states(q, x, s.info)
