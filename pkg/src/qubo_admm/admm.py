"""Slack-free ADMM for binary programs with linear inequality constraints.

Each inequality ``G_m x <= D_m`` is rewritten with a real auxiliary variable
``z_m = G_m x - D_m``. The x-update is a QUBO (augmented Lagrangian in x) handed
to a sampler; z and the multipliers are updated in closed form from the
lowest-energy sample, while the best feasible sample seen so far is kept as the
answer.
"""

from __future__ import annotations

import enum
import logging
import time
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .problem import ConstrainedProblem, evaluate_e_ineq, penalized_qubo_equality
from .qubo import DimensionError, QuboMatrix, add_scaled, affine_as_qubo, as_bits, square_of_affine
from .samplers import (
    SampleSet,
    Sampler,
    boltzmann_postprocess,
    greedy_descent_postprocess,
    lex_order,
)

log = logging.getLogger(__name__)


class Status(str, enum.Enum):
    CONVERGED_RESIDUAL = "converged-residual"
    STALLED = "stalled"
    MAX_ITERATIONS = "max-iterations"
    NO_FEASIBLE_FOUND = "no-feasible-found"


@dataclass(frozen=True)
class Postprocess:
    """``mode`` is ``"none"``, ``"greedy"`` or ``"boltzmann"`` (the latter uses ``beta``)."""

    mode: str = "none"
    beta: float = 10.0
    gibbs_sweeps: int = 10

    def __post_init__(self) -> None:
        if self.mode not in ("none", "greedy", "boltzmann"):
            raise ValueError(f"unknown postprocess mode {self.mode!r}")
        if self.mode == "boltzmann" and not self.beta > 0:
            raise ValueError("boltzmann beta must be positive")

    @property
    def tag(self) -> str:
        return f"boltzmann-{self.beta:g}" if self.mode == "boltzmann" else self.mode

    @classmethod
    def parse(cls, tag: str, gibbs_sweeps: int = 10) -> Postprocess:
        """Parse ``none``, ``greedy`` or ``boltzmann-<beta>``."""
        if tag.startswith("boltzmann"):
            _, _, b = tag.partition("-")
            return cls("boltzmann", float(b) if b else 10.0, gibbs_sweeps)
        return cls(tag)

    def apply(self, q: QuboMatrix, s: SampleSet, seed: int) -> SampleSet:
        if self.mode == "greedy":
            return greedy_descent_postprocess(q, s)
        if self.mode == "boltzmann":
            return boltzmann_postprocess(q, s, self.beta, self.gibbs_sweeps, seed=seed)
        return s


@dataclass(frozen=True)
class AdmmParams:
    rho: float = 0.1
    t_max: int = 30
    t_conv: int = 10
    epsilon: float = 1e-3
    gamma: float | None = None  # overrides the problem's gamma when set
    mu: float = 1.0  # weight of folded equality penalties
    postprocess: Postprocess = field(default_factory=Postprocess)
    seed: int = 0

    def __post_init__(self) -> None:
        if not self.rho > 0:
            raise ValueError("rho must be positive")
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.t_max < 1 or self.t_conv < 1 or self.t_conv > self.t_max:
            raise ValueError("need 1 <= t_conv <= t_max")


@dataclass(frozen=True)
class Incumbent:
    x: tuple[int, ...]
    value: float  # objective f(x)


@dataclass(frozen=True)
class IterationRecord:
    t: int
    x_cost: tuple[int, ...]
    x_cost_energy: float
    x_cost_feasible: bool
    x_feas: tuple[int, ...] | None
    incumbent_value: float | None
    e_ineq: float | None
    residual_norm: float | None
    z: tuple[float, ...]
    lam: tuple[float, ...]
    lam_increment: tuple[float, ...]


@dataclass
class Timings:
    """Seconds spent per phase.

    ``sampler`` is wall time inside the sampler call and ``anneal`` the core
    loop time it reports; ``postprocess`` and ``bookkeeping`` (QUBO assembly,
    selection, updates) cover the rest of ``total``.
    """

    sampler: float = 0.0
    anneal: float = 0.0
    postprocess: float = 0.0
    bookkeeping: float = 0.0
    total: float = 0.0

    def as_dict(self) -> dict[str, float]:
        return dict(vars(self))


@dataclass
class AdmmState:
    t: int
    z: np.ndarray
    lam: np.ndarray
    best_feasible: Incumbent | None = None
    stall_counter: int = 0
    history: list[IterationRecord] = field(default_factory=list)
    timings: Timings = field(default_factory=Timings)

    @classmethod
    def initial(cls, num_constraints: int) -> AdmmState:
        return cls(t=1, z=np.zeros(num_constraints), lam=np.zeros(num_constraints))


@dataclass(frozen=True)
class AdmmResult:
    status: Status
    best_feasible: Incumbent | None
    iterations: int
    history: tuple[IterationRecord, ...]
    timings: Timings
    z: tuple[float, ...]
    lam: tuple[float, ...]

    @property
    def x(self) -> tuple[int, ...] | None:
        return None if self.best_feasible is None else self.best_feasible.x

    @property
    def value(self) -> float | None:
        return None if self.best_feasible is None else self.best_feasible.value


def _check_lengths(p: ConstrainedProblem, *vectors: np.ndarray) -> None:
    m = len(p.inequalities)
    for v in vectors:
        if np.shape(v) != (m,):
            raise DimensionError(f"expected vector of length {m}, got shape {np.shape(v)}")


def build_step_qubo(
    p: ConstrainedProblem,
    z: Sequence[float] | np.ndarray,
    lam: Sequence[float] | np.ndarray,
    rho: float,
    mu: float = 1.0,
) -> QuboMatrix:
    """QUBO of the augmented Lagrangian as a function of x.

    ``f(x) + sum_m lam_m r_m + rho/2 sum_m r_m**2`` with ``r_m = G_m x - D_m - z_m``.
    The ``gamma * Theta(z_m)`` term does not depend on x and is left out.
    Equalities, if any, are folded in first with weight ``mu``.
    """
    z = np.asarray(z, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    _check_lengths(p, z, lam)
    q = penalized_qubo_equality(p, mu) if p.equalities else p.objective
    for c, zm, lm in zip(p.inequalities, z, lam):
        shift = -c.bound - zm
        q = add_scaled(q, affine_as_qubo(c.coeffs, shift), lm)
        q = add_scaled(q, square_of_affine(c.coeffs, shift), 0.5 * rho)
    return q


def heaviside(v: np.ndarray) -> np.ndarray:
    """1 where ``v > 0``, else 0."""
    return (np.asarray(v) > 0).astype(np.float64)


def evaluate_e_aug(
    p: ConstrainedProblem,
    x: Sequence[int] | np.ndarray,
    z: Sequence[float] | np.ndarray,
    lam: Sequence[float] | np.ndarray,
    rho: float,
    gamma: float | None = None,
) -> float:
    """Full augmented Lagrangian including ``gamma * sum Theta(z_m)``."""
    xv = as_bits(x, p.n).astype(np.float64)
    z = np.asarray(z, dtype=np.float64)
    lam = np.asarray(lam, dtype=np.float64)
    _check_lengths(p, z, lam)
    g = p.gamma if gamma is None else gamma
    r = p.ineq_matrix @ xv - p.ineq_bounds - z
    return float(p.objective.energy(xv) + g * heaviside(z).sum() + lam @ r + 0.5 * rho * r @ r)


def select_x_cost(s: SampleSet) -> np.ndarray:
    """Lowest-energy sample; ties go to the lexicographically smallest bit-vector."""
    if s.num_records == 0:
        raise ValueError("empty sample set")
    # SampleSet order already breaks energy ties lexicographically
    return s.states[0].copy()


def select_x_feas(s: SampleSet, p: ConstrainedProblem) -> np.ndarray | None:
    """Feasible sample with the smallest objective ``f`` (not the step energy)."""
    if s.num_records == 0:
        raise ValueError("empty sample set")
    mask = p.feasible_mask(s.states)
    if not mask.any():
        return None
    cand = s.states[mask]
    f = p.objective.energies(cand)
    return cand[lex_order(cand, f)[0]].copy()


def update_z(x_cost: np.ndarray, p: ConstrainedProblem) -> np.ndarray:
    """``z_m = min(0, G_m x_cost - D_m)``."""
    r = p.ineq_matrix @ np.asarray(x_cost, dtype=np.int64) - p.ineq_bounds
    return np.minimum(0.0, r.astype(np.float64))


def update_lambda(
    lam: np.ndarray, rho: float, x_cost: np.ndarray, z: np.ndarray, p: ConstrainedProblem
) -> np.ndarray:
    """``lam_m + rho * (G_m x_cost - D_m - z_m)``."""
    r = (p.ineq_matrix @ np.asarray(x_cost, dtype=np.int64) - p.ineq_bounds).astype(np.float64)
    return np.asarray(lam, dtype=np.float64) + rho * (r - np.asarray(z, dtype=np.float64))


def residual_norm(x: Sequence[int] | np.ndarray, z: np.ndarray, p: ConstrainedProblem) -> float:
    r = p.ineq_matrix @ np.asarray(x, dtype=np.int64) - p.ineq_bounds - z
    return float(np.sqrt(np.sum(r * r)))


def check_convergence(state: AdmmState, params: AdmmParams, p: ConstrainedProblem) -> Status | None:
    """Return a stop reason, or None to continue.

    ``state.t`` is the index of the next iteration. The stall and residual
    tests only apply once a feasible incumbent exists; the residual uses the
    incumbent with the current ``z``.
    """
    if state.t > params.t_max:
        return Status.MAX_ITERATIONS
    if state.best_feasible is None:
        return None
    if state.stall_counter >= params.t_conv:
        return Status.STALLED
    if residual_norm(state.best_feasible.x, state.z, p) < params.epsilon:
        return Status.CONVERGED_RESIDUAL
    return None


def solve(p: ConstrainedProblem, params: AdmmParams, sampler: Sampler) -> AdmmResult:
    """Run the ADMM loop and return the best feasible sample found.

    Per iteration: build the step QUBO, sample it (seed ``params.seed + t``),
    postprocess, pick the lowest-energy and best feasible samples, update the
    incumbent, then ``z`` and the multipliers, and test for termination.
    """
    if not p.inequalities:
        raise ValueError("ADMM needs at least one inequality constraint")
    if params.gamma is not None:
        p = ConstrainedProblem(p.objective, p.equalities, p.inequalities, params.gamma)
    state = AdmmState.initial(len(p.inequalities))
    tm = state.timings
    start = time.perf_counter()
    status: Status | None = None

    while status is None:
        t_iter = time.perf_counter()
        q = build_step_qubo(p, state.z, state.lam, params.rho, params.mu)
        seed = params.seed + state.t

        t0 = time.perf_counter()
        try:
            samples = sampler.sample(q, seed=seed)
        except Exception as exc:
            raise RuntimeError(f"sampler failed at ADMM iteration {state.t}") from exc
        t1 = time.perf_counter()
        tm.sampler += t1 - t0
        tm.anneal += float(samples.info.get("anneal_time", 0.0))
        samples = params.postprocess.apply(q, samples, seed)
        t2 = time.perf_counter()
        tm.postprocess += t2 - t1

        x_cost = select_x_cost(samples)
        x_feas = select_x_feas(samples, p)
        improved = False
        if x_feas is not None:
            f = p.objective.energy(x_feas)
            best = state.best_feasible
            if best is None or f < best.value:
                state.best_feasible = Incumbent(tuple(int(b) for b in x_feas), f)
                improved = True
        if state.best_feasible is not None:
            state.stall_counter = 0 if improved else state.stall_counter + 1

        z = update_z(x_cost, p)
        lam = update_lambda(state.lam, params.rho, x_cost, z, p)
        increment = lam - state.lam
        state.z, state.lam = z, lam

        inc = state.best_feasible
        state.history.append(
            IterationRecord(
                t=state.t,
                x_cost=tuple(int(b) for b in x_cost),
                x_cost_energy=float(samples.energies[0]),
                x_cost_feasible=bool(p.feasible_mask(x_cost[None, :])[0]),
                x_feas=None if x_feas is None else tuple(int(b) for b in x_feas),
                incumbent_value=None if inc is None else inc.value,
                e_ineq=None if inc is None else evaluate_e_ineq(p, inc.x),
                residual_norm=None if inc is None else residual_norm(inc.x, z, p),
                z=tuple(z.tolist()),
                lam=tuple(lam.tolist()),
                lam_increment=tuple(increment.tolist()),
            )
        )
        state.t += 1
        status = check_convergence(state, params, p)
        tm.bookkeeping += (time.perf_counter() - t_iter) - (t2 - t0)

    tm.total = time.perf_counter() - start
    if state.best_feasible is None:
        status = Status.NO_FEASIBLE_FOUND
    log.debug("ADMM stopped after %d iterations: %s", state.t - 1, status.value)
    return AdmmResult(
        status=status,
        best_feasible=state.best_feasible,
        iterations=state.t - 1,
        history=tuple(state.history),
        timings=tm,
        z=tuple(state.z.tolist()),
        lam=tuple(state.lam.tolist()),
    )
