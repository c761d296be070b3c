"""Constrained binary programs and their penalty encodings."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .qubo import DimensionError, QuboMatrix, add_scaled, as_bits, square_of_affine


class ConstraintKind(str, enum.Enum):
    EQUALITY = "eq"
    INEQUALITY_LE = "le"


@dataclass(frozen=True, eq=False)
class LinearConstraint:
    """``coeffs . x == bound`` or ``coeffs . x <= bound`` with integer data."""

    coeffs: np.ndarray
    bound: int
    kind: ConstraintKind = ConstraintKind.INEQUALITY_LE

    def __post_init__(self) -> None:
        c = np.array(self.coeffs)
        if c.ndim != 1:
            raise DimensionError("constraint coefficients must be 1-D")
        if c.size and not np.all(np.equal(np.mod(c, 1), 0)):
            raise ValueError("constraint coefficients must be integers")
        c = c.astype(np.int64)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)
        if int(self.bound) != self.bound:
            raise ValueError("constraint bound must be an integer")
        object.__setattr__(self, "bound", int(self.bound))
        object.__setattr__(self, "kind", ConstraintKind(self.kind))

    @property
    def n(self) -> int:
        return int(self.coeffs.shape[0])

    def residual(self, x: np.ndarray) -> int:
        return int(self.coeffs @ x) - self.bound

    def satisfied(self, x: np.ndarray) -> bool:
        r = self.residual(x)
        return r == 0 if self.kind is ConstraintKind.EQUALITY else r <= 0


def le(coeffs: Sequence[int], bound: int) -> LinearConstraint:
    return LinearConstraint(np.asarray(coeffs), bound, ConstraintKind.INEQUALITY_LE)


def eq(coeffs: Sequence[int], bound: int) -> LinearConstraint:
    return LinearConstraint(np.asarray(coeffs), bound, ConstraintKind.EQUALITY)


def default_gamma(objective: QuboMatrix) -> float:
    """Ten times the sum of absolute objective coefficients (bounds the range of f)."""
    total = float(np.abs(objective.upper).sum())
    return 10.0 * total if total > 0 else 1.0


@dataclass(frozen=True, eq=False)
class ConstrainedProblem:
    """Minimize a QUBO objective subject to linear equalities and ``<=`` inequalities.

    ``gamma`` weights each violated constraint in :func:`evaluate_e_ineq`; when
    omitted it defaults to :func:`default_gamma` of the objective.
    """

    objective: QuboMatrix
    equalities: tuple[LinearConstraint, ...] = ()
    inequalities: tuple[LinearConstraint, ...] = ()
    gamma: float | None = None
    n: int = field(init=False)

    def __post_init__(self) -> None:
        n = self.objective.n
        object.__setattr__(self, "n", n)
        eqs = tuple(self.equalities)
        ineqs = tuple(self.inequalities)
        for c in eqs:
            if c.kind is not ConstraintKind.EQUALITY:
                raise ValueError("equalities must have kind EQUALITY")
        for c in ineqs:
            if c.kind is not ConstraintKind.INEQUALITY_LE:
                raise ValueError("inequalities must have kind INEQUALITY_LE")
        for c in eqs + ineqs:
            if c.n != n:
                raise DimensionError(f"constraint of length {c.n} in problem of size {n}")
        object.__setattr__(self, "equalities", eqs)
        object.__setattr__(self, "inequalities", ineqs)
        gamma = default_gamma(self.objective) if self.gamma is None else float(self.gamma)
        if not gamma > 0:
            raise ValueError("gamma must be positive")
        object.__setattr__(self, "gamma", gamma)

    @property
    def ineq_matrix(self) -> np.ndarray:
        """``(M, n)`` coefficient matrix of the inequalities."""
        if not self.inequalities:
            return np.zeros((0, self.n), dtype=np.int64)
        return np.stack([c.coeffs for c in self.inequalities])

    @property
    def ineq_bounds(self) -> np.ndarray:
        return np.array([c.bound for c in self.inequalities], dtype=np.int64)

    @property
    def eq_matrix(self) -> np.ndarray:
        if not self.equalities:
            return np.zeros((0, self.n), dtype=np.int64)
        return np.stack([c.coeffs for c in self.equalities])

    @property
    def eq_bounds(self) -> np.ndarray:
        return np.array([c.bound for c in self.equalities], dtype=np.int64)

    def feasible_mask(self, states: np.ndarray) -> np.ndarray:
        """Vectorized feasibility of each row of a ``(k, n)`` 0/1 array."""
        s = np.asarray(states, dtype=np.int64)
        ok = np.ones(s.shape[0], dtype=bool)
        if self.inequalities:
            ok &= np.all(s @ self.ineq_matrix.T <= self.ineq_bounds, axis=1)
        if self.equalities:
            ok &= np.all(s @ self.eq_matrix.T == self.eq_bounds, axis=1)
        return ok


def residuals(p: ConstrainedProblem, x: Sequence[int] | np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Return ``(F x - C, G x - D)``."""
    xv = as_bits(x, p.n).astype(np.int64)
    return p.eq_matrix @ xv - p.eq_bounds, p.ineq_matrix @ xv - p.ineq_bounds


def is_feasible(p: ConstrainedProblem, x: Sequence[int] | np.ndarray) -> bool:
    r_eq, r_ineq = residuals(p, x)
    return bool(np.all(r_eq == 0) and np.all(r_ineq <= 0))


def count_violations(p: ConstrainedProblem, x: Sequence[int] | np.ndarray) -> int:
    r_eq, r_ineq = residuals(p, x)
    return int(np.count_nonzero(r_eq != 0) + np.count_nonzero(r_ineq > 0))


def evaluate_e_ineq(p: ConstrainedProblem, x: Sequence[int] | np.ndarray) -> float:
    """Objective plus ``gamma`` per violated constraint (step-function penalty).

    Violated equalities are counted with the same weight as inequalities.
    """
    return p.objective.energy(x) + p.gamma * count_violations(p, x)


def penalized_qubo_equality(p: ConstrainedProblem, mu: float = 1.0) -> QuboMatrix:
    """Fold equalities into the objective as ``mu * sum_l (F_l x - C_l)**2``.

    Inequalities are left alone.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    q = p.objective
    for c in p.equalities:
        q = add_scaled(q, square_of_affine(c.coeffs, -c.bound), mu)
    return q


def slack_range(c: LinearConstraint) -> int:
    """``D - min_x G.x`` over the hypercube; the minimum is the sum of negative coefficients."""
    return c.bound - int(c.coeffs[c.coeffs < 0].sum())


def slack_bit_count(r: int) -> int:
    """``ceil(log2(r + 1))`` computed exactly; zero when ``r <= 0``."""
    return int(r).bit_length() if r > 0 else 0


def slack_coefficients(r: int) -> list[int]:
    """Binary-expansion weights covering exactly ``0..r``.

    The last weight is capped at ``r - (2**(k-1) - 1)`` so no value above ``r``
    is representable.
    """
    k = slack_bit_count(r)
    if k == 0:
        return []
    return [1 << b for b in range(k - 1)] + [r - ((1 << (k - 1)) - 1)]


@dataclass(frozen=True)
class SlackEncoding:
    problem: ConstrainedProblem
    bits_per_constraint: tuple[int, ...]
    coefficients: tuple[tuple[int, ...], ...]

    @property
    def num_variables(self) -> int:
        return self.problem.n

    @property
    def num_slack_bits(self) -> int:
        return sum(self.bits_per_constraint)


def slack_encode(p: ConstrainedProblem, mu: float) -> SlackEncoding:
    """Replace each inequality by ``mu * (G x - D + s)**2`` with binary-expanded slack ``s``.

    Slack bits are appended after the original variables, constraint by
    constraint. Equalities are kept (zero-padded) and the objective gains the
    penalty; the returned problem has no inequalities.
    """
    if not mu > 0:
        raise ValueError("mu must be positive")
    bits = []
    coeffs = []
    for c in p.inequalities:
        w = slack_coefficients(slack_range(c))
        bits.append(len(w))
        coeffs.append(tuple(w))
    n_total = p.n + sum(bits)

    u = np.zeros((n_total, n_total))
    u[: p.n, : p.n] = p.objective.upper
    obj = QuboMatrix(n_total, u, p.objective.offset)
    start = p.n
    for c, w in zip(p.inequalities, coeffs):
        a = np.zeros(n_total)
        a[: p.n] = c.coeffs
        a[start : start + len(w)] = w
        obj = add_scaled(obj, square_of_affine(a, -c.bound), mu)
        start += len(w)

    pad = n_total - p.n
    eqs = tuple(
        LinearConstraint(np.concatenate([c.coeffs, np.zeros(pad, dtype=np.int64)]), c.bound, c.kind)
        for c in p.equalities
    )
    enc = ConstrainedProblem(obj, equalities=eqs, inequalities=(), gamma=p.gamma)
    return SlackEncoding(enc, tuple(bits), tuple(coeffs))
