"""Quadratic forms over binary variables.

A :class:`QuboMatrix` stores ``E(x) = sum_{i<=j} Q[i, j] x_i x_j + offset`` in
upper-triangular form. Diagonal entries are the linear terms because
``x_i**2 == x_i`` for binary ``x``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np


class DimensionError(ValueError):
    """Raised when vector or matrix dimensions disagree."""


def as_bits(x: Sequence[int] | np.ndarray, n: int | None = None) -> np.ndarray:
    """Validate ``x`` as a 0/1 vector (optionally of length ``n``) and return it as int8."""
    arr = np.asarray(x)
    if arr.ndim != 1:
        raise DimensionError(f"bit vector must be 1-D, got shape {arr.shape}")
    if n is not None and arr.shape[0] != n:
        raise DimensionError(f"bit vector has length {arr.shape[0]}, expected {n}")
    if arr.size and not np.all((arr == 0) | (arr == 1)):
        raise ValueError("bit vector entries must be 0 or 1")
    return arr.astype(np.int8)


@dataclass(frozen=True, eq=False)
class QuboMatrix:
    """Immutable upper-triangular QUBO with a constant offset."""

    n: int
    upper: np.ndarray
    offset: float = 0.0

    def __post_init__(self) -> None:
        u = np.array(self.upper, dtype=np.float64)
        if u.shape != (self.n, self.n):
            raise DimensionError(f"matrix shape {u.shape} does not match n={self.n}")
        if np.any(np.tril(u, -1) != 0.0):
            raise ValueError("lower-triangular entries must be zero; use QuboMatrix.from_dense")
        if not np.all(np.isfinite(u)) or not np.isfinite(self.offset):
            raise ValueError("QUBO coefficients must be finite")
        u.setflags(write=False)
        object.__setattr__(self, "upper", u)
        object.__setattr__(self, "offset", float(self.offset))

    @classmethod
    def zeros(cls, n: int, offset: float = 0.0) -> QuboMatrix:
        return cls(n, np.zeros((n, n)), offset)

    @classmethod
    def from_terms(
        cls, n: int, terms: Mapping[tuple[int, int], float], offset: float = 0.0
    ) -> QuboMatrix:
        """Build from ``{(i, j): coeff}``; ``(j, i)`` keys fold onto ``(i, j)`` and duplicates add."""
        u = np.zeros((n, n))
        for (i, j), v in terms.items():
            if not (0 <= i < n and 0 <= j < n):
                raise DimensionError(f"index ({i}, {j}) out of range for n={n}")
            a, b = (i, j) if i <= j else (j, i)
            u[a, b] += v
        return cls(n, u, offset)

    @classmethod
    def from_dense(cls, q: np.ndarray, offset: float = 0.0) -> QuboMatrix:
        """Fold an arbitrary square matrix (x^T Q x convention) into upper form."""
        q = np.asarray(q, dtype=np.float64)
        if q.ndim != 2 or q.shape[0] != q.shape[1]:
            raise DimensionError("Q must be square")
        u = np.triu(q) + np.triu(q.T, 1)
        return cls(q.shape[0], u, offset)

    @property
    def terms(self) -> dict[tuple[int, int], float]:
        """Nonzero coefficients keyed by ``(i, j)`` with ``i <= j``."""
        ii, jj = np.nonzero(self.upper)
        return {(int(i), int(j)): float(self.upper[i, j]) for i, j in zip(ii, jj)}

    @property
    def linear(self) -> np.ndarray:
        return np.diag(self.upper).copy()

    @property
    def coupling(self) -> np.ndarray:
        """Symmetric off-diagonal coupling matrix ``W`` with zero diagonal.

        Flipping bit ``i`` changes the energy by ``(1 - 2 x_i) * (Q_ii + W[i] @ x)``.
        """
        off = np.triu(self.upper, 1)
        return off + off.T

    def max_abs(self) -> float:
        return float(np.max(np.abs(self.upper))) if self.n else 0.0

    def energy(self, x: Sequence[int] | np.ndarray) -> float:
        return energy(self, x)

    def energies(self, states: np.ndarray) -> np.ndarray:
        """Energies of each row of a ``(k, n)`` 0/1 array."""
        s = np.asarray(states, dtype=np.float64)
        if s.ndim != 2 or s.shape[1] != self.n:
            raise DimensionError(f"states shape {s.shape} incompatible with n={self.n}")
        return np.einsum("ri,ij,rj->r", s, self.upper, s) + self.offset

    def __repr__(self) -> str:
        return f"QuboMatrix(n={self.n}, terms={len(self.terms)}, offset={self.offset!r})"


def energy(q: QuboMatrix, x: Sequence[int] | np.ndarray) -> float:
    """Return ``sum_{i<=j} Q[i, j] x_i x_j + offset``."""
    xv = as_bits(x, q.n).astype(np.float64)
    return float(xv @ q.upper @ xv + q.offset)


def add_scaled(q: QuboMatrix, r: QuboMatrix, alpha: float) -> QuboMatrix:
    """Return ``q + alpha * r`` (offsets included)."""
    if q.n != r.n:
        raise DimensionError(f"cannot combine QUBOs of size {q.n} and {r.n}")
    return QuboMatrix(q.n, q.upper + alpha * r.upper, q.offset + alpha * r.offset)


def _coeff_vector(a: Sequence[float] | np.ndarray) -> np.ndarray:
    av = np.asarray(a, dtype=np.float64)
    if av.ndim != 1:
        raise DimensionError("coefficient vector must be 1-D")
    return av


def square_of_affine(a: Sequence[float] | np.ndarray, b: float) -> QuboMatrix:
    """Expand ``(a . x + b)**2`` over binary ``x``.

    Squared linear terms fold onto the diagonal: ``a_i**2 x_i + 2 b a_i x_i``.
    """
    av = _coeff_vector(a)
    u = np.triu(2.0 * np.outer(av, av), 1)
    u[np.diag_indices_from(u)] = av * av + 2.0 * b * av
    return QuboMatrix(av.shape[0], u, float(b) * float(b))


def affine_as_qubo(a: Sequence[float] | np.ndarray, b: float) -> QuboMatrix:
    """Represent ``a . x + b`` as a diagonal QUBO."""
    av = _coeff_vector(a)
    return QuboMatrix(av.shape[0], np.diag(av), float(b))
