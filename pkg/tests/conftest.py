"""Shared oracles and the acceptance report hook.

The oracle helpers here deliberately avoid the package's numpy paths: plain
Python loops over dicts and ``itertools.product`` so they can check the
vectorized code independently.
"""

from __future__ import annotations

import itertools

import numpy as np
import pytest

from qubo_admm.qubo import QuboMatrix

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def naive_energy(terms: dict, offset: float, x) -> float:
    total = offset
    for (i, j), v in terms.items():
        total += v * x[i] * x[j]
    return total


def assignments(n: int):
    return itertools.product((0, 1), repeat=n)


def random_qubo(rng: np.random.Generator, n: int, scale: float = 1.0, density: float = 1.0) -> QuboMatrix:
    terms = {}
    for i in range(n):
        for j in range(i, n):
            if rng.random() < density:
                terms[(i, j)] = float(rng.uniform(-scale, scale))
    return QuboMatrix.from_terms(n, terms, float(rng.uniform(-scale, scale)))


def naive_qkp_opt(profits, weights, capacity) -> int:
    """Best profit over feasible subsets, looping items in reverse index order."""
    n = len(weights)
    best = 0
    for bits in itertools.product((1, 0), repeat=n):
        x = bits[::-1]
        if sum(w * b for w, b in zip(weights, x)) > capacity:
            continue
        val = 0
        for i in range(n):
            if x[i]:
                for j in range(i, n):
                    if x[j]:
                        val += int(profits[i][j])
        best = max(best, val)
    return best


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
