import itertools
import math

import numpy as np
import pytest

from conftest import assignments, naive_energy, random_qubo
from qubo_admm import qkp
from qubo_admm.problem import (
    ConstrainedProblem,
    DimensionError,
    eq,
    evaluate_e_ineq,
    is_feasible,
    le,
    penalized_qubo_equality,
    residuals,
    slack_bit_count,
    slack_coefficients,
    slack_encode,
    slack_range,
)
from qubo_admm.qubo import QuboMatrix, energy, square_of_affine
from qubo_admm.samplers import brute_force_sample


def random_problem(rng, n, n_eq=0, n_ineq=1, coef=(-3, 4)):
    obj = random_qubo(rng, n, scale=5.0)
    eqs = [eq(rng.integers(*coef, size=n), int(rng.integers(-2, 4))) for _ in range(n_eq)]
    ineqs = [le(rng.integers(*coef, size=n), int(rng.integers(-2, 6))) for _ in range(n_ineq)]
    return ConstrainedProblem(obj, tuple(eqs), tuple(ineqs), gamma=100.0)


class TestResiduals:
    def test_inequality(self):
        p = ConstrainedProblem(QuboMatrix.zeros(2), inequalities=(le([1, 1], 1),))
        _, r = residuals(p, (1, 1))
        assert r.tolist() == [1]

    def test_equality(self):
        p = ConstrainedProblem(QuboMatrix.zeros(2), equalities=(eq([1, 1], 2),))
        r, _ = residuals(p, (1, 1))
        assert r.tolist() == [0]

    def test_random_against_dot_products(self, rng):
        p = random_problem(rng, 8, n_eq=1, n_ineq=2)
        for _ in range(20):
            x = rng.integers(0, 2, 8)
            r_eq, r_in = residuals(p, x)
            for c, r in zip(p.equalities, r_eq):
                assert r == sum(int(a) * int(b) for a, b in zip(c.coeffs, x)) - c.bound
            for c, r in zip(p.inequalities, r_in):
                assert r == sum(int(a) * int(b) for a, b in zip(c.coeffs, x)) - c.bound

    def test_dimension_mismatch(self):
        p = ConstrainedProblem(QuboMatrix.zeros(2), inequalities=(le([1, 1], 1),))
        with pytest.raises(DimensionError):
            residuals(p, (1, 1, 0))

    def test_constraint_length_checked(self):
        with pytest.raises(DimensionError):
            ConstrainedProblem(QuboMatrix.zeros(2), inequalities=(le([1, 1, 1], 1),))

    def test_gamma_positive(self):
        with pytest.raises(ValueError):
            ConstrainedProblem(QuboMatrix.zeros(2), gamma=0.0)


class TestFeasibility:
    def test_unconstrained(self):
        p = ConstrainedProblem(QuboMatrix.zeros(3))
        assert all(is_feasible(p, x) for x in assignments(3))

    def test_simple(self):
        p = ConstrainedProblem(QuboMatrix.zeros(2), inequalities=(le([1, 1], 1),))
        assert is_feasible(p, (1, 0))
        assert not is_feasible(p, (1, 1))

    def test_qkp_matches_enumeration(self):
        inst = qkp.generate(10, 0.5, 7)
        p = qkp.to_problem(inst)
        states = np.array(list(assignments(10)))
        mask = p.feasible_mask(states)
        for x, m in zip(states, mask):
            expect = sum(int(w) * int(b) for w, b in zip(inst.weights, x)) <= inst.capacity
            assert is_feasible(p, x) == expect == m

    def test_e_ineq_characterizes_feasibility(self, rng):
        p = random_problem(rng, 6, n_eq=1, n_ineq=2)
        for x in assignments(6):
            assert is_feasible(p, x) == (evaluate_e_ineq(p, x) == p.objective.energy(x))


class TestEIneq:
    def test_feasible_equals_objective(self, rng):
        p = random_problem(rng, 5)
        x = (0, 0, 0, 0, 0)
        if is_feasible(p, x):
            assert evaluate_e_ineq(p, x) == energy(p.objective, x)

    def test_single_violation(self):
        p = ConstrainedProblem(QuboMatrix.zeros(2), inequalities=(le([1, 1], 1),), gamma=100.0)
        assert evaluate_e_ineq(p, (1, 1)) == 100

    def test_exhaustive_formula(self, rng):
        p = random_problem(rng, 8, n_eq=1, n_ineq=2)
        terms, off = p.objective.terms, p.objective.offset
        for x in assignments(8):
            viol = 0
            for c in p.equalities:
                viol += sum(int(a) * b for a, b in zip(c.coeffs, x)) != c.bound
            for c in p.inequalities:
                viol += sum(int(a) * b for a, b in zip(c.coeffs, x)) > c.bound
            assert evaluate_e_ineq(p, x) == pytest.approx(naive_energy(terms, off, x) + 100.0 * viol)


class TestEqualityPenalty:
    def test_no_equalities(self, rng):
        p = random_problem(rng, 4)
        q = penalized_qubo_equality(p, 2.0)
        for x in assignments(4):
            assert energy(q, x) == pytest.approx(energy(p.objective, x))

    def test_matches_square_of_affine(self):
        p = ConstrainedProblem(QuboMatrix.zeros(2), equalities=(eq([1, 1], 1),))
        q = penalized_qubo_equality(p, 1.0)
        ref = square_of_affine([1, 1], -1)
        for x in assignments(2):
            assert energy(q, x) == energy(ref, x)

    def test_exhaustive_two_equalities(self, rng):
        p = random_problem(rng, 6, n_eq=2, n_ineq=0)
        q = penalized_qubo_equality(p, 2.5)
        for x in assignments(6):
            pen = sum((sum(int(a) * b for a, b in zip(c.coeffs, x)) - c.bound) ** 2 for c in p.equalities)
            assert energy(q, x) == pytest.approx(energy(p.objective, x) + 2.5 * pen, abs=1e-9)

    def test_mu_positive(self, rng):
        with pytest.raises(ValueError):
            penalized_qubo_equality(random_problem(rng, 3), 0.0)


class TestSlack:
    def test_three_ones(self):
        c = le([1, 1, 1], 3)
        assert slack_range(c) == 3
        assert slack_bit_count(3) == 2
        # weights {1, 2} cover 0..3 exactly
        w = slack_coefficients(3)
        sums = {sum(wi * b for wi, b in zip(w, bits)) for bits in itertools.product((0, 1), repeat=len(w))}
        assert sums == {0, 1, 2, 3}

    def test_tight_constraint(self):
        assert slack_range(le([1], 0)) == 0
        assert slack_bit_count(0) == 0
        enc = slack_encode(ConstrainedProblem(QuboMatrix.zeros(1), inequalities=(le([1], 0),)), 1.0)
        assert enc.bits_per_constraint == (0,) and enc.num_variables == 1

    def test_negative_coefficients_in_range(self):
        # min over x of (2, -3, -1).x is -4
        assert slack_range(le([2, -3, -1], 1)) == 5

    @pytest.mark.parametrize("r", range(0, 70))
    def test_coefficients_cover_exact_range(self, r):
        w = slack_coefficients(r)
        assert len(w) == (math.ceil(math.log2(r + 1)) if r > 0 else 0)
        sums = {sum(wi * b for wi, b in zip(w, bits)) for bits in itertools.product((0, 1), repeat=len(w))}
        assert sums == set(range(r + 1))

    def test_penalty_zero_iff_feasible_qkp8(self):
        inst = qkp.generate(8, 0.6, 11)
        p = qkp.to_problem(inst)
        enc = slack_encode(p, 1.0)
        pen_only = slack_encode(ConstrainedProblem(QuboMatrix.zeros(8), inequalities=p.inequalities), 1.0)
        k = enc.num_slack_bits
        assert enc.num_variables == 8 + k
        q = pen_only.problem.objective
        for x in assignments(8):
            best = min(energy(q, x + s) for s in itertools.product((0, 1), repeat=k))
            if is_feasible(p, x):
                assert best == 0
            else:
                assert best > 0

    def test_preserves_optimum(self, rng):
        for _ in range(5):
            p = random_problem(rng, 6, n_eq=0, n_ineq=2)
            mu = float(np.abs(p.objective.upper).sum()) * 2 + 1
            enc = slack_encode(p, mu)
            assert not enc.problem.inequalities
            feas = [x for x in assignments(6) if is_feasible(p, x)]
            if not feas:
                continue
            opt = min(energy(p.objective, x) for x in feas)
            ss = brute_force_sample(enc.problem.objective)
            x_best = ss.states[0][:6]
            assert is_feasible(p, x_best)
            assert energy(p.objective, x_best) == pytest.approx(opt)

    def test_equalities_padded(self, rng):
        p = random_problem(rng, 4, n_eq=1, n_ineq=1)
        enc = slack_encode(p, 1.0)
        assert enc.problem.equalities[0].n == enc.num_variables
