import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mohaea.core import (
    BudgetExhausted, EvalBudget, Individual, Population, dominates, evaluate, evaluate_batch,
    extract_nondominated, nondominated_mask, update_dominance_counts,
)
from mohaea.problems import make_problem

from conftest import brute_dominates, pop_from_objectives

vec = st.lists(st.floats(-10, 10, allow_nan=False), min_size=3, max_size=3)


class TestDominates:
    def test_examples(self):
        assert dominates((1, 2), (1, 3))
        assert not dominates((1, 2), (1, 2))
        assert not dominates((1, 3), (3, 1))
        assert not dominates((3, 1), (1, 3))

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="length"):
            dominates((1, 2), (1, 2, 3))

    def test_nan_rejected(self):
        with pytest.raises(ValueError, match="NaN"):
            dominates((np.nan, 0), (1, 1))

    @given(vec)
    def test_irreflexive(self, a):
        assert not dominates(a, a)

    @given(vec, vec)
    def test_antisymmetric(self, a, b):
        assert not (dominates(a, b) and dominates(b, a))

    @given(vec, vec, vec)
    @settings(max_examples=300)
    def test_transitive(self, a, b, c):
        if dominates(a, b) and dominates(b, c):
            assert dominates(a, c)


class TestDominanceCounts:
    def test_chain(self):
        pop = update_dominance_counts(pop_from_objectives([(0, 0), (1, 1), (2, 2)]))
        assert pop.dominance_count.tolist() == [0, 1, 2]

    def test_mutually_nondominated(self):
        pop = update_dominance_counts(pop_from_objectives([(0, 1), (1, 0)]))
        assert pop.dominance_count.tolist() == [0, 0]

    def test_brute_force_random(self, rng):
        for trial in range(20):
            F = rng.random((20, 2))
            if trial % 2:
                F = np.round(F, 1)  # force ties
            expected = [sum(brute_dominates(F[j], F[i]) for j in range(20) if j != i) for i in range(20)]
            assert update_dominance_counts(pop_from_objectives(F)).dominance_count.tolist() == expected

    def test_nan_rejected(self):
        with pytest.raises(ValueError):
            update_dominance_counts(pop_from_objectives([(0, np.nan), (1, 1)]))


class TestExtractNondominated:
    def test_simple(self):
        out = extract_nondominated(pop_from_objectives([(0, 0), (1, 1)]))
        assert len(out) == 1 and out[0].objectives.tolist() == [0, 0]

    def test_line_all_returned(self):
        f1 = np.linspace(0, 1, 11)
        assert len(extract_nondominated(pop_from_objectives(np.c_[f1, 1 - f1]))) == 11

    def test_brute_force_3obj(self, rng):
        F = rng.random((50, 3))
        expected = [i for i in range(50) if not any(brute_dominates(F[j], F[i]) for j in range(50))]
        got = extract_nondominated(pop_from_objectives(F))
        assert sorted(tuple(ind.objectives) for ind in got) == sorted(tuple(F[i]) for i in expected)
        assert np.flatnonzero(nondominated_mask(F)).tolist() == expected

    def test_empty(self):
        empty = Population(np.zeros((0, 2)), np.zeros((0, 2)), np.zeros((0, 1)), np.zeros((0, 2)), ("SM",))
        assert extract_nondominated(empty) == []
        assert nondominated_mask(np.zeros((0, 2))).size == 0


class TestBudget:
    def test_charge_and_exhaust(self):
        b = EvalBudget(3)
        b.charge(2)
        assert b.remaining == 1 and not b.exhausted
        with pytest.raises(BudgetExhausted):
            b.charge(2)
        assert b.used == 2
        b.charge()
        assert b.exhausted

    def test_invalid(self):
        with pytest.raises(ValueError):
            EvalBudget(0)
        with pytest.raises(ValueError):
            EvalBudget(3).charge(-1)


class TestEvaluate:
    def _ind(self, x):
        return Individual(x=np.asarray(x, dtype=float), rates=np.array([1.0]), direction=np.array([0.5, 0.5]))

    def test_zdt1_examples(self):
        p = make_problem("ZDT1")
        b = EvalBudget(10)
        x = np.zeros(30)
        x[0] = 0.5
        out = evaluate(self._ind(x), p, b)
        np.testing.assert_allclose(out.objectives, [0.5, 1 - np.sqrt(0.5)], atol=1e-15)
        np.testing.assert_allclose(out.objectives[1], 0.2928932188134524)
        assert b.used == 1
        out0 = evaluate(self._ind(np.zeros(30)), p, b)
        assert out0.objectives.tolist() == [0.0, 1.0]
        assert b.used == 2

    def test_dtlz2_example(self):
        p = make_problem("DTLZ2")
        x = np.zeros(12)
        x[2:] = 0.5
        out = evaluate(Individual(x=x, rates=np.array([1.0]), direction=np.full(3, 1 / 3)), p, EvalBudget(1))
        np.testing.assert_allclose(out.objectives, [1, 0, 0], atol=1e-15)

    def test_budget_exhausted_signal(self):
        p = make_problem("ZDT1")
        b = EvalBudget(1)
        evaluate(self._ind(np.zeros(30)), p, b)
        with pytest.raises(BudgetExhausted):
            evaluate(self._ind(np.zeros(30)), p, b)

    def test_bounds_and_shape(self):
        p = make_problem("ZDT1")
        with pytest.raises(ValueError, match="bounds"):
            evaluate(self._ind(np.full(30, 2.0)), p, EvalBudget(5))
        with pytest.raises(ValueError, match="shape"):
            evaluate(self._ind(np.zeros(5)), p, EvalBudget(5))

    def test_batch_charges_per_row(self, rng):
        p = make_problem("ZDT2")
        b = EvalBudget(100)
        F = evaluate_batch(rng.random((7, 30)), p, b)
        assert F.shape == (7, 2) and b.used == 7

    def test_evaluate_does_not_mutate_input(self):
        ind = self._ind(np.zeros(30))
        evaluate(ind, make_problem("ZDT1"), EvalBudget(1))
        assert not ind.evaluated


class TestPopulation:
    def test_row_view_roundtrip(self):
        pop = pop_from_objectives([(0, 1), (1, 0)])
        again = Population.from_individuals([pop[0], pop[1]], pop.operators)
        np.testing.assert_array_equal(again.F, pop.F)
        assert again.operators == pop.operators

    def test_shape_checks(self):
        with pytest.raises(ValueError):
            Population(np.zeros((2, 2)), np.zeros((3, 2)), np.full((2, 1), 1.0), np.zeros((2, 2)), ("SM",))
        with pytest.raises(ValueError):
            Population(np.zeros((2, 2)), np.zeros((2, 2)), np.full((2, 2), 0.5), np.zeros((2, 2)), ("SM",))
