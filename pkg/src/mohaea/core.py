"""Dominance relations, population containers and evaluation budgeting.

All problems are minimisation problems. Populations are stored
struct-of-arrays style (one row per individual) so the engine can work on a
whole generation at once; :class:`Individual` is the row view used by the
per-individual API.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

import numpy as np

from . import kernels

if TYPE_CHECKING:
    from .problems import ProblemSpec


class BudgetExhausted(Exception):
    """Raised when an evaluation is requested after the budget is spent.

    This is the run's termination signal, not a fault.
    """


@dataclass
class EvalBudget:
    """Counts objective-function evaluations against a fixed maximum."""

    max: int
    used: int = 0

    def __post_init__(self):
        if self.max <= 0:
            raise ValueError(f"evaluation budget must be positive, got {self.max}")
        if not 0 <= self.used <= self.max:
            raise ValueError(f"used={self.used} outside [0, {self.max}]")

    @property
    def remaining(self) -> int:
        return self.max - self.used

    @property
    def exhausted(self) -> bool:
        return self.used >= self.max

    def charge(self, count: int = 1) -> None:
        if count < 0:
            raise ValueError("cannot charge a negative number of evaluations")
        if self.used + count > self.max:
            raise BudgetExhausted(f"{count} evaluation(s) requested, {self.remaining} left")
        self.used += count


def _check_objectives(F: np.ndarray) -> None:
    if np.isnan(F).any():
        raise ValueError("NaN objective value")


def dominates(a, b) -> bool:
    """Pareto dominance for minimisation: ``a`` no worse everywhere, better somewhere."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"objective vectors differ in length: {a.shape} vs {b.shape}")
    if np.isnan(a).any() or np.isnan(b).any():
        raise ValueError("NaN objective value")
    return bool(np.all(a <= b) and np.any(a < b))


@dataclass
class Individual:
    """One chromosome: decision vector, operator rates and reference direction."""

    x: np.ndarray
    rates: np.ndarray
    direction: np.ndarray
    objectives: np.ndarray | None = None
    fitness: float = np.inf
    dominance_count: int = 0

    @property
    def evaluated(self) -> bool:
        return self.objectives is not None

    def copy(self) -> "Individual":
        return replace(
            self,
            x=self.x.copy(),
            rates=self.rates.copy(),
            direction=self.direction.copy(),
            objectives=None if self.objectives is None else self.objectives.copy(),
        )


@dataclass
class Population:
    """A generation of ``N`` individuals held as parallel arrays.

    Attributes:
        X: decision vectors, shape (N, n).
        F: objective vectors, shape (N, m).
        rates: operator rates, shape (N, k); each row sums to 1.
        directions: reference directions, shape (N, m).
        fitness: last pair fitness of each slot, shape (N,).
        dominance_count: number of members dominating each row, shape (N,).
        operators: operator names labelling the columns of ``rates``.
    """

    X: np.ndarray
    F: np.ndarray
    rates: np.ndarray
    directions: np.ndarray
    operators: tuple[str, ...]
    fitness: np.ndarray = field(default=None)
    dominance_count: np.ndarray = field(default=None)

    def __post_init__(self):
        N = len(self.X)
        if self.fitness is None:
            self.fitness = np.full(N, np.inf)
        if self.dominance_count is None:
            self.dominance_count = np.zeros(N, dtype=np.int64)
        for name in ("F", "rates", "directions", "fitness", "dominance_count"):
            if len(getattr(self, name)) != N:
                raise ValueError(f"{name} has {len(getattr(self, name))} rows, expected {N}")
        if self.rates.shape[1] != len(self.operators):
            raise ValueError("rates columns do not match the operator list")

    def __len__(self) -> int:
        return len(self.X)

    def __getitem__(self, i: int) -> Individual:
        return Individual(
            x=self.X[i].copy(),
            rates=self.rates[i].copy(),
            direction=self.directions[i].copy(),
            objectives=self.F[i].copy(),
            fitness=float(self.fitness[i]),
            dominance_count=int(self.dominance_count[i]),
        )

    @classmethod
    def from_individuals(cls, individuals, operators) -> "Population":
        individuals = list(individuals)
        if not individuals:
            raise ValueError("cannot build a population from no individuals")
        if any(not ind.evaluated for ind in individuals):
            raise ValueError("all individuals must be evaluated")
        return cls(
            X=np.array([ind.x for ind in individuals], dtype=np.float64),
            F=np.array([ind.objectives for ind in individuals], dtype=np.float64),
            rates=np.array([ind.rates for ind in individuals], dtype=np.float64),
            directions=np.array([ind.direction for ind in individuals], dtype=np.float64),
            operators=tuple(operators),
            fitness=np.array([ind.fitness for ind in individuals], dtype=np.float64),
            dominance_count=np.array([ind.dominance_count for ind in individuals], dtype=np.int64),
        )

    def copy(self) -> "Population":
        return Population(
            X=self.X.copy(),
            F=self.F.copy(),
            rates=self.rates.copy(),
            directions=self.directions.copy(),
            operators=self.operators,
            fitness=self.fitness.copy(),
            dominance_count=self.dominance_count.copy(),
        )


def evaluate_batch(X: np.ndarray, problem: "ProblemSpec", budget: EvalBudget) -> np.ndarray:
    """Evaluate every row of ``X``, charging one evaluation per row."""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    budget.charge(len(X))
    F = problem.evaluate(X)
    _check_objectives(F)
    return F


def evaluate(ind: Individual, problem: "ProblemSpec", budget: EvalBudget) -> Individual:
    """Return a copy of ``ind`` with objectives filled in; costs one evaluation."""
    x = np.asarray(ind.x, dtype=np.float64)
    if x.shape != (problem.n,):
        raise ValueError(f"decision vector has shape {x.shape}, expected ({problem.n},)")
    if np.any(x < problem.lower) or np.any(x > problem.upper):
        raise ValueError("decision vector outside the problem bounds")
    if budget.exhausted:
        raise BudgetExhausted("evaluation budget spent")
    out = ind.copy()
    out.objectives = evaluate_batch(x[None, :], problem, budget)[0]
    return out


def update_dominance_counts(pop: Population) -> Population:
    """Recount, for every member, how many other members dominate it."""
    _check_objectives(pop.F)
    pop.dominance_count = kernels.dominance_counts(pop.F)
    return pop


def nondominated_mask(F: np.ndarray) -> np.ndarray:
    F = np.atleast_2d(np.asarray(F, dtype=np.float64))
    if F.size == 0:
        return np.zeros(0, dtype=bool)
    _check_objectives(F)
    return kernels.nondominated_mask(F)


def extract_nondominated(pop: Population) -> list[Individual]:
    """Members with a zero dominance count after a fresh count."""
    if len(pop) == 0:
        return []
    counts = kernels.dominance_counts(pop.F)
    return [pop[i] for i in np.flatnonzero(counts == 0)]
