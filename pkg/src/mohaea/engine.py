"""MoHAEA evolutionary loop and the single-objective HAEA baseline.

One generation works on a frozen snapshot: dominance counts and the ideal
point are computed at the start, every slot then produces exactly one
child, and the children form the next population. Because slots do not
interact inside a generation, the whole generation is processed as arrays;
random numbers are drawn per generation in a fixed order so a seed fully
determines the run.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .core import EvalBudget, Individual, Population, evaluate_batch, nondominated_mask
from .operators import (
    OperatorConfig,
    apply_operator_batch,
    init_rates_batch,
    operator_set,
    reward_punish_batch,
    roulette_batch,
)
from .problems import ProblemId, ProblemSpec, make_problem
from .refpoints import assign_initial_directions, reference_directions

IDEAL_EPS = 1e-6
FITNESS_MODES = {"cosine": 0, "pbi": 1}


# --------------------------------------------------------------------------
# Ideal point and pair fitness
# --------------------------------------------------------------------------


@dataclass
class IdealPoint:
    """Running componentwise minimum of all objectives seen, shifted by ``-1e-6``."""

    z: np.ndarray

    @classmethod
    def from_objectives(cls, F) -> "IdealPoint":
        return cls(np.min(np.atleast_2d(F), axis=0) - IDEAL_EPS)


def update_ideal(ideal: IdealPoint, f) -> IdealPoint:
    F = np.atleast_2d(np.asarray(f, dtype=np.float64))
    return IdealPoint(np.minimum(ideal.z, np.min(F, axis=0) - IDEAL_EPS))


def update_fitness(x: Individual, ind: Individual, ideal: IdealPoint, mode: str = "cosine", theta: float = 5.0):
    """Fitness of an offspring/parent pair measured on the parent's direction.

    In cosine mode the base value is ``1 - cos`` of the angle between
    ``f - z`` and the direction, and whichever member of the pair is
    dominated by the other gets +1. Lower is better.

    Returns:
        ``(x_fitness, ind_fitness)``
    """
    if not (x.evaluated and ind.evaluated):
        raise ValueError("both individuals must be evaluated")
    fx, fi = kernels.pair_fitness(
        x.objectives[None, :], ind.objectives[None, :], ind.direction[None, :],
        ideal.z, FITNESS_MODES[mode], theta,
    )
    return float(fx[0]), float(fi[0])


def best_star(offspring, ind: Individual, rates, op, delta: float, ideal: IdealPoint,
              lower=None, upper=None, knn_space: str = "decision", mode: str = "cosine"):
    """Pick the child for ``ind`` and update its operator rates.

    The offspring nearest to the parent competes with it; the parent
    survives only if strictly fitter, and the operator is rewarded only on a
    strict improvement. The child always carries the parent's direction.

    ``rates`` is a mapping from operator to rate; ``op`` the applied operator.
    Returns ``(child, new_rates)``.
    """
    offspring = list(offspring)
    if not offspring:
        raise ValueError("offspring set is empty")
    if knn_space == "decision":
        lo = np.zeros_like(ind.x) if lower is None else np.asarray(lower, dtype=np.float64)
        hi = np.ones_like(ind.x) if upper is None else np.asarray(upper, dtype=np.float64)
        d = [np.sum(((o.x - ind.x) / (hi - lo)) ** 2) for o in offspring]
    else:
        d = [np.sum((o.objectives - ind.objectives) ** 2) for o in offspring]
    x = offspring[int(np.argmin(d))].copy()
    x.direction = ind.direction.copy()
    fx, fi = update_fitness(x, ind, ideal, mode=mode)
    keys = list(rates)
    R = np.array([[rates[k] for k in keys]], dtype=np.float64)
    R = reward_punish_batch(R, np.array([keys.index(op)]), np.array([fx < fi]), np.array([delta]))
    if fx > fi:
        child = ind.copy()
        child.fitness = fi
    else:
        child = x
        child.fitness = fx
    child.rates = R[0]
    return child, dict(zip(keys, R[0]))


# --------------------------------------------------------------------------
# Parent selection
# --------------------------------------------------------------------------


def _distinct_candidates(N: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """``size`` distinct indices per row drawn from the other N-1 slots."""
    C = rng.integers(0, N - 1, size=(N, size))
    while True:
        S = np.sort(C, axis=1)
        dup = np.any(S[:, 1:] == S[:, :-1], axis=1)
        if not dup.any():
            break
        C[dup] = rng.integers(0, N - 1, size=(int(dup.sum()), size))
    # shift past the row's own index so a slot never draws itself
    return C + (C >= np.arange(N)[:, None])


def tournament_batch(counts: np.ndarray, size: int, rng: np.random.Generator) -> np.ndarray:
    """For every slot, the tournament winner among ``size`` other slots.

    Candidates come in random order, so taking the first minimum breaks
    ties uniformly at random.
    """
    N = len(counts)
    if N < 2:
        return np.full(N, -1, dtype=np.int64)
    size = min(size, N - 1)
    C = _distinct_candidates(N, size, rng)
    return C[np.arange(N), np.argmin(counts[C], axis=1)]


def tournament_select(pop: Population, exclude: int, size: int, rng: np.random.Generator) -> int:
    """Index of the lowest-dominance-count member among ``size`` random others."""
    N = len(pop)
    if N < 2:
        raise ValueError("tournament needs at least two members")
    if size > N - 1:
        warnings.warn(f"tournament size {size} reduced to {N - 1} for a population of {N}", stacklevel=2)
        size = N - 1
    others = np.delete(np.arange(N), exclude)
    cand = rng.choice(others, size=size, replace=False)
    return int(cand[np.argmin(pop.dominance_count[cand])])


# --------------------------------------------------------------------------
# MoHAEA
# --------------------------------------------------------------------------


@dataclass
class MoHaeaConfig:
    problem: str | ProblemId = "ZDT1"
    N: int = 100
    max_evals: int = 50_000
    operator_set: str | tuple = "SM"
    operator_config: OperatorConfig = field(default_factory=OperatorConfig)
    tournament_size: int = 4
    seed: int = 0
    trace_every: int = 1
    knn_space: str = "decision"
    fitness_mode: str = "cosine"
    pbi_theta: float = 5.0
    n: int | None = None  # decision-variable override

    def __post_init__(self):
        self.problem = ProblemId.parse(self.problem)
        if self.N < 1:
            raise ValueError("population size must be positive")
        if self.tournament_size < 1:
            raise ValueError("tournament size must be positive")
        if self.trace_every < 1:
            raise ValueError("trace_every must be >= 1")
        if self.knn_space not in ("decision", "objective"):
            raise ValueError(f"knn_space must be 'decision' or 'objective', got {self.knn_space!r}")
        if self.fitness_mode not in FITNESS_MODES:
            raise ValueError(f"fitness_mode must be one of {sorted(FITNESS_MODES)}")


@dataclass
class RunRecord:
    """Trace of one run plus its final population.

    ``generations``, ``evals`` and ``mean_rates`` are aligned arrays, one
    entry per traced generation (generation 0 is the initial population).
    ``fronts`` holds the nondominated objective vectors at the same points.
    """

    config: MoHaeaConfig
    operators: tuple[str, ...]
    final_pop: Population
    ideal: IdealPoint
    generations: np.ndarray
    evals: np.ndarray
    mean_rates: np.ndarray
    fronts: list

    @property
    def evaluations(self) -> int:
        return int(self.evals[-1])


class MoHaea:
    """Stepwise driver; :func:`mohaea_run` runs it to completion."""

    def __init__(self, cfg: MoHaeaConfig, problem: ProblemSpec | None = None):
        self.cfg = cfg
        self.problem = problem if problem is not None else make_problem(cfg.problem, cfg.n)
        self.ops = operator_set(cfg.operator_set)
        if len(self.ops) and cfg.N < 2 and any(op.arity == 2 for op in self.ops):
            raise ValueError("binary operators need a population of at least two")
        if cfg.tournament_size > cfg.N - 1 and cfg.N > 1:
            warnings.warn(f"tournament size {cfg.tournament_size} reduced to {cfg.N - 1}", stacklevel=2)
        self.lattice = reference_directions(self.problem.m, cfg.N)
        self.rng = np.random.default_rng(cfg.seed)
        self.budget = EvalBudget(cfg.max_evals)
        self.mode = FITNESS_MODES[cfg.fitness_mode]
        self.generation = 0
        self.finished = False
        self.pop: Population | None = None
        self.ideal: IdealPoint | None = None
        self._trace_gen: list[int] = []
        self._trace_evals: list[int] = []
        self._trace_rates: list[np.ndarray] = []
        self._trace_fronts: list[np.ndarray] = []

    @property
    def operator_names(self) -> tuple[str, ...]:
        return tuple(op.value for op in self.ops)

    def initialize(self) -> Population:
        cfg, p = self.cfg, self.problem
        if cfg.max_evals < cfg.N:
            raise ValueError(f"budget of {cfg.max_evals} evaluations cannot initialise {cfg.N} individuals")
        rng = self.rng
        X = p.lower + rng.random((cfg.N, p.n)) * (p.upper - p.lower)
        R = init_rates_batch(cfg.N, len(self.ops), rng)
        W = assign_initial_directions(cfg.N, self.lattice, rng)
        F = evaluate_batch(X, p, self.budget)
        self.pop = Population(X=X, F=F, rates=R, directions=W, operators=self.operator_names)
        self.pop.dominance_count = kernels.dominance_counts(F)
        self.ideal = IdealPoint.from_objectives(F)
        self._record()
        if self.budget.exhausted:
            self.finished = True
        return self.pop

    def _record(self):
        self._trace_gen.append(self.generation)
        self._trace_evals.append(self.budget.used)
        self._trace_rates.append(self.pop.rates.mean(axis=0))
        self._trace_fronts.append(self.pop.F[nondominated_mask(self.pop.F)].copy())

    def step(self) -> Population:
        """Advance one generation; sets ``finished`` once the budget is spent."""
        if self.pop is None:
            self.initialize()
            return self.pop
        if self.finished:
            return self.pop
        cfg, p, rng = self.cfg, self.problem, self.rng
        pop = self.pop
        N = len(pop)

        counts = kernels.dominance_counts(pop.F)
        pop.dominance_count = counts
        delta = rng.random(N)
        op_idx = roulette_batch(pop.rates, rng.random(N))
        partner = tournament_batch(counts, cfg.tournament_size, rng)

        arity = np.array([op.arity for op in self.ops])[op_idx]
        two_kids = arity == 2

        O1, O2 = _vary(self.ops, op_idx, pop.X, partner, p.lower, p.upper, cfg.operator_config, rng)

        # evaluations are granted to slots in order until the budget runs out
        if cfg.knn_space == "decision":
            # the nearest offspring is known before evaluation; only it is evaluated
            scale = p.upper - p.lower
            d1 = np.sum(((O1 - pop.X) / scale) ** 2, axis=1)
            d2 = np.sum(((O2 - pop.X) / scale) ** 2, axis=1)
            Xc = np.where((two_kids & (d2 < d1))[:, None], O2, O1)
            Fc, fresh = _cached_objectives(Xc, pop, partner, two_kids)
            active = np.cumsum(fresh) <= self.budget.remaining
            act = np.flatnonzero(active)
            ev = act[fresh[act]]
            if ev.size:
                Fc[ev] = evaluate_batch(Xc[ev], p, self.budget)
            seen = Fc[ev]
        else:
            F1, fresh1 = _cached_objectives(O1, pop, partner, two_kids)
            F2, fresh2 = _cached_objectives(O2, pop, partner, two_kids)
            fresh2 &= two_kids
            need = fresh1.astype(np.int64) + fresh2
            active = np.cumsum(need) <= self.budget.remaining
            act = np.flatnonzero(active)
            e1 = act[fresh1[act]]
            e2 = act[fresh2[act]]
            if e1.size:
                F1[e1] = evaluate_batch(O1[e1], p, self.budget)
            if e2.size:
                F2[e2] = evaluate_batch(O2[e2], p, self.budget)
            d1 = np.sum((F1 - pop.F) ** 2, axis=1)
            d2 = np.sum((F2 - pop.F) ** 2, axis=1)
            pick2 = two_kids & (d2 < d1)
            Xc = np.where(pick2[:, None], O2, O1)
            Fc = np.where(pick2[:, None], F2, F1)
            seen = np.vstack([F1[e1], F2[e2]])

        new = pop.copy()
        if act.size:
            fx, fi = kernels.pair_fitness(Fc[act], pop.F[act], pop.directions[act], self.ideal.z,
                                          self.mode, cfg.pbi_theta)
            improved = fx < fi
            keep_parent = fx > fi
            new.rates[act] = reward_punish_batch(pop.rates[act], op_idx[act], improved, delta[act])
            take = act[~keep_parent]
            new.X[take] = Xc[take]
            new.F[take] = Fc[take]
            new.fitness[act] = np.where(keep_parent, fi, fx)

            if len(seen):
                self.ideal = update_ideal(self.ideal, seen)

        self.generation += 1
        self.pop = new
        if not active.all() or self.budget.exhausted:
            self.finished = True
        if self.generation % cfg.trace_every == 0 or self.finished:
            self._record()
        return new

    def run(self) -> RunRecord:
        if self.pop is None:
            self.initialize()
        while not self.finished:
            self.step()
        self.pop.dominance_count = kernels.dominance_counts(self.pop.F)
        return self.record()

    def record(self) -> RunRecord:
        return RunRecord(
            config=self.cfg,
            operators=self.operator_names,
            final_pop=self.pop,
            ideal=self.ideal,
            generations=np.array(self._trace_gen, dtype=np.int64),
            evals=np.array(self._trace_evals, dtype=np.int64),
            mean_rates=np.array(self._trace_rates),
            fronts=list(self._trace_fronts),
        )


def _vary(ops, op_idx, X, partner, lower, upper, opcfg, rng):
    """Offspring of every slot; unary operators leave the second array as a parent copy."""
    O1 = X.copy()
    O2 = X.copy()
    for j, op in enumerate(ops):
        rows = np.flatnonzero(op_idx == j)
        if rows.size == 0:
            continue
        P2 = X[partner[rows]] if op.arity == 2 else None
        kids = apply_operator_batch(op, X[rows], P2, lower, upper, opcfg, rng)
        O1[rows] = kids[0]
        if op.arity == 2:
            O2[rows] = kids[1]
    return O1, O2


def _cached_objectives(O, pop: Population, partner, binary):
    """Objectives for rows of ``O`` that copy their parent or partner, plus a
    mask of the rows that still need an evaluation."""
    F = pop.F.copy()
    same_parent = np.all(O == pop.X, axis=1)
    fresh = ~same_parent
    rows = np.flatnonzero(binary & fresh)
    if rows.size:
        hit = np.all(O[rows] == pop.X[partner[rows]], axis=1)
        F[rows[hit]] = pop.F[partner[rows[hit]]]
        fresh[rows[hit]] = False
    return F, fresh


def mohaea_run(cfg: MoHaeaConfig, problem: ProblemSpec | None = None) -> RunRecord:
    """Run MoHAEA until the evaluation budget is spent."""
    return MoHaea(cfg, problem).run()


# --------------------------------------------------------------------------
# HAEA (single objective)
# --------------------------------------------------------------------------


@dataclass
class HaeaConfig:
    N: int = 50
    max_evals: int = 10_000
    operator_set: str | tuple = "SM"
    operator_config: OperatorConfig = field(default_factory=OperatorConfig)
    tournament_size: int = 4
    seed: int = 0


@dataclass
class HaeaRecord:
    X: np.ndarray
    fitness: np.ndarray
    rates: np.ndarray
    operators: tuple[str, ...]
    best_history: np.ndarray  # best fitness after each generation
    slot_history: np.ndarray  # per-slot fitness, shape (generations + 1, N)
    evaluations: int

    @property
    def best(self) -> float:
        return float(self.fitness.min())


def haea_run(objective, lower, upper, cfg: HaeaConfig) -> HaeaRecord:
    """Single-objective HAEA.

    ``objective`` maps an (N, n) batch to N fitness values (minimised). Each
    slot picks one operator by roulette, the best of its offspring and
    itself replaces it, and the operator is rewarded on strict improvement.
    """
    lower = np.asarray(lower, dtype=np.float64)
    upper = np.asarray(upper, dtype=np.float64)
    n = len(lower)
    ops = operator_set(cfg.operator_set)
    if cfg.N < 2 and any(op.arity == 2 for op in ops):
        raise ValueError("binary operators need a population of at least two")
    if cfg.max_evals < cfg.N:
        raise ValueError("budget too small to initialise the population")
    rng = np.random.default_rng(cfg.seed)
    budget = EvalBudget(cfg.max_evals)

    def evaluate(X):
        budget.charge(len(X))
        return np.asarray(objective(X), dtype=np.float64)

    X = lower + rng.random((cfg.N, n)) * (upper - lower)
    R = init_rates_batch(cfg.N, len(ops), rng)
    fit = evaluate(X)
    best_hist = [fit.min()]
    slot_hist = [fit.copy()]
    arities = np.array([op.arity for op in ops])
    N = cfg.N

    while not budget.exhausted:
        delta = rng.random(N)
        op_idx = roulette_batch(R, rng.random(N))
        # fitness plays the role of the dominance count in the tournament
        partner = tournament_batch(fit, cfg.tournament_size, rng)
        binary = arities[op_idx] == 2
        O1, O2 = _vary(ops, op_idx, X, partner, lower, upper, cfg.operator_config, rng)

        # both offspring compete, so both are evaluated unless they copy the parent
        fresh1 = ~np.all(O1 == X, axis=1)
        fresh2 = binary & ~np.all(O2 == X, axis=1)
        active = np.cumsum(fresh1.astype(np.int64) + fresh2) <= budget.remaining
        act = np.flatnonzero(active)
        e1 = act[fresh1[act]]
        e2 = act[fresh2[act]]
        f1 = np.where(fresh1, np.inf, fit)
        f2 = np.where(binary & ~fresh2, fit, np.inf)
        if e1.size:
            f1[e1] = evaluate(O1[e1])
        if e2.size:
            f2[e2] = evaluate(O2[e2])

        use2 = f2 < f1
        Xc = np.where(use2[:, None], O2, O1)
        fc = np.where(use2, f2, f1)
        improved = np.zeros(N, dtype=bool)
        improved[act] = fc[act] < fit[act]
        R[act] = reward_punish_batch(R[act], op_idx[act], improved[act], delta[act])
        X = np.where(improved[:, None], Xc, X)
        fit = np.where(improved, fc, fit)
        best_hist.append(fit.min())
        slot_hist.append(fit.copy())
        if not active.all():
            break

    return HaeaRecord(
        X=X, fitness=fit, rates=R, operators=tuple(op.value for op in ops),
        best_history=np.array(best_hist), slot_history=np.array(slot_hist),
        evaluations=budget.used,
    )
