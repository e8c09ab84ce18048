"""Variation operators, roulette operator choice and the rate learning rule.

The batch functions (suffix ``_batch``) apply one operator to many rows at
once and are what the engine uses; the single-vector functions are thin
wrappers over them. All operators clamp their output to the box bounds.
"""

from __future__ import annotations

import enum
from collections.abc import Mapping, Sequence
from dataclasses import dataclass

import numpy as np


class OperatorId(str, enum.Enum):
    SBX = "SBX"  # simulated binary crossover
    PM = "PM"  # polynomial mutation
    SM = "SM"  # shrink (Gaussian) mutation
    UU = "UU"  # uniform crossover followed by uniform mutation

    @property
    def arity(self) -> int:
        return 2 if self in (OperatorId.SBX, OperatorId.UU) else 1


VARIANTS: dict[str, tuple[OperatorId, ...]] = {
    "SM": (OperatorId.SBX, OperatorId.UU, OperatorId.SM),
    "PM": (OperatorId.SBX, OperatorId.UU, OperatorId.PM),
}


def operator_set(variant_or_ops) -> tuple[OperatorId, ...]:
    """Resolve ``"SM"``/``"PM"`` or an explicit operator list."""
    if isinstance(variant_or_ops, str):
        key = variant_or_ops.strip().upper()
        if key in VARIANTS:
            return VARIANTS[key]
        raise ValueError(f"unknown variant '{variant_or_ops}' (expected sm or pm)")
    ops = tuple(OperatorId(o) for o in variant_or_ops)
    if not ops:
        raise ValueError("operator set is empty")
    if len(set(ops)) != len(ops):
        raise ValueError("operator set contains duplicates")
    return ops


@dataclass(frozen=True)
class OperatorConfig:
    sbx_eta: float = 20.0
    pm_eta: float = 20.0
    crossover_rate: float = 1.0
    mutation_rate: float | None = None  # None -> 1/n
    sm_sigma_divisor: float = 20.0
    uu_gene_rate: float | None = None  # None -> 1/n

    def __post_init__(self):
        for name in ("sbx_eta", "pm_eta", "sm_sigma_divisor"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        for name in ("crossover_rate", "mutation_rate", "uu_gene_rate"):
            v = getattr(self, name)
            if v is not None and not 0.0 <= v <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1]")

    def mutation_prob(self, n: int) -> float:
        return 1.0 / n if self.mutation_rate is None else self.mutation_rate

    def uu_prob(self, n: int) -> float:
        return 1.0 / n if self.uu_gene_rate is None else self.uu_gene_rate


# --------------------------------------------------------------------------
# Batch operators
# --------------------------------------------------------------------------


def sbx_batch(P1, P2, lower, upper, eta: float, crossover_rate: float, rng: np.random.Generator):
    """Simulated binary crossover on paired rows of ``P1``/``P2``.

    Each gene is crossed with probability 0.5 using the spread factor
    ``beta`` of Deb and Agrawal; the two resulting values are exchanged
    between the children with probability 0.5. Children are clamped to the
    bounds.
    """
    P1 = np.asarray(P1, dtype=np.float64)
    P2 = np.asarray(P2, dtype=np.float64)
    rows, n = P1.shape
    fire = rng.random(rows) < crossover_rate
    apply = rng.random((rows, n)) <= 0.5
    u = rng.random((rows, n))
    swap = rng.random((rows, n)) < 0.5

    expo = 1.0 / (eta + 1.0)
    beta = np.where(u <= 0.5, (2.0 * u) ** expo, (1.0 / (2.0 * (1.0 - u))) ** expo)
    c1 = 0.5 * ((1.0 + beta) * P1 + (1.0 - beta) * P2)
    c2 = 0.5 * ((1.0 - beta) * P1 + (1.0 + beta) * P2)
    cross = fire[:, None] & apply
    c1, c2 = np.where(swap, c2, c1), np.where(swap, c1, c2)
    C1 = np.where(cross, c1, P1)
    C2 = np.where(cross, c2, P2)
    return np.clip(C1, lower, upper), np.clip(C2, lower, upper)


def pm_batch(P, lower, upper, eta: float, rate: float, rng: np.random.Generator):
    """Polynomial mutation applied gene-wise with probability ``rate``.

    The perturbation is ``delta * (upper - lower)`` with ``delta`` drawn from
    the polynomial distribution of index ``eta``; results are clamped.
    """
    P = np.asarray(P, dtype=np.float64)
    rows, n = P.shape
    hit = rng.random((rows, n)) < rate
    u = rng.random((rows, n))
    expo = 1.0 / (eta + 1.0)
    delta = np.where(u < 0.5, (2.0 * u) ** expo - 1.0, 1.0 - (2.0 * (1.0 - u)) ** expo)
    span = np.asarray(upper) - np.asarray(lower)
    C = np.where(hit, P + delta * span, P)
    return np.clip(C, lower, upper)


def sm_batch(P, lower, upper, sigma_divisor: float, rate: float, rng: np.random.Generator):
    """Gaussian perturbation with sigma = (upper - lower) / sigma_divisor per mutated gene."""
    P = np.asarray(P, dtype=np.float64)
    rows, n = P.shape
    hit = rng.random((rows, n)) < rate
    noise = rng.standard_normal((rows, n))
    sigma = (np.asarray(upper) - np.asarray(lower)) / sigma_divisor
    C = np.where(hit, P + noise * sigma, P)
    return np.clip(C, lower, upper)


def uu_batch(P1, P2, lower, upper, gene_rate: float, rng: np.random.Generator):
    """Uniform crossover (gene swap w.p. 0.5), then uniform resampling w.p. ``gene_rate``."""
    P1 = np.asarray(P1, dtype=np.float64)
    P2 = np.asarray(P2, dtype=np.float64)
    rows, n = P1.shape
    swap = rng.random((rows, n)) < 0.5
    C1 = np.where(swap, P2, P1)
    C2 = np.where(swap, P1, P2)
    lo = np.broadcast_to(lower, (rows, n))
    hi = np.broadcast_to(upper, (rows, n))
    out = []
    for C in (C1, C2):
        hit = rng.random((rows, n)) < gene_rate
        fresh = lo + rng.random((rows, n)) * (hi - lo)
        out.append(np.clip(np.where(hit, fresh, C), lo, hi))
    return out[0], out[1]


# --------------------------------------------------------------------------
# Single-vector API
# --------------------------------------------------------------------------


def _row(v):
    return np.asarray(v, dtype=np.float64)[None, :]


def sbx_crossover(p1, p2, lower, upper, cfg: OperatorConfig, rng):
    c1, c2 = sbx_batch(_row(p1), _row(p2), lower, upper, cfg.sbx_eta, cfg.crossover_rate, rng)
    return c1[0], c2[0]


def polynomial_mutation(p, lower, upper, cfg: OperatorConfig, rng):
    n = len(p)
    return pm_batch(_row(p), lower, upper, cfg.pm_eta, cfg.mutation_prob(n), rng)[0]


def shrink_mutation(p, lower, upper, cfg: OperatorConfig, rng):
    n = len(p)
    return sm_batch(_row(p), lower, upper, cfg.sm_sigma_divisor, cfg.mutation_prob(n), rng)[0]


def uniform_uniform(p1, p2, lower, upper, cfg: OperatorConfig, rng):
    n = len(p1)
    c1, c2 = uu_batch(_row(p1), _row(p2), lower, upper, cfg.uu_prob(n), rng)
    return c1[0], c2[0]


def apply_operator_batch(op: OperatorId, P1, P2, lower, upper, cfg: OperatorConfig, rng):
    """Apply ``op`` row-wise; returns a list of one or two offspring arrays."""
    n = P1.shape[1]
    if op is OperatorId.SBX:
        return list(sbx_batch(P1, P2, lower, upper, cfg.sbx_eta, cfg.crossover_rate, rng))
    if op is OperatorId.UU:
        return list(uu_batch(P1, P2, lower, upper, cfg.uu_prob(n), rng))
    if op is OperatorId.PM:
        return [pm_batch(P1, lower, upper, cfg.pm_eta, cfg.mutation_prob(n), rng)]
    if op is OperatorId.SM:
        return [sm_batch(P1, lower, upper, cfg.sm_sigma_divisor, cfg.mutation_prob(n), rng)]
    raise ValueError(op)  # pragma: no cover


# --------------------------------------------------------------------------
# Operator rates
# --------------------------------------------------------------------------


def normalize_rates(R: np.ndarray) -> np.ndarray:
    R = np.asarray(R, dtype=np.float64)
    total = R.sum(axis=-1, keepdims=True)
    if np.any(total <= 0):
        raise ValueError("operator rates sum to zero")
    return R / total


def init_rates_batch(N: int, k: int, rng: np.random.Generator) -> np.ndarray:
    R = rng.random((N, k))
    dead = R.sum(axis=1) == 0
    while dead.any():  # probability-zero event
        R[dead] = rng.random((int(dead.sum()), k))
        dead = R.sum(axis=1) == 0
    return normalize_rates(R)


def init_rates(operators: Sequence, rng: np.random.Generator) -> dict:
    ops = operator_set(operators)
    return dict(zip(ops, init_rates_batch(1, len(ops), rng)[0]))


def roulette_batch(R: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Column index chosen per row, given one uniform draw per row."""
    cum = np.cumsum(R, axis=1)
    idx = np.sum(u[:, None] * cum[:, -1:] >= cum, axis=1)
    return np.minimum(idx, R.shape[1] - 1)


def choose_operator(rates: Mapping, rng: np.random.Generator):
    """Roulette choice of one operator with probability equal to its rate."""
    keys = list(rates)
    R = np.array([rates[k] for k in keys], dtype=np.float64)
    if R.sum() <= 0 or np.any(R < 0):
        raise ValueError("operator rates must be nonnegative and not all zero")
    return keys[int(roulette_batch(R[None, :], rng.random(1))[0])]


def reward_punish_batch(R: np.ndarray, op_idx: np.ndarray, improved: np.ndarray, delta: np.ndarray) -> np.ndarray:
    """Scale the applied operator's rate by (1+delta) or (1-delta), then normalise rows."""
    R = np.array(R, dtype=np.float64, copy=True)
    rows = np.arange(len(R))
    factor = np.where(improved, 1.0 + delta, 1.0 - delta)
    R[rows, op_idx] *= factor
    return normalize_rates(R)


def reward_punish(rates: Mapping, op, improved: bool, delta: float) -> dict:
    if not 0.0 <= delta <= 1.0:
        raise ValueError("delta must lie in [0, 1]")
    keys = list(rates)
    if op not in keys:
        raise KeyError(op)
    R = np.array([[rates[k] for k in keys]], dtype=np.float64)
    out = reward_punish_batch(R, np.array([keys.index(op)]), np.array([improved]), np.array([delta]))
    return dict(zip(keys, out[0]))
