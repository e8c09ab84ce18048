"""Inverted generational distance."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import Population, nondominated_mask
from .problems import ParetoFrontSample


@dataclass(frozen=True)
class IgdResult:
    value: float
    reference_size: int
    approximation_size: int

    def __float__(self) -> float:
        return self.value


def igd(p_star, p) -> IgdResult:
    """Mean distance from each reference point to its nearest approximation point.

    Args:
        p_star: reference front, a :class:`ParetoFrontSample` or (R, m) array.
        p: approximation set, (A, m) array.
    """
    ref = p_star.points if isinstance(p_star, ParetoFrontSample) else np.asarray(p_star, dtype=np.float64)
    P = np.atleast_2d(np.asarray(p, dtype=np.float64))
    if P.size == 0:
        raise ValueError("IGD is undefined for an empty approximation set")
    ref = np.atleast_2d(ref)
    if ref.shape[1] != P.shape[1]:
        raise ValueError(f"objective counts differ: reference m={ref.shape[1]}, approximation m={P.shape[1]}")
    d = kernels.min_distances(ref, P)
    return IgdResult(float(np.mean(d)), len(ref), len(P))


def igd_of_population(pop: Population, p_star, nondominated_only: bool = False) -> IgdResult:
    """IGD of a population's objective vectors (the whole population by default)."""
    F = pop.F
    if nondominated_only:
        F = F[nondominated_mask(F)]
    return igd(p_star, F)
