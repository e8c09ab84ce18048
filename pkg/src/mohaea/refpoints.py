"""Das-Dennis simplex-lattice reference directions."""

from __future__ import annotations

from itertools import combinations
from math import comb

import numpy as np


class LatticeSizeError(ValueError):
    """No simplex lattice has exactly the requested number of directions."""

    def __init__(self, m: int, N: int, below: tuple[int, int] | None, above: tuple[int, int]):
        self.m, self.N, self.below, self.above = m, N, below, above
        parts = []
        if below is not None:
            parts.append(f"{below[1]} at H={below[0]}")
        parts.append(f"{above[1]} at H={above[0]}")
        super().__init__(
            f"no Das-Dennis lattice with m={m} has {N} directions; nearest sizes: " + ", ".join(parts)
        )


def lattice_size(m: int, H: int) -> int:
    return comb(H + m - 1, m - 1)


def das_dennis(m: int, H: int) -> np.ndarray:
    """All compositions of ``H`` into ``m`` nonnegative parts, divided by ``H``.

    Rows come out in lexicographic order of the composition, e.g. ``m=2,
    H=4`` gives (0,1), (0.25,0.75), ..., (1,0).

    Returns:
        Array of shape (C(H+m-1, m-1), m); each row sums to 1.
    """
    if m < 1 or H < 1:
        raise ValueError(f"need m >= 1 and H >= 1, got m={m}, H={H}")
    slots = H + m - 1
    rows = []
    # stars and bars: bar positions split H stars into m parts
    for bars in combinations(range(slots), m - 1):
        edges = (-1, *bars, slots)
        rows.append([edges[i + 1] - edges[i] - 1 for i in range(m)])
    W = np.array(rows, dtype=np.float64)
    # combinations() yields descending first parts; flip to ascending lexicographic order
    W = W[np.lexsort(W.T[::-1])]
    return W / H


def divisions_for_population(m: int, N: int) -> int:
    """Invert the lattice size formula: the ``H`` with exactly ``N`` directions."""
    if m < 1 or N < 1:
        raise ValueError(f"need m >= 1 and N >= 1, got m={m}, N={N}")
    if m == 1:
        raise LatticeSizeError(m, N, None, (1, 1))
    H = 1
    prev = None
    while True:
        size = lattice_size(m, H)
        if size == N:
            return H
        if size > N:
            raise LatticeSizeError(m, N, prev, (H, size))
        prev = (H, size)
        H += 1


def reference_directions(m: int, N: int) -> np.ndarray:
    """Lattice with exactly ``N`` directions; ``N=1`` gives the simplex centroid."""
    if N == 1:
        return np.full((1, m), 1.0 / m)
    return das_dennis(m, divisions_for_population(m, N))


def assign_initial_directions(pop, lattice: np.ndarray, rng: np.random.Generator):
    """Random one-to-one assignment of lattice directions to population slots.

    ``pop`` is either a :class:`~mohaea.core.Population` (updated in place and
    returned) or a slot count, in which case the permuted directions are
    returned as an array.
    """
    lattice = np.asarray(lattice, dtype=np.float64)
    N = pop if isinstance(pop, (int, np.integer)) else len(pop)
    if len(lattice) != N:
        raise ValueError(f"population of {N} cannot own a lattice of {len(lattice)} directions")
    directions = lattice[rng.permutation(N)].copy()
    if isinstance(pop, (int, np.integer)):
        return directions
    pop.directions = directions
    return pop


def lattice_to_csv(W: np.ndarray) -> str:
    m = W.shape[1]
    lines = [",".join(f"w{i + 1}" for i in range(m))]
    lines += [",".join(repr(float(v)) for v in row) for row in W]
    return "\n".join(lines) + "\n"
