"""Hot numeric kernels.

Every kernel exists twice: a numba ``@njit`` loop and a pure-numpy
equivalent. The public names dispatch to the numba versions unless numba is
missing or ``MOHAEA_DISABLE_NUMBA`` is set to a truthy value, in which case
the numpy versions are used. Both paths are always importable so they can be
compared against each other (see ``benchmarks/bench_kernels.py``).
"""

from __future__ import annotations

import os

import numpy as np

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

_DISABLE = os.environ.get("MOHAEA_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}
USE_NUMBA: bool = numba is not None and not _DISABLE
BACKEND: str = "numba" if USE_NUMBA else "numpy"

# Floor applied to zero weight components before cosine computations.
WEIGHT_FLOOR = 1e-6


def _njit(fn):
    if numba is None:
        return fn
    return numba.njit(cache=True, nogil=True)(fn)


# --------------------------------------------------------------------------
# Dominance counting, O(m N^2)
# --------------------------------------------------------------------------


@_njit
def _dominance_counts_jit(F):
    # branch-free inner loop: every pair costs the same m comparisons
    N, m = F.shape
    counts = np.zeros(N, dtype=np.int64)
    for i in range(N):
        c = 0
        for j in range(N):
            le = 1
            lt = 0
            for k in range(m):
                a = F[j, k]
                b = F[i, k]
                le &= a <= b
                lt |= a < b
            c += le & lt
        counts[i] = c
    return counts


def dominance_counts_numpy(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    # dom[j, i]: row j dominates row i
    le = np.all(F[:, None, :] <= F[None, :, :], axis=2)
    lt = np.any(F[:, None, :] < F[None, :, :], axis=2)
    return np.sum(le & lt, axis=0).astype(np.int64)


def dominance_counts_numba(F: np.ndarray) -> np.ndarray:
    return _dominance_counts_jit(np.ascontiguousarray(F, dtype=np.float64))


# --------------------------------------------------------------------------
# Nondominated mask
# --------------------------------------------------------------------------


@_njit
def _nondominated_mask_jit(F):
    N, m = F.shape
    mask = np.ones(N, dtype=np.bool_)
    for i in range(N):
        for j in range(N):
            if j == i:
                continue
            le = True
            strict = False
            for k in range(m):
                if F[j, k] > F[i, k]:
                    le = False
                    break
                if F[j, k] < F[i, k]:
                    strict = True
            if le and strict:
                mask[i] = False
                break
    return mask


def nondominated_mask_numpy(F: np.ndarray) -> np.ndarray:
    F = np.asarray(F, dtype=np.float64)
    N = len(F)
    mask = np.ones(N, dtype=bool)
    # row-at-a-time keeps memory O(N m) for large reference sets
    for i in range(N):
        f = F[i]
        dominated_by = np.all(F <= f, axis=1) & np.any(F < f, axis=1)
        mask[i] = not dominated_by.any()
    return mask


def nondominated_mask_numba(F: np.ndarray) -> np.ndarray:
    return _nondominated_mask_jit(np.ascontiguousarray(F, dtype=np.float64))


# --------------------------------------------------------------------------
# Nearest-neighbour distances, O(|A| |B| m)
# --------------------------------------------------------------------------


@_njit
def _min_distances_jit(A, B):
    na, m = A.shape
    nb = B.shape[0]
    out = np.empty(na, dtype=np.float64)
    for i in range(na):
        best = np.inf
        for j in range(nb):
            s = 0.0
            for k in range(m):
                d = A[i, k] - B[j, k]
                s += d * d
            if s < best:
                best = s
        out[i] = np.sqrt(best)
    return out


def min_distances_numpy(A: np.ndarray, B: np.ndarray, chunk: int = 2048) -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    B = np.asarray(B, dtype=np.float64)
    out = np.empty(len(A))
    for start in range(0, len(A), chunk):
        diff = A[start:start + chunk, None, :] - B[None, :, :]
        out[start:start + chunk] = np.sqrt(np.min(np.sum(diff * diff, axis=2), axis=1))
    return out


def min_distances_numba(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    return _min_distances_jit(
        np.ascontiguousarray(A, dtype=np.float64), np.ascontiguousarray(B, dtype=np.float64)
    )


# --------------------------------------------------------------------------
# Parent/offspring pair fitness
# --------------------------------------------------------------------------
# mode 0: cosine distance to the reference direction plus dominance penalty
# mode 1: classical PBI, d1 + theta * d2, no penalty


@_njit
def _pair_fitness_jit(Fx, Find, W, z, mode, theta):
    N, m = Fx.shape
    fx = np.empty(N, dtype=np.float64)
    fi = np.empty(N, dtype=np.float64)
    w = np.empty(m, dtype=np.float64)
    for r in range(N):
        wn = 0.0
        for k in range(m):
            wk = W[r, k]
            if wk < 1e-6:
                wk = 1e-6
            w[k] = wk
            wn += wk * wk
        wn = np.sqrt(wn)
        for which in range(2):
            dot = 0.0
            vn = 0.0
            for k in range(m):
                if which == 0:
                    v = Fx[r, k] - z[k]
                else:
                    v = Find[r, k] - z[k]
                dot += v * w[k]
                vn += v * v
            vn = np.sqrt(vn)
            if mode == 0:
                if vn == 0.0:
                    val = 0.0
                else:
                    val = 1.0 - dot / (vn * wn)
            else:
                d1 = dot / wn
                # perpendicular component directly; vn^2 - d1^2 cancels badly
                d2sq = 0.0
                for k in range(m):
                    if which == 0:
                        v = Fx[r, k] - z[k]
                    else:
                        v = Find[r, k] - z[k]
                    e = v - d1 * w[k] / wn
                    d2sq += e * e
                val = d1 + theta * np.sqrt(d2sq)
            if which == 0:
                fx[r] = val
            else:
                fi[r] = val
        if mode == 0:
            x_le = True
            x_lt = False
            i_le = True
            i_lt = False
            for k in range(m):
                a = Fx[r, k]
                b = Find[r, k]
                if a > b:
                    x_le = False
                    i_lt = True
                elif a < b:
                    i_le = False
                    x_lt = True
            if x_le and x_lt:
                fi[r] += 1.0
            elif i_le and i_lt:
                fx[r] += 1.0
    return fx, fi


def _scalar_numpy(F, Wf, z, mode, theta):
    V = F - z
    wn = np.linalg.norm(Wf, axis=1)
    vn = np.sqrt(np.sum(V * V, axis=1))
    dot = np.sum(V * Wf, axis=1)
    if mode == 0:
        with np.errstate(invalid="ignore", divide="ignore"):
            val = 1.0 - dot / (vn * wn)
        return np.where(vn == 0.0, 0.0, val)
    d1 = dot / wn
    d2 = np.linalg.norm(V - (d1 / wn)[:, None] * Wf, axis=1)
    return d1 + theta * d2


def pair_fitness_numpy(Fx, Find, W, z, mode: int = 0, theta: float = 5.0):
    Fx = np.asarray(Fx, dtype=np.float64)
    Find = np.asarray(Find, dtype=np.float64)
    Wf = np.maximum(np.asarray(W, dtype=np.float64), WEIGHT_FLOOR)
    z = np.asarray(z, dtype=np.float64)
    fx = _scalar_numpy(Fx, Wf, z, mode, theta)
    fi = _scalar_numpy(Find, Wf, z, mode, theta)
    if mode == 0:
        x_dom = np.all(Fx <= Find, axis=1) & np.any(Fx < Find, axis=1)
        i_dom = np.all(Find <= Fx, axis=1) & np.any(Find < Fx, axis=1)
        fi = fi + x_dom
        fx = fx + i_dom
    return fx, fi


def pair_fitness_numba(Fx, Find, W, z, mode: int = 0, theta: float = 5.0):
    c = np.ascontiguousarray
    return _pair_fitness_jit(
        c(Fx, dtype=np.float64), c(Find, dtype=np.float64), c(W, dtype=np.float64),
        c(z, dtype=np.float64), int(mode), float(theta),
    )


if USE_NUMBA:
    dominance_counts = dominance_counts_numba
    nondominated_mask = nondominated_mask_numba
    min_distances = min_distances_numba
    pair_fitness = pair_fitness_numba
else:
    dominance_counts = dominance_counts_numpy
    nondominated_mask = nondominated_mask_numpy
    min_distances = min_distances_numpy
    pair_fitness = pair_fitness_numpy
