"""ZDT and DTLZ benchmark problems with analytic Pareto-front samplers.

Evaluators are vectorised: they accept a single decision vector of shape
(n,) or a batch of shape (N, n) and return (m,) or (N, m) accordingly.

References:
    Zitzler, E., Deb, K., & Thiele, L. (2000). Comparison of multiobjective
    evolutionary algorithms: Empirical results. Evolutionary Computation, 8(2).
    Deb, K., Thiele, L., Laumanns, M., & Zitzler, E. (2002). Scalable
    multi-objective optimization test problems. CEC 2002.
"""

from __future__ import annotations

import csv
import enum
import io
from dataclasses import dataclass
from typing import Callable

import numpy as np

from . import kernels
from .refpoints import das_dennis, lattice_size

# Smallest f1 on the ZDT6 Pareto front (minimum of 1 - exp(-4x) sin^6(6 pi x)).
ZDT6_F1_MIN = 0.2807753191


class UnknownProblemError(ValueError):
    """Identifier does not name one of the ten benchmark problems."""


class FrontCsvError(ValueError):
    """A front CSV is missing, empty or malformed."""


class ProblemId(str, enum.Enum):
    ZDT1 = "ZDT1"
    ZDT2 = "ZDT2"
    ZDT3 = "ZDT3"
    ZDT4 = "ZDT4"
    ZDT6 = "ZDT6"
    DTLZ1 = "DTLZ1"
    DTLZ2 = "DTLZ2"
    DTLZ3 = "DTLZ3"
    DTLZ4 = "DTLZ4"
    DTLZ6 = "DTLZ6"

    @classmethod
    def parse(cls, value: "str | ProblemId") -> "ProblemId":
        if isinstance(value, cls):
            return value
        try:
            return cls(str(value).strip().upper())
        except ValueError:
            known = ", ".join(p.value.lower() for p in cls)
            raise UnknownProblemError(f"unknown problem '{value}' (expected one of: {known})") from None

    @property
    def family(self) -> str:
        return "ZDT" if self.value.startswith("ZDT") else "DTLZ"


@dataclass(frozen=True)
class ProblemSpec:
    id: ProblemId
    n: int
    m: int
    lower: np.ndarray
    upper: np.ndarray
    evaluator: Callable[[np.ndarray], np.ndarray]

    def __post_init__(self):
        if self.n <= 0 or self.m <= 0:
            raise ValueError("n and m must be positive")
        if self.lower.shape != (self.n,) or self.upper.shape != (self.n,):
            raise ValueError("bounds must have length n")
        if not np.all(self.lower < self.upper):
            raise ValueError("every lower bound must be below its upper bound")

    def evaluate(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            return self.evaluator(X[None, :])[0]
        return self.evaluator(X)


@dataclass(frozen=True)
class ParetoFrontSample:
    problem: ProblemId
    points: np.ndarray

    @property
    def count(self) -> int:
        return len(self.points)

    @property
    def m(self) -> int:
        return self.points.shape[1]


# --------------------------------------------------------------------------
# Evaluators
# --------------------------------------------------------------------------


def _zdt_g_linear(X):
    return 1.0 + 9.0 * np.sum(X[:, 1:], axis=1) / (X.shape[1] - 1)


def zdt1(X):
    f1 = X[:, 0]
    g = _zdt_g_linear(X)
    return np.column_stack([f1, g * (1.0 - np.sqrt(f1 / g))])


def zdt2(X):
    f1 = X[:, 0]
    g = _zdt_g_linear(X)
    return np.column_stack([f1, g * (1.0 - (f1 / g) ** 2)])


def zdt3(X):
    f1 = X[:, 0]
    g = _zdt_g_linear(X)
    h = 1.0 - np.sqrt(f1 / g) - (f1 / g) * np.sin(10.0 * np.pi * f1)
    return np.column_stack([f1, g * h])


def zdt4(X):
    f1 = X[:, 0]
    rest = X[:, 1:]
    g = 1.0 + 10.0 * rest.shape[1] + np.sum(rest**2 - 10.0 * np.cos(4.0 * np.pi * rest), axis=1)
    return np.column_stack([f1, g * (1.0 - np.sqrt(f1 / g))])


def zdt6(X):
    x1 = X[:, 0]
    f1 = 1.0 - np.exp(-4.0 * x1) * np.sin(6.0 * np.pi * x1) ** 6
    g = 1.0 + 9.0 * (np.sum(X[:, 1:], axis=1) / (X.shape[1] - 1)) ** 0.25
    return np.column_stack([f1, g * (1.0 - (f1 / g) ** 2)])


def _g_rastrigin(Xm):
    k = Xm.shape[1]
    d = Xm - 0.5
    return 100.0 * (k + np.sum(d * d - np.cos(20.0 * np.pi * d), axis=1))


def _g_sphere(Xm):
    d = Xm - 0.5
    return np.sum(d * d, axis=1)


def _spherical(theta, radius):
    """Map m-1 angles (radians) and radii onto the positive orthant."""
    N, M1 = theta.shape
    m = M1 + 1
    F = np.empty((N, m))
    cos_prod = np.ones(N)
    for i in range(m - 1):
        F[:, m - 1 - i] = radius * cos_prod * np.sin(theta[:, i])
        cos_prod = cos_prod * np.cos(theta[:, i])
    F[:, 0] = radius * cos_prod
    return F


def _dtlz_factory(m: int, kind: str):
    def dtlz(X):
        P = X[:, : m - 1]
        Xm = X[:, m - 1:]
        if kind == "DTLZ1":
            g = _g_rastrigin(Xm)
            F = np.empty((len(X), m))
            prod = np.ones(len(X))
            for i in range(m - 1):
                F[:, m - 1 - i] = 0.5 * (1.0 + g) * prod * (1.0 - P[:, i])
                prod = prod * P[:, i]
            F[:, 0] = 0.5 * (1.0 + g) * prod
            return F
        if kind == "DTLZ2":
            g = _g_sphere(Xm)
            theta = P * (np.pi / 2)
        elif kind == "DTLZ3":
            g = _g_rastrigin(Xm)
            theta = P * (np.pi / 2)
        elif kind == "DTLZ4":
            g = _g_sphere(Xm)
            theta = P**100 * (np.pi / 2)
        elif kind == "DTLZ6":
            g = np.sum(Xm**0.1, axis=1)
            theta = np.empty_like(P)
            theta[:, 0] = P[:, 0] * (np.pi / 2)
            if m > 2:
                scale = (np.pi / (4.0 * (1.0 + g)))[:, None]
                theta[:, 1:] = scale * (1.0 + 2.0 * g[:, None] * P[:, 1:])
        else:  # pragma: no cover
            raise ValueError(kind)
        return _spherical(theta, 1.0 + g)

    return dtlz


_ZDT = {
    ProblemId.ZDT1: (zdt1, 30),
    ProblemId.ZDT2: (zdt2, 30),
    ProblemId.ZDT3: (zdt3, 30),
    ProblemId.ZDT4: (zdt4, 10),
    ProblemId.ZDT6: (zdt6, 10),
}

# number of distance variables k; n = m + k - 1
_DTLZ_K = {
    ProblemId.DTLZ1: 5,
    ProblemId.DTLZ2: 10,
    ProblemId.DTLZ3: 10,
    ProblemId.DTLZ4: 10,
    ProblemId.DTLZ6: 10,
}


def make_problem(problem_id, n: int | None = None) -> ProblemSpec:
    """Build a benchmark instance with its canonical dimensions.

    ``n`` overrides the number of decision variables (DTLZ instances keep
    three objectives and grow or shrink the distance block).
    """
    pid = ProblemId.parse(problem_id)
    if pid in _ZDT:
        fn, n_default = _ZDT[pid]
        n = n_default if n is None else int(n)
        if n < 2:
            raise ValueError("ZDT problems need n >= 2")
        lower = np.zeros(n)
        upper = np.ones(n)
        if pid is ProblemId.ZDT4:
            lower[1:] = -5.0
            upper[1:] = 5.0
        return ProblemSpec(pid, n, 2, lower, upper, fn)
    m = 3
    n = m + _DTLZ_K[pid] - 1 if n is None else int(n)
    if n < m:
        raise ValueError(f"DTLZ problems with m={m} need n >= {m}")
    return ProblemSpec(pid, n, m, np.zeros(n), np.ones(n), _dtlz_factory(m, pid.value))


def optimal_decision(problem: ProblemSpec, position) -> np.ndarray:
    """Decision vector on the Pareto set with the given position variables."""
    position = np.atleast_1d(np.asarray(position, dtype=np.float64))
    x = np.empty(problem.n)
    npos = problem.m - 1
    x[:npos] = position[:npos]
    x[npos:] = 0.0 if problem.id.family == "ZDT" or problem.id is ProblemId.DTLZ6 else 0.5
    return x


# --------------------------------------------------------------------------
# Pareto-front samplers
# --------------------------------------------------------------------------


def _zdt3_curve(f1):
    return 1.0 - np.sqrt(f1) - f1 * np.sin(10.0 * np.pi * f1)


def _largest_lattice_h(m: int, count: int) -> int:
    H = 1
    while lattice_size(m, H + 1) <= count:
        H += 1
    return H


def sample_true_pf(problem_id, count: int) -> ParetoFrontSample:
    """Evenly spread points on the analytic Pareto front.

    Bi-objective fronts return exactly ``count`` points. The DTLZ1-4
    samplers use the largest simplex lattice with at most ``count`` points
    (5050 gives H=99 exactly); DTLZ6 returns ``count`` points along its
    degenerate curve.
    """
    pid = ProblemId.parse(problem_id)
    if count < 2:
        raise ValueError("need at least two front points")
    if pid in (ProblemId.ZDT1, ProblemId.ZDT4):
        f1 = np.linspace(0.0, 1.0, count)
        pts = np.column_stack([f1, 1.0 - np.sqrt(f1)])
    elif pid is ProblemId.ZDT2:
        f1 = np.linspace(0.0, 1.0, count)
        pts = np.column_stack([f1, 1.0 - f1**2])
    elif pid is ProblemId.ZDT6:
        f1 = np.linspace(ZDT6_F1_MIN, 1.0, count)
        pts = np.column_stack([f1, 1.0 - f1**2])
    elif pid is ProblemId.ZDT3:
        dense = max(10 * count, 2000)
        f1 = np.linspace(0.0, 1.0, dense)
        cand = np.column_stack([f1, _zdt3_curve(f1)])
        cand = cand[kernels.nondominated_mask(cand)]
        while len(cand) < count:  # pragma: no cover - oversampling makes this unreachable
            dense *= 2
            f1 = np.linspace(0.0, 1.0, dense)
            cand = np.column_stack([f1, _zdt3_curve(f1)])
            cand = cand[kernels.nondominated_mask(cand)]
        pts = cand[np.round(np.linspace(0, len(cand) - 1, count)).astype(int)]
    elif pid is ProblemId.DTLZ1:
        pts = 0.5 * das_dennis(3, _largest_lattice_h(3, count))
    elif pid in (ProblemId.DTLZ2, ProblemId.DTLZ3, ProblemId.DTLZ4):
        W = das_dennis(3, _largest_lattice_h(3, count))
        pts = W / np.linalg.norm(W, axis=1, keepdims=True)
    elif pid is ProblemId.DTLZ6:
        t = np.linspace(0.0, np.pi / 2, count)
        c = np.cos(t) / np.sqrt(2.0)
        pts = np.column_stack([c, c, np.sin(t)])
    else:  # pragma: no cover
        raise ValueError(pid)
    return ParetoFrontSample(pid, np.ascontiguousarray(pts, dtype=np.float64))


def _dtlz6_curve_distance(F):
    # The front is the quarter unit circle spanned by (1,1,0)/sqrt(2) and e3.
    a = (F[:, 0] + F[:, 1]) / np.sqrt(2.0)
    b = F[:, 2]
    c = (F[:, 0] - F[:, 1]) / np.sqrt(2.0)
    r = np.hypot(a, b)
    inside = (a >= 0.0) & (b >= 0.0)
    d_arc = np.abs(r - 1.0)
    d_end = np.minimum(np.hypot(a - 1.0, b), np.hypot(a, b - 1.0))
    d_plane = np.where(inside, d_arc, d_end)
    return np.hypot(d_plane, c)


def pf_residual(problem_id, f) -> np.ndarray | float:
    """Absolute residual of the front's defining equation at ``f``.

    DTLZ6 has no scalar defining equation; its residual is the Euclidean
    distance to the front curve.
    """
    pid = ProblemId.parse(problem_id)
    F = np.asarray(f, dtype=np.float64)
    single = F.ndim == 1
    F = np.atleast_2d(F)
    if pid in (ProblemId.ZDT1, ProblemId.ZDT4):
        r = np.abs(F[:, 1] - (1.0 - np.sqrt(F[:, 0])))
    elif pid in (ProblemId.ZDT2, ProblemId.ZDT6):
        r = np.abs(F[:, 1] - (1.0 - F[:, 0] ** 2))
    elif pid is ProblemId.ZDT3:
        r = np.abs(F[:, 1] - _zdt3_curve(F[:, 0]))
    elif pid is ProblemId.DTLZ1:
        r = np.abs(F.sum(axis=1) - 0.5)
    elif pid in (ProblemId.DTLZ2, ProblemId.DTLZ3, ProblemId.DTLZ4):
        r = np.abs(np.linalg.norm(F, axis=1) - 1.0)
    else:
        r = _dtlz6_curve_distance(F)
    return float(r[0]) if single else r


def front_to_csv(points: np.ndarray, handle=None) -> str:
    """Write objective vectors as CSV with an ``f1,f2[,f3]`` header."""
    points = np.atleast_2d(points)
    buf = io.StringIO() if handle is None else handle
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f"f{i + 1}" for i in range(points.shape[1])])
    for row in points:
        writer.writerow([repr(float(v)) for v in row])
    return buf.getvalue() if handle is None else ""


def read_front_csv(path) -> np.ndarray:
    """Read a front CSV written by :func:`front_to_csv`."""
    try:
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
    except (OSError, UnicodeDecodeError) as exc:
        raise FrontCsvError(f"{path}: cannot read ({exc.__class__.__name__})") from None
    if not rows:
        raise FrontCsvError(f"{path}: empty CSV")
    header = [h.strip() for h in rows[0]]
    if not header or any(h != f"f{i + 1}" for i, h in enumerate(header)):
        raise FrontCsvError(f"{path}: expected header f1,f2[,f3], got {','.join(header)}")
    body = [r for r in rows[1:] if r]
    if not body:
        raise FrontCsvError(f"{path}: no data rows")
    if any(len(r) != len(header) for r in body):
        raise FrontCsvError(f"{path}: rows do not all have {len(header)} columns")
    try:
        return np.array([[float(v) for v in r] for r in body], dtype=np.float64)
    except ValueError as exc:
        raise FrontCsvError(f"{path}: non-numeric value ({exc})") from None
