"""Batch experiment runner: repeated seeded runs, IGD statistics and CSV dumps.

Layout of an experiment directory::

    metadata.json                       resolved config and reference-set sizes
    runs/<PROBLEM>_<VARIANT>_r<i>.json  one file per completed run
    summary.csv                         problem,variant,mean_igd,std_igd,best_igd,runs
    fronts/<PROBLEM>_<VARIANT>_best.csv final objectives of the lowest-IGD run
    rates/<PROBLEM>_<VARIANT>_rates.csv generation,evals,<operator columns>

Run files are written atomically, so an interrupted experiment resumes by
skipping every run whose file already exists.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import os
from dataclasses import asdict, dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .engine import MoHaeaConfig, RunRecord, mohaea_run
from .metrics import igd_of_population
from .operators import VARIANTS
from .problems import ProblemId, front_to_csv, sample_true_pf

log = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "MOHAEA_OUTPUT_DIR"
REFERENCE_SIZES = {2: 1000, 3: 5050}
DEFAULT_BUDGETS = {"ZDT": 50_000, "DTLZ": 75_000}
DEFAULT_POPULATION = {"ZDT": 100, "DTLZ": 300}


def reference_front(problem):
    pid = ProblemId.parse(problem)
    m = 2 if pid.family == "ZDT" else 3
    return sample_true_pf(pid, REFERENCE_SIZES[m])


# --------------------------------------------------------------------------
# Configuration
# --------------------------------------------------------------------------


@dataclass
class ExperimentConfig:
    """Everything needed to reproduce a batch of runs.

    Seeds follow ``base_seed + run_index`` for every (problem, variant)
    cell, so a cell's runs do not depend on which other cells ran.
    """

    problems: list = field(default_factory=lambda: [p.value for p in ProblemId])
    variants: list = field(default_factory=lambda: ["SM", "PM"])
    runs: int = 30
    base_seed: int = 0
    budgets: dict = field(default_factory=lambda: dict(DEFAULT_BUDGETS))
    N: dict = field(default_factory=lambda: dict(DEFAULT_POPULATION))
    output_dir: str = "results"
    trace_every: int = 1
    knn_space: str = "decision"
    fitness_mode: str = "cosine"

    def __post_init__(self):
        self.problems = [ProblemId.parse(p).value for p in self.problems]
        variants = []
        for v in self.variants:
            key = str(v).strip().upper()
            if key not in VARIANTS:
                raise ValueError(f"unknown variant '{v}' (expected sm or pm)")
            variants.append(key)
        self.variants = variants
        if not self.problems or not self.variants:
            raise ValueError("problems and variants must be nonempty")
        if self.runs < 1:
            raise ValueError("runs must be >= 1")
        self.budgets = {**DEFAULT_BUDGETS, **{k.upper(): int(v) for k, v in self.budgets.items()}}
        self.N = {**DEFAULT_POPULATION, **{k.upper(): int(v) for k, v in self.N.items()}}
        for name, table in (("budgets", self.budgets), ("N", self.N)):
            bad = [k for k, v in table.items() if v <= 0]
            if bad:
                raise ValueError(f"{name} must be positive (got {bad})")
        env = os.environ.get(OUTPUT_DIR_ENV)
        if env:
            self.output_dir = env

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(unknown)}")
        return cls(**data)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        """Load a JSON config; keys mirror the dataclass fields."""
        with open(path, encoding="utf-8") as fh:
            try:
                data = json.load(fh)
            except json.JSONDecodeError as exc:
                raise ValueError(f"{path}: not valid JSON ({exc.msg} at line {exc.lineno})") from None
        if not isinstance(data, dict):
            raise ValueError(f"{path}: config must be a JSON object")
        return cls.from_dict(data)

    def seeds(self) -> list[int]:
        return [self.base_seed + i for i in range(self.runs)]

    def run_config(self, problem, variant: str, seed: int) -> MoHaeaConfig:
        fam = ProblemId.parse(problem).family
        return MoHaeaConfig(
            problem=problem, N=self.N[fam], max_evals=self.budgets[fam], operator_set=variant,
            seed=seed, trace_every=self.trace_every, knn_space=self.knn_space,
            fitness_mode=self.fitness_mode,
        )


# --------------------------------------------------------------------------
# Statistics and CSV helpers
# --------------------------------------------------------------------------


def summarize(values) -> tuple[float, float]:
    """Mean and sample standard deviation; a single value has std 0."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("cannot summarize an empty sample")
    std = float(np.std(v, ddof=1)) if v.size > 1 else 0.0
    return float(np.mean(v)), std


@dataclass(frozen=True)
class SummaryRow:
    problem: str
    variant: str
    mean_igd: float
    std_igd: float
    best_igd: float
    runs: int


SUMMARY_HEADER = ("problem", "variant", "mean_igd", "std_igd", "best_igd", "runs")


def summary_to_csv(rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SUMMARY_HEADER)
    for r in rows:
        w.writerow([r.problem, r.variant, repr(r.mean_igd), repr(r.std_igd), repr(r.best_igd), r.runs])
    return buf.getvalue()


def read_summary_csv(path) -> list[SummaryRow]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        return [
            SummaryRow(r["problem"], r["variant"], float(r["mean_igd"]), float(r["std_igd"]),
                       float(r["best_igd"]), int(r["runs"]))
            for r in reader
        ]


def rates_to_csv(generations, evals, rates, operators) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["generation", "evals", *operators])
    for g, e, row in zip(generations, evals, rates):
        w.writerow([int(g), repr(float(e)) if isinstance(e, float) else int(e), *(repr(float(r)) for r in row)])
    return buf.getvalue()


def _atomic_write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text, encoding="utf-8")
    os.replace(tmp, path)


def write_run_files(record: RunRecord, directory) -> dict[str, Path]:
    """Dump one run: final objectives, final decision vectors and the rate trace."""
    d = Path(directory)
    pop = record.final_pop
    xcols = ",".join(f"x{i + 1}" for i in range(pop.X.shape[1]))
    xrows = "\n".join(",".join(repr(float(v)) for v in row) for row in pop.X)
    paths = {
        "objectives": d / "objectives.csv",
        "decisions": d / "decisions.csv",
        "rates": d / "rates.csv",
    }
    _atomic_write(paths["objectives"], front_to_csv(pop.F))
    _atomic_write(paths["decisions"], xcols + "\n" + xrows + "\n")
    _atomic_write(paths["rates"], rates_to_csv(record.generations, record.evals, record.mean_rates, record.operators))
    return paths


# --------------------------------------------------------------------------
# Experiment
# --------------------------------------------------------------------------


def run_file(output_dir, problem: str, variant: str, run_index: int) -> Path:
    return Path(output_dir) / "runs" / f"{problem}_{variant}_r{run_index:03d}.json"


def execute_run(cfg: ExperimentConfig, problem: str, variant: str, run_index: int, reference=None) -> dict:
    """One seeded run reduced to a JSON-ready result."""
    seed = cfg.seeds()[run_index]
    record = mohaea_run(cfg.run_config(problem, variant, seed))
    ref = reference if reference is not None else reference_front(problem)
    result = igd_of_population(record.final_pop, ref)
    return {
        "problem": problem,
        "variant": variant,
        "run": run_index,
        "seed": seed,
        "igd": result.value,
        "reference_size": result.reference_size,
        "evaluations": record.evaluations,
        "generations": int(record.generations[-1]),
        "operators": list(record.operators),
        "trace_generations": record.generations.tolist(),
        "trace_evals": record.evals.tolist(),
        "mean_rates": record.mean_rates.tolist(),
        "final_objectives": record.final_pop.F.tolist(),
    }


def load_run(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)


def mean_rate_trajectory(results: list[dict]):
    """Average the traced rates over runs, truncated to the shortest trace.

    Returns ``(generations, evals, rates)`` where ``evals`` is the mean
    evaluation count at each traced generation.
    """
    k = min(len(r["mean_rates"]) for r in results)
    gens = np.asarray(results[0]["trace_generations"][:k], dtype=np.int64)
    evals = np.mean([r["trace_evals"][:k] for r in results], axis=0)
    rates = np.mean([r["mean_rates"][:k] for r in results], axis=0)
    return gens, evals, rates


def run_experiment(cfg: ExperimentConfig, progress=None) -> list[SummaryRow]:
    """Run every (problem, variant, run) cell, then write summary and dumps.

    Args:
        cfg: experiment definition.
        progress: optional callable receiving each finished result dict.

    Raises:
        OSError: ``output_dir`` cannot be created or written.
    """
    out = Path(cfg.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    if not os.access(out, os.W_OK):
        raise PermissionError(f"output directory '{out}' is not writable")
    meta = {
        "config": asdict(cfg),
        "seeds": cfg.seeds(),
        "reference_sizes": {p: REFERENCE_SIZES[2 if p.startswith("ZDT") else 3] for p in cfg.problems},
    }
    _atomic_write(out / "metadata.json", json.dumps(meta, indent=2, sort_keys=True) + "\n")

    rows = []
    for problem in cfg.problems:
        ref = None
        for variant in cfg.variants:
            results = []
            for i in range(cfg.runs):
                path = run_file(out, problem, variant, i)
                if path.exists():
                    res = load_run(path)
                else:
                    if ref is None:
                        ref = reference_front(problem)
                    res = execute_run(cfg, problem, variant, i, ref)
                    _atomic_write(path, json.dumps(res) + "\n")
                    log.info("%s/%s run %d: IGD %.4e", problem, variant, i, res["igd"])
                if progress is not None:
                    progress(res)
                results.append(res)
            rows.append(_write_cell(out, problem, variant, results))

    _atomic_write(out / "summary.csv", summary_to_csv(rows))
    return rows


def _write_cell(out: Path, problem: str, variant: str, results: list[dict]) -> SummaryRow:
    igds = [r["igd"] for r in results]
    mean, std = summarize(igds)
    best = results[int(np.argmin(igds))]
    _atomic_write(out / "fronts" / f"{problem}_{variant}_best.csv",
                  front_to_csv(np.asarray(best["final_objectives"])))
    gens, evals, rates = mean_rate_trajectory(results)
    _atomic_write(out / "rates" / f"{problem}_{variant}_rates.csv",
                  rates_to_csv(gens, evals, rates, results[0]["operators"]))
    return SummaryRow(problem, variant, mean, std, float(min(igds)), len(results))


# --------------------------------------------------------------------------
# Published reference values
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class ReferenceValue:
    problem: str
    algorithm: str
    mean_igd: float
    std_igd: float
    source: str


def load_reference_table() -> list[ReferenceValue]:
    """Published IGD statistics shipped with the package (``data/reference_igd.csv``)."""
    text = resources.files("mohaea").joinpath("data/reference_igd.csv").read_text(encoding="utf-8")
    return [
        ReferenceValue(r["problem"], r["algorithm"], float(r["mean_igd"]), float(r["std_igd"]), r["source"])
        for r in csv.DictReader(io.StringIO(text))
    ]


def reference_lookup() -> dict[tuple[str, str], ReferenceValue]:
    return {(r.problem, r.algorithm): r for r in load_reference_table()}
