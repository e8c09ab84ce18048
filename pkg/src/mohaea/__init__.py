"""MoHAEA: per-individual adaptive operator rates with reference-direction fitness.

Also ships the ZDT/DTLZ benchmark problems, the IGD indicator and a seeded
batch harness.
"""

from .core import EvalBudget, Individual, Population, dominates, extract_nondominated, update_dominance_counts
from .engine import HaeaConfig, MoHaea, MoHaeaConfig, RunRecord, haea_run, mohaea_run
from .harness import ExperimentConfig, run_experiment, summarize
from .metrics import IgdResult, igd, igd_of_population
from .problems import ProblemId, ProblemSpec, make_problem, pf_residual, sample_true_pf
from .refpoints import das_dennis, divisions_for_population

__all__ = [
    "EvalBudget", "Individual", "Population", "dominates", "extract_nondominated", "update_dominance_counts",
    "HaeaConfig", "MoHaea", "MoHaeaConfig", "RunRecord", "haea_run", "mohaea_run",
    "ExperimentConfig", "run_experiment", "summarize",
    "IgdResult", "igd", "igd_of_population",
    "ProblemId", "ProblemSpec", "make_problem", "pf_residual", "sample_true_pf",
    "das_dennis", "divisions_for_population",
]
__version__ = "0.1.0"
