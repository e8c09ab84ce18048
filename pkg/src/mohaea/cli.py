"""Command-line entry point (``mohaea`` or ``python -m mohaea``).

Exit codes:
    0  success
    2  bad command-line usage
    3  unknown problem identifier
    4  malformed or unreadable front CSV
    5  no Das-Dennis lattice of the requested size
    6  invalid experiment config
    7  output cannot be written
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import kernels
from .engine import MoHaeaConfig, mohaea_run
from .harness import (
    DEFAULT_BUDGETS,
    DEFAULT_POPULATION,
    REFERENCE_SIZES,
    ExperimentConfig,
    reference_front,
    run_experiment,
    summary_to_csv,
    write_run_files,
)
from .metrics import igd, igd_of_population
from .problems import FrontCsvError, ProblemId, UnknownProblemError, front_to_csv, read_front_csv, sample_true_pf
from .refpoints import LatticeSizeError, das_dennis, divisions_for_population, lattice_to_csv

EXIT_USAGE = 2
EXIT_PROBLEM = 3
EXIT_CSV = 4
EXIT_LATTICE = 5
EXIT_CONFIG = 6
EXIT_IO = 7


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _emit(text: str, output: str | None) -> None:
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _family_default(problem, table: dict) -> int:
    return table[ProblemId.parse(problem).family]


def cmd_run(args) -> int:
    pid = ProblemId.parse(args.problem)
    cfg = MoHaeaConfig(
        problem=pid,
        N=args.pop or _family_default(pid, DEFAULT_POPULATION),
        max_evals=args.evals or _family_default(pid, DEFAULT_BUDGETS),
        operator_set=args.variant,
        seed=args.seed,
        knn_space=args.knn,
        fitness_mode=args.fitness,
    )
    record = mohaea_run(cfg)
    value = igd_of_population(record.final_pop, reference_front(pid)).value
    if args.output:
        write_run_files(record, args.output)
    print(f"problem={pid.value} variant={args.variant.upper()} seed={args.seed} "
          f"evals={record.evaluations} generations={int(record.generations[-1])} igd={value!r}")
    return 0


def cmd_bench(args) -> int:
    cfg = ExperimentConfig.from_file(args.config)
    if args.output_dir:
        cfg.output_dir = args.output_dir
    rows = run_experiment(cfg)
    sys.stdout.write(summary_to_csv(rows))
    return 0


def cmd_igd(args) -> int:
    pid = ProblemId.parse(args.problem)
    points = read_front_csv(args.input)
    if args.reference:
        ref = read_front_csv(args.reference)
    else:
        m = 2 if pid.family == "ZDT" else 3
        ref = sample_true_pf(pid, args.count or REFERENCE_SIZES[m])
    print(repr(igd(ref, points).value))
    return 0


def cmd_pf(args) -> int:
    sample = sample_true_pf(args.problem, args.count)
    _emit(front_to_csv(sample.points), args.output)
    return 0


def cmd_lattice(args) -> int:
    H = args.h if args.h is not None else divisions_for_population(args.m, args.n)
    _emit(lattice_to_csv(das_dennis(args.m, H)), args.output)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="mohaea", description="MoHAEA multi-objective optimizer and ZDT/DTLZ benchmark tools.")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    r = sub.add_parser("run", help="single MoHAEA run; prints the final IGD")
    r.add_argument("--problem", required=True)
    r.add_argument("--variant", default="SM", type=str.upper, choices=["SM", "PM"])
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--evals", type=int, help="evaluation budget (default 50000 ZDT, 75000 DTLZ)")
    r.add_argument("--pop", type=int, help="population size (default 100 ZDT, 300 DTLZ)")
    r.add_argument("--knn", default="decision", choices=["decision", "objective"])
    r.add_argument("--fitness", default="cosine", choices=["cosine", "pbi"])
    r.add_argument("--output", help="directory for objectives.csv, decisions.csv and rates.csv")
    r.set_defaults(func=cmd_run)

    b = sub.add_parser("bench", help="batch experiment from a JSON config")
    b.add_argument("--config", required=True)
    b.add_argument("--output-dir", help="overrides output_dir from the config")
    b.set_defaults(func=cmd_bench)

    i = sub.add_parser("igd", help="IGD of a front CSV against the true front")
    i.add_argument("--problem", required=True)
    i.add_argument("--input", required=True)
    i.add_argument("--count", type=int, help="reference sample size (default 1000 ZDT, 5050 DTLZ)")
    i.add_argument("--reference", help="use this front CSV as the reference set instead")
    i.set_defaults(func=cmd_igd)

    f = sub.add_parser("pf", help="sample the true Pareto front as CSV")
    f.add_argument("--problem", required=True)
    f.add_argument("--count", type=int, required=True)
    f.add_argument("--output")
    f.set_defaults(func=cmd_pf)

    lt = sub.add_parser("lattice", help="Das-Dennis directions as CSV")
    lt.add_argument("--m", type=int, required=True)
    group = lt.add_mutually_exclusive_group(required=True)
    group.add_argument("--h", type=int, help="number of divisions")
    group.add_argument("--n", type=int, help="direction count; H is inferred")
    lt.add_argument("--output")
    lt.set_defaults(func=cmd_lattice)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    logging.getLogger(__name__).debug("kernel backend: %s", kernels.BACKEND)

    def fail(code: int, msg) -> int:
        print(f"mohaea: error: {msg}", file=sys.stderr)
        return code

    try:
        return args.func(args)
    except UnknownProblemError as exc:
        return fail(EXIT_PROBLEM, exc)
    except FrontCsvError as exc:
        return fail(EXIT_CSV, exc)
    except LatticeSizeError as exc:
        return fail(EXIT_LATTICE, exc)
    except OSError as exc:
        return fail(EXIT_IO, f"{exc.strerror or exc}: {exc.filename}" if exc.filename else exc)
    except ValueError as exc:
        code = EXIT_CONFIG if args.command == "bench" else EXIT_USAGE
        return fail(code, exc)


if __name__ == "__main__":
    sys.exit(main())
