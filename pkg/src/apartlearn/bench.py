"""Command line benchmark harness.

Runs the learner against DOT models or generated machines and writes one
metrics row per run, followed by a per-model summary (mean, stddev, min, max).
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import os
import statistics
import sys
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

from .dot import DotError, parse_dot
from .learner import ADS, ANY_ORDER, PLAIN, STRATEGIC, BudgetExceeded, Learner, TeacherInconsistent
from .mealy import GenerationError, MealyMachine, bisimilar, minimize, random_machine
from .oracle import EXACT, RANDOM_WALK, EqOracleConfig, Teacher

log = logging.getLogger("apartlearn")

COUNTERS = ("learn_resets", "learn_inputs", "test_resets", "test_inputs", "eq_queries")

# Resets of one run are bounded by C*k*n^2 + n*log2(m_max) + n.
CEILING_C = 7


class BenchError(Exception):
    def __init__(self, kind: str, message: str, code: int = 2, **extra):
        super().__init__(message)
        self.kind, self.code, self.extra = kind, code, extra

    def to_json(self) -> str:
        return json.dumps({"error": self.kind, "message": str(self), **self.extra}, sort_keys=True)


@dataclass(frozen=True)
class ModelSource:
    path: str | None = None
    n: int = 0
    k: int = 0
    p: int = 0

    @property
    def model_id(self) -> str:
        if self.path is not None:
            return os.path.splitext(os.path.basename(self.path))[0]
        return f"random-n{self.n}-k{self.k}-p{self.p}"


@dataclass
class ExperimentSpec:
    sources: list[ModelSource]
    variant: str = ADS
    policy: str = STRATEGIC
    oracle: EqOracleConfig = None
    repeats: int = 1
    seed: int = 0
    out: str | None = None
    format: str = "csv"
    max_queries: int | None = None
    timing: bool = False

    def __post_init__(self):
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if self.oracle is None:
            self.oracle = EqOracleConfig(seed=self.seed)


@dataclass
class MetricsRow:
    model: str
    n: int
    k: int
    learn_resets: int
    learn_inputs: int
    test_resets: int
    test_inputs: int
    eq_queries: int
    success: bool
    wall_time: float | None = None


def parse_random(text: str) -> ModelSource:
    params = {}
    for part in text.split(","):
        key, sep, value = part.partition("=")
        if not sep or key.strip() not in ("n", "k", "p"):
            raise argparse.ArgumentTypeError(f"expected n=<N>,k=<K>,p=<P>, got {text!r}")
        try:
            params[key.strip()] = int(value)
        except ValueError:
            raise argparse.ArgumentTypeError(f"{key.strip()} must be an integer, got {value!r}") from None
    if set(params) != {"n", "k", "p"}:
        raise argparse.ArgumentTypeError(f"expected n=<N>,k=<K>,p=<P>, got {text!r}")
    return ModelSource(n=params["n"], k=params["k"], p=params["p"])


def load_model(source: ModelSource, seed: int) -> MealyMachine:
    if source.path is None:
        try:
            return random_machine(source.n, source.k, source.p, seed)
        except (ValueError, GenerationError) as exc:
            raise BenchError("generation-failed", str(exc)) from exc
    try:
        with open(source.path, encoding="utf-8") as fh:
            text = fh.read()
    except FileNotFoundError:
        raise BenchError("file-not-found", f"no such file: {source.path}", path=source.path) from None
    except OSError as exc:
        raise BenchError("io-error", str(exc), path=source.path) from exc
    try:
        machine = parse_dot(text)
    except DotError as exc:
        raise BenchError("parse-error", str(exc), path=source.path, line=exc.line) from exc
    if not machine.complete:
        raise BenchError("incomplete-model", f"{source.path} is not a complete machine", path=source.path)
    return machine


def resets_ceiling(n: int, k: int, m_max: int) -> float:
    return CEILING_C * k * n * n + n * math.log2(max(m_max, 1)) + n


def _event_printer(model_id, repeat):
    def sink(event):
        print(json.dumps({"model": model_id, "repeat": repeat, **event}), file=sys.stderr)
    return sink


def run_one(spec: ExperimentSpec, machine: MealyMachine, model_id: str, n: int, repeat: int, verbose=False):
    """One learning run; returns ``(row, m_max)``."""
    seed = spec.seed + repeat
    config = EqOracleConfig(spec.oracle.kind, spec.oracle.extra_states, spec.oracle.infix_length,
                            spec.oracle.budget, seed)
    teacher = Teacher(machine, config)
    sink = _event_printer(model_id, repeat) if verbose else None
    start = time.perf_counter()
    try:
        report = Learner(teacher, variant=spec.variant, policy=spec.policy, seed=seed,
                         max_output_queries=spec.max_queries, event_sink=sink).run()
    except BudgetExceeded as exc:
        raise BenchError("budget-exceeded", str(exc), code=3, model=model_id, repeat=repeat) from exc
    except TeacherInconsistent as exc:
        raise BenchError("teacher-inconsistent", str(exc), code=3, model=model_id, repeat=repeat) from exc
    elapsed = time.perf_counter() - start
    sul = teacher.sul
    row = MetricsRow(
        model=model_id, n=n, k=len(machine.inputs),
        learn_resets=sul.learn_resets, learn_inputs=sul.learn_symbols,
        test_resets=sul.test_resets, test_inputs=sul.test_symbols,
        eq_queries=teacher.eq_queries,
        success=bisimilar(report.hypothesis, machine),
        wall_time=round(elapsed, 6) if spec.timing else None,
    )
    return row, report.m_max


def _job(args):
    return run_one(*args)


def run_experiment(spec: ExperimentSpec, jobs: int = 1, verbose: bool = False):
    """Run every (model, repeat) pair; returns ``[(row, m_max)]`` ordered by model then repeat."""
    work = []
    for source in spec.sources:
        machine = load_model(source, spec.seed)
        n = minimize(machine).num_states
        work.extend((spec, machine, source.model_id, n, r, verbose) for r in range(spec.repeats))
    if jobs > 1 and len(work) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_job, work))
    return [run_one(*w) for w in work]


def aggregate(rows):
    """Per-model mean, population stddev, min and max of every counter."""
    by_model: dict[str, list[MetricsRow]] = {}
    for row in rows:
        by_model.setdefault(row.model, []).append(row)
    summary = {}
    for model, group in by_model.items():
        stats = {}
        for name in COUNTERS:
            values = [getattr(r, name) for r in group]
            stats[name] = {
                "mean": statistics.fmean(values),
                "stddev": statistics.pstdev(values),
                "min": min(values),
                "max": max(values),
            }
        summary[model] = stats
    return summary


def ratio_report(rows):
    """learn_resets / (k*n) per row, with a flag for ratios outside [1, 4]."""
    out = []
    for row in rows:
        ratio = row.learn_resets / (row.k * row.n)
        out.append((row.model, ratio, not 1 <= ratio <= 4))
    return out


def rows_to_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow([f.name for f in fields(MetricsRow)])
    for row in rows:
        writer.writerow(["" if v is None else v for v in asdict(row).values()])
    return buf.getvalue()


def rows_to_json(rows) -> str:
    return json.dumps([asdict(r) for r in rows], indent=2) + "\n"


def format_summary(rows, variant: str) -> str:
    lines = []
    for model, stats in aggregate(rows).items():
        lines.append(f"{model}:")
        for name, s in stats.items():
            lines.append(f"  {name:<12} {s['mean']:10.2f} +- {s['stddev']:<8.2f} [{s['min']}, {s['max']}]")
    if variant == ADS:
        lines.append("learn_resets / (k*n):")
        for model, ratio, outside in ratio_report(rows):
            lines.append(f"  {model:<24} {ratio:6.2f}{'  outside [1,4]' if outside else ''}")
    return "\n".join(lines) + "\n"


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="learn", description="Learn Mealy machines and report query costs.")
    src = ap.add_argument_group("models (at least one)")
    src.add_argument("--model", action="append", default=[], metavar="PATH", help="DOT file of the target machine")
    src.add_argument("--random", action="append", default=[], type=parse_random, metavar="n=N,k=K,p=P",
                     help="generate a random minimal machine")
    ap.add_argument("--variant", choices=[PLAIN, ADS], default=ADS)
    ap.add_argument("--policy", choices=[STRATEGIC, ANY_ORDER], default=STRATEGIC)
    ap.add_argument("--oracle", choices=[EXACT, RANDOM_WALK], default=EXACT)
    ap.add_argument("--extra-states", type=int, default=10)
    ap.add_argument("--infix", type=int, default=10)
    ap.add_argument("--budget", type=int, default=1000, help="tests per random-walk equivalence query")
    ap.add_argument("--max-queries", type=int, default=None, help="abort a run after this many output queries")
    ap.add_argument("--repeats", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--jobs", type=int, default=1, help="worker processes")
    ap.add_argument("--out", default=None, help="metrics file (default: stdout)")
    ap.add_argument("--format", choices=["csv", "json"], default="csv")
    ap.add_argument("--timing", action="store_true", help="fill the wall_time column")
    ap.add_argument("--verbose", action="store_true", help="JSON event per rule application on stderr")
    return ap


def _fail(err: BenchError) -> int:
    print(err.to_json(), file=sys.stderr)
    return err.code


def main(argv=None) -> int:
    logging.basicConfig(level=os.environ.get("APARTLEARN_LOG", "WARNING").upper(),
                        format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    sources = [ModelSource(path=p) for p in args.model] + args.random
    if not sources:
        return _fail(BenchError("usage", "give at least one --model or --random"))
    if args.seed < 0 or args.seed >= 2 ** 64:
        return _fail(BenchError("usage", "seed must fit in an unsigned 64-bit integer"))
    try:
        oracle = EqOracleConfig(args.oracle, args.extra_states, args.infix, args.budget, args.seed)
        spec = ExperimentSpec(sources, args.variant, args.policy, oracle, args.repeats, args.seed,
                              args.out, args.format, args.max_queries, args.timing)
    except ValueError as exc:
        return _fail(BenchError("usage", str(exc)))

    try:
        results = run_experiment(spec, jobs=args.jobs, verbose=args.verbose)
    except BenchError as err:
        return _fail(err)
    rows = [row for row, _ in results]

    text = rows_to_csv(rows) if spec.format == "csv" else rows_to_json(rows)
    if spec.out:
        with open(spec.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
        summary_stream = sys.stdout
    else:
        sys.stdout.write(text)
        summary_stream = sys.stderr
    summary_stream.write(format_summary(rows, spec.variant))

    failed = [r for r in rows if not r.success]
    if failed:
        return _fail(BenchError("learning-failed", f"{len(failed)} run(s) did not learn the target",
                                code=1, models=sorted({r.model for r in failed})))
    for row, m_max in results:
        bound = resets_ceiling(row.n, row.k, m_max)
        if row.learn_resets > bound:
            return _fail(BenchError("ceiling-exceeded", f"{row.model}: {row.learn_resets} resets > {bound:.1f}",
                                    code=4, model=row.model))
    return 0


if __name__ == "__main__":
    sys.exit(main())
