"""Command-line front end: split, run, merge, stats, eval, check.

Diagnostics go to stderr; machine-readable output goes to stdout or to
files inside the working directory.  Exit status 0 means the requested
artifact was produced; budget overruns exit with 2 to stay distinguishable
from parse and validation failures (exit 1).
"""

from __future__ import annotations

import argparse
import csv
import re
import shlex
import subprocess
import sys
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path

from . import qdimacs
from .errors import BudgetExceededError, IntsplitsError
from .evaluator import EvalBudget, check_correctness, evaluate, evaluate_with_intsplits
from .formula import Formula
from .merger import (
    ResultCode,
    TIME_MODELS,
    format_flat_report,
    ingest,
    merge,
    render_certificate,
    speedup_report,
)
from .splitter import (
    MANIFEST_NAME,
    SplitMode,
    SplitPlan,
    count_subproblems,
    count_without_intsplits,
    plan,
    read_manifest,
    split_formula,
    verify_manifest,
)

RESULTS_NAME = "results.csv"
_INDEX_PREFIX = re.compile(r"^(\d+)-")


def _say(message: str) -> None:
    print(message, file=sys.stderr)


def _load(args: argparse.Namespace) -> Formula:
    return qdimacs.parse_file(args.formula, strict=getattr(args, "strict", False))


def _mode(args: argparse.Namespace) -> SplitMode:
    return SplitMode.PLAIN if args.no_intsplits else SplitMode.INTSPLIT


def _annotation_table(formula: Formula) -> str:
    if not formula.annotations:
        return "(no annotations)"
    header = ("#", "kind", "width", "s", "u", "eta", "variables")
    rows = [
        (
            str(at),
            aq.kind.value,
            str(aq.width),
            str(aq.s),
            str(aq.u),
            str(aq.eta),
            "[" + " ".join(str(v) for v in aq.bitvector.variables) + "]",
        )
        for at, aq in enumerate(formula.annotations, start=1)
    ]
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) for i in range(len(header))]
    lines = [header] + rows
    return "\n".join(
        "  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip()
        for line in lines
    )


def _plan_summary(split_plan: SplitPlan) -> str:
    with_count = count_subproblems(split_plan)
    without_count = count_without_intsplits(split_plan)
    return (
        f"mode={split_plan.mode.value} requested_depth={split_plan.requested_depth} "
        f"effective_depth={split_plan.effective_depth}\n"
        f"subproblems: with={with_count} without={without_count} "
        f"ratio={with_count / without_count:.4f}"
    )


def cmd_split(args: argparse.Namespace) -> int:
    formula = _load(args)
    split_plan = plan(formula, args.depth, _mode(args))
    out_dir = Path(args.out)
    paths = split_formula(formula, split_plan, out_dir, Path(args.formula).name, args.force)
    _say(_annotation_table(formula))
    _say(_plan_summary(split_plan))
    if split_plan.effective_depth < split_plan.requested_depth:
        _say(
            f"note: effective depth {split_plan.effective_depth} is below the "
            f"requested {split_plan.requested_depth}"
        )
    _say(f"wrote {len(paths)} sub-problems and {MANIFEST_NAME} to {out_dir}")
    return 0


def _builtin_task(path: Path, timeout: float, strict: bool) -> tuple[str, float]:
    started = time.monotonic()
    budget = EvalBudget(deadline=started + timeout)
    try:
        value = evaluate(qdimacs.parse_file(path, strict=strict), budget)
    except (IntsplitsError, OSError):
        elapsed = time.monotonic() - started
        return ResultCode.UNKNOWN.name, timeout if elapsed >= timeout else elapsed
    return (ResultCode.TRUE if value else ResultCode.FALSE).name, time.monotonic() - started


def _external_task(template: str, path: Path, timeout: float) -> tuple[str, float]:
    command = [token.replace("{file}", str(path)) for token in shlex.split(template)]
    started = time.monotonic()
    try:
        proc = subprocess.run(command, capture_output=True, timeout=timeout)
    except subprocess.TimeoutExpired:
        return ResultCode.UNKNOWN.name, timeout
    except OSError:
        return ResultCode.UNKNOWN.name, time.monotonic() - started
    elapsed = time.monotonic() - started
    if proc.returncode == 10:
        return ResultCode.TRUE.name, elapsed
    if proc.returncode == 20:
        return ResultCode.FALSE.name, elapsed
    return ResultCode.UNKNOWN.name, elapsed


def _subproblem_files(directory: Path) -> dict[int, Path]:
    files: dict[int, Path] = {}
    for path in sorted(directory.iterdir()):
        match = _INDEX_PREFIX.match(path.name)
        if not match or not path.is_file() or path.suffix == ".log":
            continue
        index = int(match.group(1))
        if index in files:
            raise IntsplitsError(
                f"two sub-problem files share index {index}: {files[index].name} "
                f"and {path.name}; keep one split per directory"
            )
        files[index] = path
    return files


def _existing_results(path: Path) -> set[int]:
    done: set[int] = set()
    if not path.exists():
        return done
    with path.open() as handle:
        for line in handle:
            first = line.split(",", 1)[0].strip()
            if first.isdigit():
                done.add(int(first))
    return done


def cmd_run(args: argparse.Namespace) -> int:
    directory = Path(args.dir)
    manifest = read_manifest(directory / MANIFEST_NAME)
    files = _subproblem_files(directory)
    results_path = directory / RESULTS_NAME
    done = _existing_results(results_path)
    pending = [entry.index for entry in manifest if entry.index not in done]
    if done:
        _say(f"resuming: {len(done)} results present, {len(pending)} tasks left")

    def task(index: int) -> tuple[int, str, float]:
        path = files.get(index)
        if path is None:
            return index, ResultCode.UNKNOWN.name, 0.0
        if args.solver:
            code, seconds = _external_task(args.solver, path, args.timeout)
        else:
            code, seconds = _builtin_task(path, args.timeout, args.strict)
        return index, code, seconds

    fresh = not results_path.exists()
    unknown = 0
    with results_path.open("a", newline="") as handle:
        writer = csv.writer(handle)
        if fresh:
            writer.writerow(["index", "result", "time_seconds"])
        with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
            futures = [pool.submit(task, index) for index in pending]
            for future in as_completed(futures):
                index, code, seconds = future.result()
                writer.writerow([index, code, f"{seconds:.6f}"])
                if code == ResultCode.UNKNOWN.name:
                    unknown += 1
    _say(f"ran {len(pending)} tasks ({unknown} unknown), results in {results_path}")
    return 0


def cmd_merge(args: argparse.Namespace) -> int:
    formula = _load(args)
    directory = Path(args.dir)
    manifest = read_manifest(directory / MANIFEST_NAME)
    if not manifest:
        raise IntsplitsError(f"{directory / MANIFEST_NAME} lists no sub-problems")
    depth = args.depth if args.depth is not None else len(manifest[0].pairs)
    split_plan = plan(formula, depth, _mode(args))
    verify_manifest(split_plan, manifest)
    source = Path(args.results) if args.results else directory / RESULTS_NAME
    table = ingest(source, split_plan)
    final, report = merge(table, args.time_model)
    summary = speedup_report(table, args.sequential_time, args.time_model)

    (directory / "certificate.txt").write_text(render_certificate(report))
    (directory / "merge_report.txt").write_text(format_flat_report(summary))
    sys.stdout.write(format_flat_report(summary))
    _say(f"verdict {final.code.name} after folding {len(report.reductions)} levels")
    _say(f"certificate.txt and merge_report.txt written to {directory}")
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    formula = _load(args)
    print(_annotation_table(formula))
    if args.depth is not None:
        split_plan = plan(formula, args.depth, _mode(args))
        print(_plan_summary(split_plan))
        selected = " ".join(
            "[" + " ".join(str(v) for v in aq.bitvector.variables) + "]"
            for aq in split_plan.quantifiers
        )
        print(f"selected: {selected}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    formula = _load(args)
    value = (
        evaluate_with_intsplits(formula) if args.intsplits else evaluate(formula)
    )
    print("TRUE" if value else "FALSE")
    return 0


def cmd_check(args: argparse.Namespace) -> int:
    verdict = check_correctness(_load(args))
    print(str(verdict))
    return 0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="intsplits",
        description=(
            "Split (Q)DIMACS formulas with integer-range annotations into "
            "divide-and-conquer sub-problems, run them, and merge results."
        ),
    )
    commands = parser.add_subparsers(dest="command", required=True)

    def common(sub: argparse.ArgumentParser) -> None:
        sub.add_argument("--strict", action="store_true", help="reject comments after the problem line")

    split = commands.add_parser("split", help="expand a formula into sub-problem files")
    split.add_argument("formula")
    split.add_argument("--depth", type=int, required=True, help="upper bound on expanded variables")
    split.add_argument("--no-intsplits", action="store_true", help="plain variable-by-variable split")
    split.add_argument("--out", default=".", help="output directory (default: current)")
    split.add_argument("--force", action="store_true", help="overwrite existing sub-problem files")
    common(split)
    split.set_defaults(func=cmd_split)

    run = commands.add_parser("run", help="solve every sub-problem in a split directory")
    run.add_argument("dir")
    run.add_argument("--jobs", type=int, default=1, help="concurrent tasks (default: 1)")
    run.add_argument("--timeout", type=float, default=60.0, help="per-task seconds (default: 60)")
    run.add_argument(
        "--solver",
        help="external solver command template with a {file} placeholder; "
        "exit 10 means true, 20 means false (default: built-in evaluator)",
    )
    common(run)
    run.set_defaults(func=cmd_run)

    merge_cmd = commands.add_parser("merge", help="reduce results to the final verdict")
    merge_cmd.add_argument("formula")
    merge_cmd.add_argument("dir")
    merge_cmd.add_argument("--depth", type=int, help="split depth (default: from plan.csv)")
    merge_cmd.add_argument("--no-intsplits", action="store_true", help="directory was split in plain mode")
    merge_cmd.add_argument("--results", help="results CSV or log directory (default: <dir>/results.csv)")
    merge_cmd.add_argument("--time-model", choices=TIME_MODELS, default="paper")
    merge_cmd.add_argument("--sequential-time", type=float, help="reference time for the speed-up row")
    common(merge_cmd)
    merge_cmd.set_defaults(func=cmd_merge)

    stats = commands.add_parser("stats", help="annotation table and optional plan preview")
    stats.add_argument("formula")
    stats.add_argument("--depth", type=int, help="preview the plan for this depth")
    stats.add_argument("--no-intsplits", action="store_true")
    common(stats)
    stats.set_defaults(func=cmd_stats)

    eval_cmd = commands.add_parser("eval", help="brute-force truth value")
    eval_cmd.add_argument("formula")
    eval_cmd.add_argument(
        "--intsplits", action="store_true", help="use bounded-quantifier semantics"
    )
    common(eval_cmd)
    eval_cmd.set_defaults(func=cmd_eval)

    check = commands.add_parser("check", help="compare bounded and unbounded semantics")
    check.add_argument("formula")
    common(check)
    check.set_defaults(func=cmd_check)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceededError as exc:
        _say(f"budget exceeded: {exc}")
        return 2
    except IntsplitsError as exc:
        _say(f"error: {exc}")
        return 1
    except FileExistsError as exc:
        _say(f"error: {exc}")
        return 1
    except OSError as exc:
        _say(f"io error: {exc}")
        return 1


if __name__ == "__main__":
    sys.exit(main())
