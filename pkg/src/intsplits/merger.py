"""Reduce per-sub-problem results level by level to the final verdict.

The innermost expanded quantifier is folded first: its accounted expansions
form consecutive groups (the enumeration is lexicographic), every group of
size s collapses to one tuple, and the process repeats outward until a
single tuple remains.  Existential levels take the maximal result code and
the minimal time, universal levels the minimal result code and the maximal
time, so the final time is the wall clock of a virtual parallel solver with
one processor per sub-problem.

Result codes are ordered FALSE < UNKNOWN < TRUE, the unique order for which
the max/min rule stays sound in the presence of timeouts: one true branch
settles an existential level no matter how many siblings timed out, one
false branch settles a universal level.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import IntEnum
from pathlib import Path
from typing import Iterator, Sequence

from .errors import (
    DuplicateResultError,
    MergeError,
    MissingResultError,
    UnparsableRowError,
)
from .formula import QuantifierKind
from .splitter import SplitPlan, count_subproblems, count_without_intsplits

__all__ = [
    "ResultCode",
    "ResultTuple",
    "ResultTable",
    "TIME_MODELS",
    "parse_result_token",
    "ingest",
    "reduce_level",
    "merge",
    "MergeReport",
    "speedup_report",
    "format_flat_report",
    "render_certificate",
]

TIME_MODELS = ("paper", "refined")

_LOG_LINE = re.compile(r"RESULT\s+(\S+)\s+TIME\s+(\S+)\s*$")
_INDEX_PREFIX = re.compile(r"^(\d+)-")


class ResultCode(IntEnum):
    FALSE = 0
    UNKNOWN = 1
    TRUE = 2


_RESULT_TOKENS = {
    "SAT": ResultCode.TRUE,
    "TRUE": ResultCode.TRUE,
    "10": ResultCode.TRUE,
    "UNSAT": ResultCode.FALSE,
    "FALSE": ResultCode.FALSE,
    "20": ResultCode.FALSE,
    "UNKNOWN": ResultCode.UNKNOWN,
    "TIMEOUT": ResultCode.UNKNOWN,
    "0": ResultCode.UNKNOWN,
}


def parse_result_token(token: str) -> ResultCode:
    """Accepts SAT/TRUE/10, UNSAT/FALSE/20 and UNKNOWN/TIMEOUT/0."""
    try:
        return _RESULT_TOKENS[token.strip().upper()]
    except KeyError:
        raise UnparsableRowError(f"unknown result token {token!r}") from None


@dataclass(frozen=True)
class ResultTuple:
    """Result code plus runtime in seconds; timeouts carry their budget."""

    code: ResultCode
    time: float

    def __post_init__(self) -> None:
        if not math.isfinite(self.time) or self.time < 0:
            raise MergeError(f"runtimes must be finite and non-negative, got {self.time}")


@dataclass(frozen=True)
class ResultTable:
    """One result tuple per planned sub-problem, in index order."""

    plan: SplitPlan
    tuples: tuple[ResultTuple, ...]

    def __post_init__(self) -> None:
        expected = count_subproblems(self.plan)
        if len(self.tuples) != expected:
            raise MergeError(
                f"result table has {len(self.tuples)} entries, plan yields {expected}"
            )


def _rows_from_csv(path: Path) -> Iterator[tuple[str, int, ResultTuple]]:
    with path.open() as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line or line.startswith("#") or line.lower().startswith("index"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if len(parts) != 3:
                raise UnparsableRowError(
                    f"{path}: line {line_no}: expected 'index,result,time_seconds'"
                )
            where = f"{path}: line {line_no}"
            try:
                index = int(parts[0])
            except ValueError:
                raise UnparsableRowError(f"{where}: bad index {parts[0]!r}") from None
            code = _parse_token_at(parts[1], where)
            seconds = _parse_time_at(parts[2], where)
            yield where, index, ResultTuple(code, seconds)


def _parse_token_at(token: str, where: str) -> ResultCode:
    try:
        return parse_result_token(token)
    except UnparsableRowError as exc:
        raise UnparsableRowError(f"{where}: {exc}") from None


def _parse_time_at(token: str, where: str) -> float:
    try:
        seconds = float(token)
    except ValueError:
        raise UnparsableRowError(f"{where}: bad time {token!r}") from None
    if not math.isfinite(seconds) or seconds < 0:
        raise UnparsableRowError(f"{where}: time must be finite and non-negative")
    return seconds


def _rows_from_logs(directory: Path) -> Iterator[tuple[str, int, ResultTuple]]:
    # One log file per sub-problem, named like the sub-problem itself plus
    # any suffix; the last non-empty line must be `RESULT <code> TIME <s>`.
    for path in sorted(directory.iterdir()):
        match = _INDEX_PREFIX.match(path.name)
        if not match or not path.is_file():
            continue
        index = int(match.group(1))
        last = ""
        for line in path.read_text().splitlines():
            if line.strip():
                last = line.strip()
        found = _LOG_LINE.search(last)
        if not found:
            raise UnparsableRowError(
                f"{path}: last line is not 'RESULT <code> TIME <seconds>'"
            )
        code = _parse_token_at(found.group(1), str(path))
        seconds = _parse_time_at(found.group(2), str(path))
        yield str(path), index, ResultTuple(code, seconds)


def ingest(source: str | Path, plan: SplitPlan) -> ResultTable:
    """Read results from a CSV file or a directory of per-task logs."""
    source = Path(source)
    rows = _rows_from_logs(source) if source.is_dir() else _rows_from_csv(source)
    total = count_subproblems(plan)
    seen: dict[int, ResultTuple] = {}
    for where, index, result in rows:
        if not 0 <= index < total:
            raise UnparsableRowError(f"{where}: index {index} outside the plan (0..{total - 1})")
        if index in seen:
            raise DuplicateResultError(f"{where}: duplicate result for index {index}")
        seen[index] = result
    missing = [i for i in range(total) if i not in seen]
    if missing:
        shown = ", ".join(map(str, missing[:20]))
        more = "" if len(missing) <= 20 else f" (and {len(missing) - 20} more)"
        raise MissingResultError(f"missing results for indices: {shown}{more}")
    return ResultTable(plan, tuple(seen[i] for i in range(total)))


def _reduce_group(
    group: Sequence[ResultTuple], kind: QuantifierKind, time_model: str
) -> ResultTuple:
    codes = [t.code for t in group]
    times = [t.time for t in group]
    if kind is QuantifierKind.EXISTS:
        code = max(codes)
        if time_model == "paper":
            seconds = min(times)
        else:
            # A parallel machine can stop at the earliest true branch; any
            # other outcome needs every branch to finish.
            winners = [t.time for t in group if t.code is ResultCode.TRUE]
            seconds = min(winners) if code is ResultCode.TRUE else max(times)
    else:
        code = min(codes)
        if time_model == "paper":
            seconds = max(times)
        else:
            winners = [t.time for t in group if t.code is ResultCode.FALSE]
            seconds = min(winners) if code is ResultCode.FALSE else max(times)
    return ResultTuple(code, seconds)


def reduce_level(
    tuples: Sequence[ResultTuple],
    kind: QuantifierKind,
    group_size: int,
    time_model: str = "paper",
) -> list[ResultTuple]:
    """Collapse consecutive groups of `group_size` tuples into one each."""
    if time_model not in TIME_MODELS:
        raise ValueError(f"time model must be one of {TIME_MODELS}")
    if group_size < 1 or len(tuples) % group_size:
        raise MergeError(
            f"{len(tuples)} tuples cannot be grouped by {group_size}; "
            f"results do not match the plan"
        )
    return [
        _reduce_group(tuples[at : at + group_size], kind, time_model)
        for at in range(0, len(tuples), group_size)
    ]


@dataclass(frozen=True)
class MergeReport:
    """Certificate of the reduction: every intermediate level of tuples.

    levels[0] holds the leaves in index order; each following level is the
    result of folding the innermost remaining quantifier; levels[-1] is the
    final verdict alone.  reductions[i] records the quantifier kind and
    group size applied between level i and i+1.
    """

    levels: tuple[tuple[ResultTuple, ...], ...]
    reductions: tuple[tuple[QuantifierKind, int], ...]
    time_model: str

    @property
    def final(self) -> ResultTuple:
        return self.levels[-1][0]


def merge(table: ResultTable, time_model: str = "paper") -> tuple[ResultTuple, MergeReport]:
    """Fold the result table from the innermost expanded quantifier outward."""
    if time_model not in TIME_MODELS:
        raise ValueError(f"time model must be one of {TIME_MODELS}")
    levels: list[tuple[ResultTuple, ...]] = [table.tuples]
    reductions: list[tuple[QuantifierKind, int]] = []
    current: Sequence[ResultTuple] = table.tuples
    for aq in reversed(table.plan.quantifiers):
        current = reduce_level(current, aq.kind, aq.s, time_model)
        levels.append(tuple(current))
        reductions.append((aq.kind, aq.s))
    if len(current) != 1:
        raise MergeError(f"reduction ended with {len(current)} tuples instead of 1")
    report = MergeReport(tuple(levels), tuple(reductions), time_model)
    return report.final, report


def speedup_report(
    table: ResultTable,
    sequential_time: float | None = None,
    time_model: str = "paper",
) -> dict[str, object]:
    """Flat key/value summary: verdict, times, counts and speed-up.

    The speed-up entry is present only when a sequential reference time is
    given.
    """
    final, _ = merge(table, time_model)
    with_count = count_subproblems(table.plan)
    without_count = count_without_intsplits(table.plan)
    report: dict[str, object] = {
        "final_result": final.code.name,
        "parallel_time_s": final.time,
        "total_cpu_time_s": math.fsum(t.time for t in table.tuples),
        "subproblems_with": with_count,
        "subproblems_without": without_count,
        "ratio": with_count / without_count,
    }
    if sequential_time is not None:
        report["speedup"] = (
            math.inf if final.time == 0 else sequential_time / final.time
        )
    return report


def format_flat_report(report: dict[str, object]) -> str:
    return "\n".join(f"{key}={value}" for key, value in report.items()) + "\n"


def _format_tuple(result: ResultTuple) -> str:
    return f"({result.code.name},{result.time:g})"


def render_certificate(report: MergeReport) -> str:
    """Human-readable account of every reduction step."""
    lines = [f"time model: {report.time_model}"]
    for level, tuples in enumerate(report.levels):
        if level < len(report.reductions):
            kind, size = report.reductions[level]
            if report.time_model == "paper":
                rule = "max result, min time" if kind is QuantifierKind.EXISTS else "min result, max time"
            else:
                rule = "max result, conditional time" if kind is QuantifierKind.EXISTS else "min result, conditional time"
            lines.append(
                f"level {level}: {len(tuples)} tuples, reduced {kind.name} "
                f"in groups of {size} ({rule})"
            )
            for at in range(0, len(tuples), size):
                group = " ".join(_format_tuple(t) for t in tuples[at : at + size])
                lines.append(f"  group {at // size}: {group}")
        else:
            lines.append(f"level {level}: final {_format_tuple(tuples[0])}")
    return "\n".join(lines) + "\n"
