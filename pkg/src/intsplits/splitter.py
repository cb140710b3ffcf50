"""Depth-bounded expansion of annotated quantifiers into sub-problem files.

A split plan selects whole annotated bit-vectors from the front of the
prefix while their total width fits the requested depth; bit-vectors are
never cut.  Within every maximal run of equally quantified annotations the
order is by decreasing pruning efficiency (stable), which is sound because
quantifiers of one kind commute.  Plain mode ignores annotations and takes
the first d prefix variables one by one.

Each accounted assignment becomes one copy of the formula with the decided
values appended as unit clauses.  Assigned variables are re-quantified in a
trailing existential block (a forced universal variable would make the copy
trivially false and would defeat constraint propagation); annotations whose
bit-vector was expanded are dropped, the remaining ones are kept so copies
can be split again.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from enum import Enum
from itertools import groupby
from math import prod
from pathlib import Path
from typing import Iterator, Sequence

from .errors import BlockMismatchError, EmptyPlanError, FormulaError, MergeError
from .formula import (
    AnnotatedQuantifier,
    AnnotationCursor,
    Assignment,
    BitVectorVar,
    Clause,
    Formula,
    Literal,
    Matrix,
    QuantifierBlock,
    QuantifierKind,
    Top,
    accounted_values,
    bits_of,
)
from . import qdimacs

__all__ = [
    "SplitMode",
    "SplitPlan",
    "ExpansionIndex",
    "sorted_annotations",
    "plan",
    "count_subproblems",
    "count_without_intsplits",
    "enumerate_accounted",
    "subproblem_name",
    "expanded_copy",
    "emit_subproblem",
    "split_formula",
    "write_manifest",
    "read_manifest",
    "verify_manifest",
]

MANIFEST_NAME = "plan.csv"


class SplitMode(Enum):
    INTSPLIT = "intsplit"
    PLAIN = "plain"


@dataclass(frozen=True)
class SplitPlan:
    """The quantifiers selected for expansion at a given depth.

    effective_depth is the number of variables actually expanded; it can be
    lower than requested_depth when the next whole bit-vector would not fit
    (or, in plain mode, when the prefix is shorter than the request).
    plain_depth is the depth a plain split would reach with the same
    request, kept for the with/without comparison.
    """

    mode: SplitMode
    quantifiers: tuple[AnnotatedQuantifier, ...]
    requested_depth: int
    effective_depth: int
    plain_depth: int

    @property
    def variables(self) -> tuple[int, ...]:
        return tuple(v for aq in self.quantifiers for v in aq.bitvector.variables)


@dataclass(frozen=True)
class ExpansionIndex:
    """One accounted assignment, densely numbered in lexicographic order."""

    index: int
    pairs: tuple[tuple[int, int], ...]  # (variable, bit) in plan order

    @property
    def assignment(self) -> Assignment:
        return dict(self.pairs)


def sorted_annotations(formula: Formula) -> tuple[AnnotatedQuantifier, ...]:
    """Annotations in splitting order: stable decreasing-efficiency sort
    inside each maximal run of the same quantifier kind."""
    ordered: list[AnnotatedQuantifier] = []
    for _, run in groupby(formula.annotations, key=lambda aq: aq.kind):
        ordered.extend(sorted(run, key=lambda aq: aq.eta, reverse=True))
    return tuple(ordered)


def plan(formula: Formula, depth: int, mode: SplitMode = SplitMode.INTSPLIT) -> SplitPlan:
    """Select the quantifiers to expand under the given depth budget."""
    if depth < 1:
        raise ValueError("splitting depth must be at least 1")
    prefix_vars = formula.prefix_variables()
    plain_depth = min(depth, len(prefix_vars))

    if mode is SplitMode.PLAIN:
        chosen = tuple(
            AnnotatedQuantifier(formula.kind_of(v), BitVectorVar((v,)), (Top(),))
            for v in prefix_vars[:plain_depth]
        )
        return SplitPlan(mode, chosen, depth, plain_depth, plain_depth)

    if not formula.annotations:
        raise EmptyPlanError("formula carries no int-split annotations")
    chosen_list: list[AnnotatedQuantifier] = []
    used = 0
    for aq in sorted_annotations(formula):
        if used + aq.width > depth:
            break
        chosen_list.append(aq)
        used += aq.width
    if not chosen_list:
        raise EmptyPlanError(
            f"no annotated quantifier fits within depth {depth}; the first "
            f"bit-vector is {sorted_annotations(formula)[0].width} bits wide"
        )
    return SplitPlan(mode, tuple(chosen_list), depth, used, plain_depth)


def count_subproblems(split_plan: SplitPlan) -> int:
    """Product of the accounted-expansion counts of the selected quantifiers."""
    return prod(aq.s for aq in split_plan.quantifiers)


def count_without_intsplits(split_plan: SplitPlan) -> int:
    """Sub-problems a plain split produces for the same depth request."""
    return 1 << split_plan.plain_depth


def enumerate_accounted(split_plan: SplitPlan) -> Iterator[ExpansionIndex]:
    """All accounted assignments, lexicographic over the concatenated
    bit-vectors in plan order (MSB first, last vector varies fastest)."""
    quantifiers = split_plan.quantifiers
    value_seqs = [accounted_values(aq) for aq in quantifiers]
    var_groups = [aq.bitvector.variables for aq in quantifiers]
    counters = [0] * len(quantifiers)
    total = count_subproblems(split_plan)
    for index in range(total):
        pairs: list[tuple[int, int]] = []
        for variables, values, at in zip(var_groups, value_seqs, counters):
            pairs.extend(zip(variables, bits_of(values[at], len(variables))))
        yield ExpansionIndex(index, tuple(pairs))
        for level in range(len(counters) - 1, -1, -1):
            counters[level] += 1
            if counters[level] < len(value_seqs[level]):
                break
            counters[level] = 0


def subproblem_name(index: int, count: int, original_name: str) -> str:
    """Zero-padded index, a dash, then the original file name.

    Padding is wide enough for the largest index (at least four digits), so
    lexicographic file order equals numeric order.
    """
    pad = max(4, len(str(max(count - 1, 0))))
    return f"{index:0{pad}d}-{original_name}"


def _aligned_prefix(
    blocks: Sequence[QuantifierBlock], candidates: Sequence[AnnotatedQuantifier]
) -> tuple[AnnotatedQuantifier, ...]:
    # Keep the longest front-aligned chain; a plain-mode cut through a
    # bit-vector leaves unclaimable variables that invalidate the rest.
    cursor = AnnotationCursor(blocks)
    kept: list[AnnotatedQuantifier] = []
    for aq in candidates:
        try:
            cursor.place(aq.bitvector.variables)
        except (BlockMismatchError, FormulaError):
            break
        kept.append(aq)
    return tuple(kept)


def expanded_copy(formula: Formula, expansion: ExpansionIndex) -> Formula:
    """The sub-problem formula for one accounted assignment."""
    assigned = {v for v, _ in expansion.pairs}
    units = tuple(Clause((Literal(v, bit == 0),)) for v, bit in expansion.pairs)
    matrix = Matrix(formula.matrix.clauses + units, formula.matrix.variable_count)

    blocks: list[QuantifierBlock] = []
    for block in formula.prefix:
        rest = tuple(v for v in block.variables if v not in assigned)
        if rest:
            blocks.append(QuantifierBlock(block.kind, rest))
    if formula.prefix and expansion.pairs:
        blocks.append(
            QuantifierBlock(QuantifierKind.EXISTS, tuple(v for v, _ in expansion.pairs))
        )

    candidates = [
        aq for aq in formula.annotations if not assigned.intersection(aq.bitvector.variables)
    ]
    if formula.prefix:
        annotations = _aligned_prefix(blocks, candidates)
    else:
        annotations = tuple(candidates)
    return Formula(matrix, tuple(blocks), annotations)


def emit_subproblem(
    formula: Formula,
    expansion: ExpansionIndex,
    out_dir: str | Path,
    original_name: str,
    count: int,
    force: bool = False,
) -> Path:
    """Write one sub-problem file; refuses to overwrite unless forced."""
    path = Path(out_dir) / subproblem_name(expansion.index, count, original_name)
    if path.exists() and not force:
        raise FileExistsError(f"{path} already exists (use force to overwrite)")
    path.write_text(qdimacs.write(expanded_copy(formula, expansion)))
    return path


def split_formula(
    formula: Formula,
    split_plan: SplitPlan,
    out_dir: str | Path,
    original_name: str,
    force: bool = False,
) -> list[Path]:
    """Emit every accounted sub-problem plus the plan manifest."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    total = count_subproblems(split_plan)
    paths = [
        emit_subproblem(formula, expansion, out_dir, original_name, total, force)
        for expansion in enumerate_accounted(split_plan)
    ]
    write_manifest(split_plan, out_dir)
    return paths


def write_manifest(split_plan: SplitPlan, out_dir: str | Path) -> Path:
    """plan.csv: one row per sub-problem, `index,var=bit;var=bit;...`."""
    path = Path(out_dir) / MANIFEST_NAME
    with path.open("w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["index", "assignment"])
        for expansion in enumerate_accounted(split_plan):
            writer.writerow(
                [
                    expansion.index,
                    ";".join(f"{v}={bit}" for v, bit in expansion.pairs),
                ]
            )
    return path


def read_manifest(path: str | Path) -> list[ExpansionIndex]:
    entries: list[ExpansionIndex] = []
    with Path(path).open(newline="") as handle:
        for row_no, row in enumerate(csv.reader(handle), start=1):
            if not row or row[0].strip() in ("", "index"):
                continue
            if len(row) != 2:
                raise MergeError(f"{path}: row {row_no} has {len(row)} fields, expected 2")
            try:
                index = int(row[0])
                pairs = []
                if row[1].strip():
                    for item in row[1].split(";"):
                        var, bit = item.split("=")
                        pairs.append((int(var), int(bit)))
            except ValueError:
                raise MergeError(f"{path}: row {row_no} is not a valid plan entry") from None
            entries.append(ExpansionIndex(index, tuple(pairs)))
    return entries


def verify_manifest(split_plan: SplitPlan, entries: Sequence[ExpansionIndex]) -> None:
    """Fail if the manifest does not match the recomputed plan exactly."""
    total = count_subproblems(split_plan)
    if len(entries) != total:
        raise MergeError(
            f"manifest lists {len(entries)} sub-problems but the plan yields {total}"
        )
    for expected, found in zip(enumerate_accounted(split_plan), entries):
        if expected != found:
            raise MergeError(
                f"manifest entry {found.index} does not match the plan "
                f"(expected {expected.pairs}, found {found.pairs}); was the "
                f"directory produced with different split settings?"
            )
