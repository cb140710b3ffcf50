"""Reader and writer for (Q)DIMACS with comment-based integer-range
annotations.

Annotation lines live in the preamble, before the problem line, and start
with the token ``cs`` so that any legacy tool skipping ``c`` lines keeps
accepting the file.  Examples:

    cs int [1 2 3 4 5] <19      explicit five-bit vector, values below 19
    cs int <19                  same, variables taken from the prefix
    cs int [4 5] <3;={10 11}    several constraints, satisfying any one counts

Variable lists in brackets must stay within one quantifier block and claim
prefix variables from the front, block by block; inside a block the order
is free.  Without brackets, the next ceil(log2 s) unclaimed variables of
the current block are used, which requires the accounted-expansion count s
to be derivable from the constraints alone.  Prefix-free DIMACS files must
spell out every variable list.

Lenient parsing (the default) skips comments and blank lines after the
problem line; strict mode rejects them.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import (
    AmbiguousImplicitError,
    BlockMismatchError,
    DimacsModeViolationError,
    FormulaError,
    InvalidAnnotationError,
    MalformedHeaderError,
    ParseError,
    PatternWidthMismatchError,
    UnknownVariableError,
)
from .formula import (
    AnnotatedQuantifier,
    AnnotationCursor,
    BitVectorVar,
    Clause,
    Constraint,
    Formula,
    Greater,
    InSet,
    Less,
    Matrix,
    QuantifierBlock,
    QuantifierKind,
    integer_value,
)

__all__ = ["SourceDocument", "RawSplit", "scan", "parse", "parse_file", "write", "write_file"]

_INT32_MAX = 2**31 - 1
_MAX_PATTERN_BITS = 32


@dataclass(frozen=True)
class RawSplit:
    """One ``cs`` line as found in the file, before prefix resolution."""

    line_no: int
    variables: tuple[int, ...] | None  # None when the bracket list is omitted
    constraints: tuple[Constraint, ...]


@dataclass(frozen=True)
class SourceDocument:
    """Syntactic skeleton of one (Q)DIMACS file.

    Splits appear only in the preamble and the clause count always matches
    the header; both are enforced while scanning.
    """

    variable_count: int
    clause_count: int
    comments: tuple[str, ...]
    splits: tuple[RawSplit, ...]
    prefix_rows: tuple[tuple[int, QuantifierKind, tuple[int, ...]], ...]
    clause_rows: tuple[tuple[int, tuple[int, ...]], ...]


def _pnum(token: str, line_no: int, what: str = "variable") -> int:
    try:
        value = int(token)
    except ValueError:
        raise ParseError(f"line {line_no}: expected a positive integer {what}, got {token!r}") from None
    if not 1 <= value <= _INT32_MAX:
        raise ParseError(
            f"line {line_no}: {what} {value} outside the accepted 32-bit range"
        )
    return value


def _parse_header(line: str, line_no: int) -> tuple[int, int]:
    tokens = line.split()
    if len(tokens) != 4 or tokens[0] != "p" or tokens[1] != "cnf":
        raise MalformedHeaderError(f"line {line_no}: malformed problem line {line!r}")
    try:
        variables, clauses = int(tokens[2]), int(tokens[3])
    except ValueError:
        raise MalformedHeaderError(f"line {line_no}: non-numeric counts in {line!r}") from None
    if variables < 0 or clauses < 0 or variables > _INT32_MAX:
        raise MalformedHeaderError(f"line {line_no}: counts out of range in {line!r}")
    return variables, clauses


def _parse_split(line: str, line_no: int) -> RawSplit:
    # Brackets, braces and semicolons may be glued to their neighbours;
    # commas inside pattern sets are treated as plain whitespace.
    text = line[2:]
    for ch in "[]{};":
        text = text.replace(ch, f" {ch} ")
    tokens = text.replace(",", " ").split()
    if not tokens or tokens[0] != "int":
        raise ParseError(f"line {line_no}: unsupported annotation, expected 'cs int ...'")
    i = 1
    variables: tuple[int, ...] | None = None
    if i < len(tokens) and tokens[i] == "[":
        i += 1
        listed: list[int] = []
        while i < len(tokens) and tokens[i] != "]":
            listed.append(_pnum(tokens[i], line_no))
            i += 1
        if i >= len(tokens):
            raise ParseError(f"line {line_no}: unterminated '[' in annotation")
        if not listed:
            raise ParseError(f"line {line_no}: empty variable list '[]'")
        i += 1
        variables = tuple(listed)

    constraints: list[Constraint] = []
    while i < len(tokens):
        token = tokens[i]
        if token == ";":
            i += 1
            continue
        if token.startswith("<") or token.startswith(">"):
            rest = token[1:]
            if not rest:
                i += 1
                if i >= len(tokens):
                    raise ParseError(f"line {line_no}: bound missing after {token!r}")
                rest = tokens[i]
            bound = _pnum(rest, line_no, "bound")
            constraints.append(Less(bound) if token[0] == "<" else Greater(bound))
            i += 1
        elif token == "=":
            i += 1
            if i >= len(tokens) or tokens[i] != "{":
                raise ParseError(f"line {line_no}: expected '{{' after '='")
            i += 1
            patterns: list[tuple[int, ...]] = []
            while i < len(tokens) and tokens[i] != "}":
                if tokens[i] == ";":  # tolerated as a separator inside braces
                    i += 1
                    continue
                pattern = tokens[i]
                if not pattern or any(ch not in "01" for ch in pattern):
                    raise ParseError(f"line {line_no}: bit pattern {pattern!r} must be 0/1 only")
                if len(pattern) > _MAX_PATTERN_BITS:
                    raise ParseError(
                        f"line {line_no}: bit pattern longer than {_MAX_PATTERN_BITS} bits"
                    )
                patterns.append(tuple(int(ch) for ch in pattern))
                i += 1
            if i >= len(tokens):
                raise ParseError(f"line {line_no}: unterminated '{{' in annotation")
            if not patterns:
                raise ParseError(f"line {line_no}: empty pattern set '={{}}'")
            i += 1
            constraints.append(InSet(frozenset(patterns)))
        else:
            raise ParseError(f"line {line_no}: unrecognized constraint token {token!r}")
    if not constraints:
        raise ParseError(f"line {line_no}: annotation carries no constraints")
    return RawSplit(line_no, variables, tuple(constraints))


def _parse_clause(line: str, line_no: int) -> tuple[int, ...]:
    values: list[int] = []
    for token in line.split():
        try:
            value = int(token)
        except ValueError:
            raise ParseError(f"line {line_no}: clause token {token!r} is not an integer") from None
        if abs(value) > _INT32_MAX:
            raise ParseError(f"line {line_no}: literal {value} outside the 32-bit range")
        values.append(value)
    if not values or values[-1] != 0:
        raise ParseError(f"line {line_no}: clause lines must end with 0")
    body = values[:-1]
    if 0 in body:
        raise ParseError(f"line {line_no}: embedded 0; one clause per line")
    return tuple(body)


def scan(text: str, strict: bool = False) -> SourceDocument:
    """First pass: split the file into header, comments, annotations,
    prefix rows and clause rows, checking purely syntactic rules."""
    comments: list[str] = []
    splits: list[RawSplit] = []
    header: tuple[int, int] | None = None
    prefix_rows: list[tuple[int, QuantifierKind, tuple[int, ...]]] = []
    clause_rows: list[tuple[int, tuple[int, ...]]] = []

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line:
            if strict:
                raise ParseError(f"line {line_no}: blank lines are not allowed in strict mode")
            continue
        token = line.split(maxsplit=1)[0]
        if header is None:
            if token == "cs":
                splits.append(_parse_split(line, line_no))
            elif line.startswith("c"):
                comments.append(line[1:].strip())
            elif token == "p":
                header = _parse_header(line, line_no)
            else:
                raise MalformedHeaderError(
                    f"line {line_no}: expected comments, annotations or the problem "
                    f"line, got {line!r}"
                )
        else:
            if token == "cs":
                raise ParseError(
                    f"line {line_no}: annotations must appear before the problem line"
                )
            if line.startswith("c"):
                if strict:
                    raise ParseError(
                        f"line {line_no}: comment after the problem line (strict mode)"
                    )
                continue
            if token in ("e", "a"):
                if clause_rows:
                    raise ParseError(
                        f"line {line_no}: quantifier line after the first clause; "
                        f"the prefix must precede the matrix"
                    )
                tokens = line.split()
                if len(tokens) < 3 or tokens[-1] != "0":
                    raise ParseError(
                        f"line {line_no}: quantifier lines are '<e|a> <var>+ 0'"
                    )
                variables = tuple(_pnum(t, line_no) for t in tokens[1:-1])
                kind = QuantifierKind.EXISTS if token == "e" else QuantifierKind.FORALL
                prefix_rows.append((line_no, kind, variables))
            else:
                clause_rows.append((line_no, _parse_clause(line, line_no)))

    if header is None:
        raise MalformedHeaderError("problem line 'p cnf <vars> <clauses>' not found")
    variable_count, clause_count = header
    if len(clause_rows) != clause_count:
        raise MalformedHeaderError(
            f"header declares {clause_count} clauses, file contains {len(clause_rows)}"
        )
    return SourceDocument(
        variable_count,
        clause_count,
        tuple(comments),
        tuple(splits),
        tuple(prefix_rows),
        tuple(clause_rows),
    )


def _implicit_width(split: RawSplit) -> int:
    """Bit-vector width for an annotation without an explicit variable list."""
    pattern_widths = {
        len(p) for c in split.constraints if isinstance(c, InSet) for p in c.patterns
    }
    if pattern_widths:
        if len(pattern_widths) > 1:
            raise PatternWidthMismatchError(
                f"line {split.line_no}: patterns of different lengths; width is ambiguous"
            )
        return pattern_widths.pop()
    if any(isinstance(c, Greater) for c in split.constraints):
        raise AmbiguousImplicitError(
            f"line {split.line_no}: the accounted count of '>' depends on the "
            f"bit-vector width; list the variables explicitly"
        )
    # All-'<' list: s equals the largest bound, width is ceil(log2 s).
    s = max(c.bound for c in split.constraints if isinstance(c, Less))
    if s < 2:
        raise AmbiguousImplicitError(
            f"line {split.line_no}: bound <{s} resolves to an empty bit-vector; "
            f"list the variables explicitly"
        )
    return (s - 1).bit_length()


def _normalize_clause(body: tuple[int, ...]) -> Clause:
    # Duplicate literals are dropped (first occurrence wins); tautologies
    # such as (x or not x) are kept verbatim for round-trip fidelity.
    seen: set[int] = set()
    kept: list[int] = []
    for value in body:
        if value not in seen:
            seen.add(value)
            kept.append(value)
    return Clause.from_ints(kept)


def _build(doc: SourceDocument) -> Formula:
    for line_no, body in doc.clause_rows:
        for value in body:
            if abs(value) > doc.variable_count:
                raise UnknownVariableError(
                    f"line {line_no}: clause references variable {abs(value)} beyond "
                    f"declared count {doc.variable_count}"
                )
    matrix = Matrix(
        tuple(_normalize_clause(body) for _, body in doc.clause_rows),
        doc.variable_count,
    )

    # Merge consecutive rows of the same kind into one block.
    blocks: list[QuantifierBlock] = []
    seen_vars: set[int] = set()
    for line_no, kind, variables in doc.prefix_rows:
        for v in variables:
            if v > doc.variable_count:
                raise UnknownVariableError(
                    f"line {line_no}: quantified variable {v} beyond declared "
                    f"count {doc.variable_count}"
                )
            if v in seen_vars:
                raise ParseError(f"line {line_no}: variable {v} quantified twice")
            seen_vars.add(v)
        if blocks and blocks[-1].kind is kind:
            blocks[-1] = QuantifierBlock(kind, blocks[-1].variables + variables)
        else:
            blocks.append(QuantifierBlock(kind, variables))

    annotations: list[AnnotatedQuantifier] = []
    if blocks:
        cursor = AnnotationCursor(blocks)
        for split in doc.splits:
            if split.variables is not None:
                for v in split.variables:
                    if v > doc.variable_count:
                        raise UnknownVariableError(
                            f"line {split.line_no}: annotated variable {v} beyond "
                            f"declared count {doc.variable_count}"
                        )
                try:
                    bitvector = BitVectorVar(split.variables)
                    kind = cursor.place(bitvector.variables)
                except (BlockMismatchError, FormulaError) as exc:
                    raise type(exc)(f"line {split.line_no}: {exc}") from None
            else:
                width = _implicit_width(split)
                try:
                    variables, kind = cursor.take(width)
                except BlockMismatchError as exc:
                    raise BlockMismatchError(f"line {split.line_no}: {exc}") from None
                bitvector = BitVectorVar(variables)
            try:
                annotations.append(AnnotatedQuantifier(kind, bitvector, split.constraints))
            except (InvalidAnnotationError, PatternWidthMismatchError) as exc:
                raise type(exc)(f"line {split.line_no}: {exc}") from None
    else:
        for split in doc.splits:
            if split.variables is None:
                raise DimacsModeViolationError(
                    f"line {split.line_no}: implicit variable lists need a quantifier "
                    f"prefix; prefix-free files must list all bit-vector variables"
                )
            for v in split.variables:
                if v > doc.variable_count:
                    raise UnknownVariableError(
                        f"line {split.line_no}: annotated variable {v} beyond "
                        f"declared count {doc.variable_count}"
                    )
            try:
                annotations.append(
                    AnnotatedQuantifier(
                        QuantifierKind.EXISTS, BitVectorVar(split.variables), split.constraints
                    )
                )
            except (InvalidAnnotationError, PatternWidthMismatchError, FormulaError) as exc:
                raise type(exc)(f"line {split.line_no}: {exc}") from None

    return Formula(matrix, tuple(blocks), tuple(annotations))


def parse(text: str | bytes, strict: bool = False) -> Formula:
    """Parse one (Q)DIMACS document into a validated formula."""
    if isinstance(text, bytes):
        text = text.decode("ascii")
    return _build(scan(text, strict))


def parse_file(path: str | Path, strict: bool = False) -> Formula:
    return parse(Path(path).read_text(), strict)


def _format_constraint(constraint: Constraint, width: int) -> str:
    if isinstance(constraint, Less):
        return f"<{constraint.bound}"
    if isinstance(constraint, Greater):
        return f">{constraint.bound}"
    if isinstance(constraint, InSet):
        patterns = sorted(constraint.patterns, key=integer_value)
        return "={" + " ".join("".join(map(str, p)) for p in patterns) + "}"
    # The grammar has no token for "unrestricted"; emit the equivalent
    # full-range bound instead.
    return f"<{1 << width}"


def write(formula: Formula) -> str:
    """Serialize a formula; parsing the output yields an equal formula.

    Variable lists are always written explicitly and lines end with LF.
    """
    lines: list[str] = []
    for aq in formula.annotations:
        variables = " ".join(str(v) for v in aq.bitvector.variables)
        constraints = ";".join(_format_constraint(c, aq.width) for c in aq.constraints)
        lines.append(f"cs int [{variables}] {constraints}")
    lines.append(f"p cnf {formula.matrix.variable_count} {len(formula.matrix.clauses)}")
    for block in formula.prefix:
        lines.append(f"{block.kind.value} {' '.join(str(v) for v in block.variables)} 0")
    for clause in formula.matrix.clauses:
        body = " ".join(str(v) for v in clause.to_ints())
        lines.append(f"{body} 0" if body else "0")
    return "\n".join(lines) + "\n"


def write_file(formula: Formula, path: str | Path) -> Path:
    path = Path(path)
    path.write_text(write(formula))
    return path
