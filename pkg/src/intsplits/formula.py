"""In-memory model of prenex-CNF QBFs with integer-range annotations.

Bit-vectors are most-significant bit first: the first listed variable of a
bit-vector carries the highest place value, so (t1, ..., tn) denotes the
integer 2^(n-1)*t1 + ... + 2^0*tn.  Efficiency ratios are exact fractions;
no floating point enters the model anywhere.

All types are immutable after construction and all operations are pure
functions, so values can be shared between threads without synchronization.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

from .errors import (
    BlockMismatchError,
    FormulaError,
    InvalidAnnotationError,
    PatternWidthMismatchError,
)

__all__ = [
    "ENUMERATION_WIDTH_LIMIT",
    "Assignment",
    "QuantifierKind",
    "Literal",
    "Clause",
    "Matrix",
    "QuantifierBlock",
    "BitVectorVar",
    "Less",
    "Greater",
    "InSet",
    "Top",
    "Constraint",
    "AnnotatedQuantifier",
    "Formula",
    "AnnotationCursor",
    "integer_value",
    "bits_of",
    "constraint_satisfied",
    "ae_count",
    "efficiency",
    "accounted_values",
    "apply_assignment",
]

# Accounted expansions are counted by full enumeration up to this width.
# Beyond it, single-constraint annotations fall back to exact closed forms
# and multi-constraint annotations are rejected (their union would require
# enumerating 2^width values).
ENUMERATION_WIDTH_LIMIT = 20

# Partial map from variable id to 0 or 1.
Assignment = dict[int, int]


class QuantifierKind(Enum):
    EXISTS = "e"
    FORALL = "a"


@dataclass(frozen=True)
class Literal:
    """A possibly negated propositional variable."""

    variable: int
    negated: bool = False

    def __post_init__(self) -> None:
        if self.variable < 1:
            raise FormulaError(f"variable ids start at 1, got {self.variable}")

    @classmethod
    def from_int(cls, value: int) -> "Literal":
        if value == 0:
            raise FormulaError("0 terminates clauses and is not a literal")
        return cls(abs(value), value < 0)

    def to_int(self) -> int:
        return -self.variable if self.negated else self.variable

    def satisfied_by(self, bit: int) -> bool:
        return bool(bit) != self.negated


@dataclass(frozen=True)
class Clause:
    """Disjunction of literals.  The empty clause denotes falsity."""

    literals: tuple[Literal, ...] = ()

    @classmethod
    def from_ints(cls, values: Iterable[int]) -> "Clause":
        return cls(tuple(Literal.from_int(v) for v in values))

    def to_ints(self) -> tuple[int, ...]:
        return tuple(lit.to_int() for lit in self.literals)

    @property
    def is_empty(self) -> bool:
        return not self.literals


@dataclass(frozen=True)
class Matrix:
    """CNF matrix: a conjunction of clauses over variables 1..variable_count."""

    clauses: tuple[Clause, ...]
    variable_count: int

    def __post_init__(self) -> None:
        if self.variable_count < 0:
            raise FormulaError("variable count cannot be negative")
        for clause in self.clauses:
            for lit in clause.literals:
                if lit.variable > self.variable_count:
                    raise FormulaError(
                        f"literal references variable {lit.variable} beyond "
                        f"declared count {self.variable_count}"
                    )

    @classmethod
    def from_ints(cls, clauses: Iterable[Iterable[int]], variable_count: int) -> "Matrix":
        return cls(tuple(Clause.from_ints(c) for c in clauses), variable_count)

    @property
    def has_empty_clause(self) -> bool:
        return any(c.is_empty for c in self.clauses)


@dataclass(frozen=True)
class QuantifierBlock:
    """A maximal run of equally quantified variables in the prefix."""

    kind: QuantifierKind
    variables: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.variables:
            raise FormulaError("quantifier blocks cannot be empty")
        if len(set(self.variables)) != len(self.variables):
            raise FormulaError(f"duplicate variable in quantifier block {self.variables}")
        if min(self.variables) < 1:
            raise FormulaError("variable ids start at 1")


@dataclass(frozen=True)
class BitVectorVar:
    """An ordered group of Boolean variables read as one integer, MSB first."""

    variables: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.variables:
            raise FormulaError("bit-vectors need at least one variable")
        if len(set(self.variables)) != len(self.variables):
            raise FormulaError(f"duplicate variable in bit-vector {self.variables}")
        if min(self.variables) < 1:
            raise FormulaError("variable ids start at 1")

    @property
    def width(self) -> int:
        return len(self.variables)


@dataclass(frozen=True)
class Less:
    """Accounted iff the bit-vector value is strictly below the bound."""

    bound: int

    def __post_init__(self) -> None:
        if self.bound < 1:
            raise FormulaError("constraint bounds are positive integers")


@dataclass(frozen=True)
class Greater:
    """Accounted iff the bit-vector value is strictly above the bound."""

    bound: int

    def __post_init__(self) -> None:
        if self.bound < 1:
            raise FormulaError("constraint bounds are positive integers")


@dataclass(frozen=True)
class InSet:
    """Accounted iff the bit-vector equals one of the listed patterns."""

    patterns: frozenset[tuple[int, ...]]

    def __post_init__(self) -> None:
        if not self.patterns:
            raise FormulaError("pattern sets cannot be empty")
        for pattern in self.patterns:
            if not pattern or any(bit not in (0, 1) for bit in pattern):
                raise FormulaError(f"bit patterns consist of 0/1 only, got {pattern}")

    @classmethod
    def of(cls, *patterns: Sequence[int]) -> "InSet":
        return cls(frozenset(tuple(p) for p in patterns))


@dataclass(frozen=True)
class Top:
    """No restriction; every expansion is accounted."""


Constraint = Less | Greater | InSet | Top


def integer_value(bits: Sequence[int]) -> int:
    """Integer denoted by a bit-vector, most-significant bit first."""
    if not bits:
        raise ValueError("empty bit-vector has no integer value")
    value = 0
    for bit in bits:
        if bit not in (0, 1):
            raise ValueError(f"bits are 0 or 1, got {bit!r}")
        value = (value << 1) | bit
    return value


def bits_of(value: int, width: int) -> tuple[int, ...]:
    """Inverse of integer_value for the given width."""
    if width < 1:
        raise ValueError("width must be at least 1")
    if not 0 <= value < (1 << width):
        raise ValueError(f"value {value} does not fit into {width} bits")
    return tuple((value >> (width - 1 - i)) & 1 for i in range(width))


def _accounted_predicate(constraints: Sequence[Constraint]) -> Callable[[int], bool]:
    """Union of the constraints as a predicate over integer values."""
    tests: list[Callable[[int], bool]] = []
    for c in constraints:
        if isinstance(c, Top):
            return lambda value: True
        if isinstance(c, Less):
            tests.append(lambda value, b=c.bound: value < b)
        elif isinstance(c, Greater):
            tests.append(lambda value, b=c.bound: value > b)
        elif isinstance(c, InSet):
            members = frozenset(integer_value(p) for p in c.patterns)
            tests.append(lambda value, m=members: value in m)
        else:
            raise FormulaError(f"unknown constraint {c!r}")
    return lambda value: any(test(value) for test in tests)


def _count_expansions(width: int, constraints: Sequence[Constraint]) -> tuple[int, int]:
    """Accounted/unaccounted expansion counts for a constraint list.

    Enumerates all 2^width values up to ENUMERATION_WIDTH_LIMIT; beyond that
    only single constraints are supported, via exact closed forms.
    """
    size = 1 << width
    if any(isinstance(c, Top) for c in constraints):
        s = size
    elif width <= ENUMERATION_WIDTH_LIMIT:
        accounted = _accounted_predicate(constraints)
        s = sum(1 for value in range(size) if accounted(value))
    elif len(constraints) == 1:
        c = constraints[0]
        if isinstance(c, Less):
            s = min(c.bound, size)
        elif isinstance(c, Greater):
            s = size - min(c.bound + 1, size)
        else:
            s = len(c.patterns)  # InSet; widths already validated
    else:
        raise InvalidAnnotationError(
            f"cannot combine {len(constraints)} constraints over a {width}-bit "
            f"vector: enumeration is limited to width {ENUMERATION_WIDTH_LIMIT}"
        )
    if s == 0:
        raise InvalidAnnotationError(
            "annotation admits no accounted expansion; remove the quantifier instead"
        )
    return s, size - s


@dataclass(frozen=True)
class AnnotatedQuantifier:
    """A quantifier over a bit-vector together with its constraint list.

    An expansion is accounted as soon as at least one constraint in the list
    is satisfied.  Construction fails if no expansion is accounted.
    """

    kind: QuantifierKind
    bitvector: BitVectorVar
    constraints: tuple[Constraint, ...]

    def __post_init__(self) -> None:
        if not self.constraints:
            raise InvalidAnnotationError("annotated quantifiers need at least one constraint")
        for c in self.constraints:
            if isinstance(c, InSet):
                for pattern in c.patterns:
                    if len(pattern) != self.width:
                        raise PatternWidthMismatchError(
                            f"pattern {''.join(map(str, pattern))} has {len(pattern)} bits, "
                            f"bit-vector {self.bitvector.variables} has width {self.width}"
                        )
        s, u = _count_expansions(self.width, self.constraints)
        object.__setattr__(self, "_expansions", (s, u))

    @property
    def width(self) -> int:
        return self.bitvector.width

    @property
    def s(self) -> int:
        """Number of accounted expansions."""
        return self._expansions[0]  # type: ignore[attr-defined]

    @property
    def u(self) -> int:
        """Number of unaccounted expansions."""
        return self._expansions[1]  # type: ignore[attr-defined]

    @property
    def eta(self) -> Fraction:
        """Pruning efficiency u/s as an exact rational."""
        return Fraction(self.u, self.s)


def constraint_satisfied(aq: AnnotatedQuantifier, bits: Sequence[int]) -> bool:
    """True iff at least one constraint of aq accepts the bit-vector."""
    if len(bits) != aq.width:
        raise ValueError(f"expected {aq.width} bits, got {len(bits)}")
    return _accounted_predicate(aq.constraints)(integer_value(bits))


def ae_count(aq: AnnotatedQuantifier) -> tuple[int, int]:
    """(accounted, unaccounted) expansion counts; their sum is 2^width."""
    return aq.s, aq.u


def efficiency(aq: AnnotatedQuantifier) -> Fraction:
    """Exact u/s ratio used to rank annotations for splitting."""
    return aq.eta


def accounted_values(aq: AnnotatedQuantifier) -> Sequence[int]:
    """Accounted expansions of aq as integer values in increasing order.

    Returns a lazily indexable sequence (a range where possible) of exactly
    aq.s values.
    """
    size = 1 << aq.width
    cs = aq.constraints
    if any(isinstance(c, Top) for c in cs):
        return range(size)
    if len(cs) == 1:
        c = cs[0]
        if isinstance(c, Less):
            return range(min(c.bound, size))
        if isinstance(c, Greater):
            return range(min(c.bound + 1, size), size)
        return sorted(integer_value(p) for p in c.patterns)
    accounted = _accounted_predicate(cs)
    return [value for value in range(size) if accounted(value)]


def apply_assignment(matrix: Matrix, sigma: Mapping[int, int]) -> Matrix:
    """Set variables according to sigma and simplify.

    Clauses with a satisfied literal are dropped, falsified literals are
    removed from the remaining clauses, and clauses emptied this way are
    kept (the matrix stays recognisably false).
    """
    for var, bit in sigma.items():
        if not 1 <= var <= matrix.variable_count:
            raise FormulaError(f"assignment sets unknown variable {var}")
        if bit not in (0, 1):
            raise FormulaError(f"assignment values are 0 or 1, got {bit!r}")
    new_clauses = []
    for clause in matrix.clauses:
        kept: list[Literal] = []
        satisfied = False
        for lit in clause.literals:
            bit = sigma.get(lit.variable)
            if bit is None:
                kept.append(lit)
            elif lit.satisfied_by(bit):
                satisfied = True
                break
        if not satisfied:
            new_clauses.append(Clause(tuple(kept)))
    return Matrix(tuple(new_clauses), matrix.variable_count)


class AnnotationCursor:
    """Checks the alignment rule between annotations and the prefix.

    Bit-vectors claim prefix variables from the front, block by block: a
    bit-vector never spans two blocks, annotations never return to an
    earlier block, and moving past a block requires all its variables to be
    claimed.  Inside one block, variables may be claimed in any order.
    """

    def __init__(self, prefix: Sequence[QuantifierBlock]):
        self._blocks = tuple(prefix)
        self._home = {
            v: i for i, block in enumerate(self._blocks) for v in block.variables
        }
        self._claimed: set[int] = set()
        self._block = 0

    def _fully_claimed(self, index: int) -> bool:
        return all(v in self._claimed for v in self._blocks[index].variables)

    def place(self, variables: Sequence[int]) -> QuantifierKind:
        """Claim an explicit bit-vector; returns the owning block's kind."""
        homes = set()
        for v in variables:
            home = self._home.get(v)
            if home is None:
                raise BlockMismatchError(f"variable {v} is not quantified in the prefix")
            if v in self._claimed:
                raise FormulaError(f"variable {v} occurs in two different bit-vectors")
            homes.add(home)
        if len(homes) != 1:
            raise BlockMismatchError(
                f"bit-vector {tuple(variables)} spans {len(homes)} quantifier blocks"
            )
        target = homes.pop()
        if target < self._block:
            raise BlockMismatchError(
                f"bit-vector {tuple(variables)} appears out of prefix order"
            )
        while self._block < target:
            if not self._fully_claimed(self._block):
                raise BlockMismatchError(
                    f"annotations skip variables of quantifier block {self._block + 1}"
                )
            self._block += 1
        self._claimed.update(variables)
        return self._blocks[target].kind

    def take(self, width: int) -> tuple[tuple[int, ...], QuantifierKind]:
        """Claim the next `width` unclaimed variables of the current block."""
        while self._block < len(self._blocks) and self._fully_claimed(self._block):
            self._block += 1
        if self._block >= len(self._blocks):
            raise BlockMismatchError(
                f"prefix exhausted while resolving an implicit {width}-bit bit-vector"
            )
        block = self._blocks[self._block]
        free = [v for v in block.variables if v not in self._claimed]
        if len(free) < width:
            raise BlockMismatchError(
                f"implicit bit-vector needs {width} variables but quantifier "
                f"block {self._block + 1} only has {len(free)} left"
            )
        chosen = tuple(free[:width])
        self._claimed.update(chosen)
        return chosen, block.kind


@dataclass(frozen=True)
class Formula:
    """A (Q)DIMACS formula: CNF matrix, optional prefix, annotations.

    An empty prefix means plain DIMACS; annotations are then implicitly
    existential.  With a prefix, the formula must be closed and annotations
    must align with the prefix block by block.
    """

    matrix: Matrix
    prefix: tuple[QuantifierBlock, ...] = ()
    annotations: tuple[AnnotatedQuantifier, ...] = ()

    def __post_init__(self) -> None:
        quantified: set[int] = set()
        for block in self.prefix:
            for v in block.variables:
                if v in quantified:
                    raise FormulaError(f"variable {v} is quantified twice")
                if v > self.matrix.variable_count:
                    raise FormulaError(
                        f"quantified variable {v} exceeds declared count "
                        f"{self.matrix.variable_count}"
                    )
                quantified.add(v)
        if self.prefix:
            for clause in self.matrix.clauses:
                for lit in clause.literals:
                    if lit.variable not in quantified:
                        raise FormulaError(
                            f"free variable {lit.variable} in matrix; only closed "
                            f"formulas are supported"
                        )
            cursor = AnnotationCursor(self.prefix)
            for aq in self.annotations:
                kind = cursor.place(aq.bitvector.variables)
                if kind is not aq.kind:
                    raise FormulaError(
                        f"annotation on {aq.bitvector.variables} is marked "
                        f"{aq.kind.name} but its block is {kind.name}"
                    )
        else:
            claimed: set[int] = set()
            for aq in self.annotations:
                if aq.kind is not QuantifierKind.EXISTS:
                    raise FormulaError(
                        "universal annotations require an explicit quantifier prefix"
                    )
                for v in aq.bitvector.variables:
                    if v > self.matrix.variable_count:
                        raise FormulaError(
                            f"annotated variable {v} exceeds declared count "
                            f"{self.matrix.variable_count}"
                        )
                    if v in claimed:
                        raise FormulaError(f"variable {v} occurs in two different bit-vectors")
                    claimed.add(v)

    @cached_property
    def _block_of(self) -> dict[int, int]:
        return {v: i for i, block in enumerate(self.prefix) for v in block.variables}

    def prefix_variables(self) -> tuple[int, ...]:
        """Quantified variables in prefix order; 1..n for prefix-free files."""
        if self.prefix:
            return tuple(v for block in self.prefix for v in block.variables)
        return tuple(range(1, self.matrix.variable_count + 1))

    def kind_of(self, variable: int) -> QuantifierKind:
        if not self.prefix:
            return QuantifierKind.EXISTS
        return self.prefix[self._block_of[variable]].kind

    def block_index_of(self, variable: int) -> int:
        return self._block_of[variable]
