"""Positional (unnamed) relational algebra over in-memory tuple sets.

Relations are finite sets of equal-length string tuples; attributes are the
1-based positions 1..degree.  Expressions are immutable trees over the four
base relations of a mapped database plus singleton constants, closed under
selection, projection, cross product, union, difference and intersection.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Iterable, Mapping

from .errors import DegreeError, QuerySyntaxError, UnknownRelation

STA = "Sta"
REL = "Rel"
CON = "Con"
OBJ = "Obj"
SCHEMA_NAMES = (STA, REL, CON, OBJ)


@dataclass(frozen=True)
class RelationInstance:
    """A finite set of `degree`-length tuples of domain strings."""

    degree: int
    tuples: frozenset[tuple[str, ...]]

    def __post_init__(self):
        if self.degree < 0:
            raise DegreeError(f"degree must be non-negative, got {self.degree}")
        for row in self.tuples:
            if len(row) != self.degree:
                raise DegreeError(
                    f"tuple {row!r} does not match degree",
                    expected=self.degree,
                    found=len(row),
                )

    @classmethod
    def of(cls, degree: int, rows: Iterable[Iterable[str]]) -> RelationInstance:
        return cls(degree, frozenset(tuple(row) for row in rows))

    def sorted_rows(self) -> list[tuple[str, ...]]:
        return sorted(self.tuples)


EMPTY_TUPLE_INSTANCE = RelationInstance(0, frozenset({()}))


def to_tsv(instance: RelationInstance, header: bool = False) -> str:
    """Tab-separated rows in lexicographic order, one tuple per line."""
    lines = []
    if header:
        lines.append("\t".join(str(i) for i in range(1, instance.degree + 1)))
    lines.extend("\t".join(row) for row in instance.sorted_rows())
    return "\n".join(lines) + ("\n" if lines else "")


@dataclass(frozen=True)
class DatabaseInstance:
    """The four-relation image of a model: Sta, Rel, Con, Obj.

    `relation_names` records the accessibility-relation names that may appear
    in Rel's third column; they are part of the database domain.
    """

    relations: dict[str, RelationInstance]
    relation_names: frozenset[str]

    def __post_init__(self):
        if set(self.relations) != set(SCHEMA_NAMES):
            raise DegreeError(f"database needs exactly the relations {SCHEMA_NAMES}")
        for name, want in ((REL, 3), (CON, 1), (OBJ, 1)):
            if self.relations[name].degree != want:
                raise DegreeError(
                    f"{name} has the wrong degree",
                    expected=want,
                    found=self.relations[name].degree,
                )
        if self.relations[STA].degree < 1:
            raise DegreeError(f"{STA} must have at least one column (the id)")

    @property
    def schema(self) -> dict[str, int]:
        return {name: inst.degree for name, inst in self.relations.items()}


# ---------------------------------------------------------------------------
# Expressions


@dataclass(frozen=True)
class Column:
    """A 1-based attribute position."""

    index: int

    def __post_init__(self):
        if self.index < 1:
            raise DegreeError(f"column indices are 1-based, got {self.index}")


@dataclass(frozen=True)
class Constant:
    value: str


@dataclass(frozen=True)
class SelectionPredicate:
    """Comparison of two operands, each a column or a constant."""

    left: Column | Constant
    op: str  # "=" or "!="
    right: Column | Constant

    def __post_init__(self):
        if self.op not in ("=", "!="):
            raise DegreeError(f"selection operator must be '=' or '!=', got {self.op!r}")


@dataclass(frozen=True)
class BaseRelation:
    name: str


@dataclass(frozen=True)
class SingletonConstant:
    """The degree-1 instance holding exactly one value."""

    value: str


@dataclass(frozen=True)
class Selection:
    predicate: SelectionPredicate
    input: AlgebraExpr


@dataclass(frozen=True)
class Projection:
    indices: tuple[int, ...]  # may be empty, may repeat
    input: AlgebraExpr


@dataclass(frozen=True)
class Product:
    left: AlgebraExpr
    right: AlgebraExpr


@dataclass(frozen=True)
class Union:
    left: AlgebraExpr
    right: AlgebraExpr


@dataclass(frozen=True)
class Difference:
    left: AlgebraExpr
    right: AlgebraExpr


@dataclass(frozen=True)
class Intersection:
    left: AlgebraExpr
    right: AlgebraExpr


AlgebraExpr = (
    BaseRelation
    | SingletonConstant
    | Selection
    | Projection
    | Product
    | Union
    | Difference
    | Intersection
)


def degree_of(expr: AlgebraExpr, schema: Mapping[str, int]) -> int:
    """Static degree of an expression; raises on any arity violation."""
    match expr:
        case BaseRelation(name):
            if name not in schema:
                raise UnknownRelation(f"unknown relation {name!r}")
            return schema[name]
        case SingletonConstant(_):
            return 1
        case Selection(predicate, inner):
            degree = degree_of(inner, schema)
            for operand in (predicate.left, predicate.right):
                if isinstance(operand, Column) and operand.index > degree:
                    raise DegreeError(
                        f"selection column {operand.index} out of range",
                        expected=degree,
                        found=operand.index,
                    )
            return degree
        case Projection(indices, inner):
            degree = degree_of(inner, schema)
            for index in indices:
                if index < 1 or index > degree:
                    raise DegreeError(
                        f"projection index {index} out of range",
                        expected=degree,
                        found=index,
                    )
            return len(indices)
        case Product(left, right):
            return degree_of(left, schema) + degree_of(right, schema)
        case Union(left, right) | Difference(left, right) | Intersection(left, right):
            dl = degree_of(left, schema)
            dr = degree_of(right, schema)
            if dl != dr:
                raise DegreeError(
                    f"{type(expr).__name__.lower()} needs union-compatible inputs",
                    expected=dl,
                    found=dr,
                )
            return dl
    raise TypeError(f"not an algebra expression: {expr!r}")


def evaluate(expr: AlgebraExpr, db: DatabaseInstance) -> RelationInstance:
    """Set-semantics evaluation; the whole expression is degree-checked first."""
    degree_of(expr, db.schema)
    return _eval(expr, db)


def _operand_value(operand: Column | Constant, row: tuple[str, ...]) -> str:
    if isinstance(operand, Column):
        return row[operand.index - 1]
    return operand.value


def _holds(predicate: SelectionPredicate, row: tuple[str, ...]) -> bool:
    left = _operand_value(predicate.left, row)
    right = _operand_value(predicate.right, row)
    return left == right if predicate.op == "=" else left != right


def _eval(expr: AlgebraExpr, db: DatabaseInstance) -> RelationInstance:
    match expr:
        case BaseRelation(name):
            return db.relations[name]
        case SingletonConstant(value):
            return RelationInstance(1, frozenset({(value,)}))
        case Selection(predicate, inner):
            inst = _eval(inner, db)
            return RelationInstance(
                inst.degree, frozenset(row for row in inst.tuples if _holds(predicate, row))
            )
        case Projection(indices, inner):
            inst = _eval(inner, db)
            return RelationInstance(
                len(indices),
                frozenset(tuple(row[i - 1] for i in indices) for row in inst.tuples),
            )
        case Product(left, right):
            a = _eval(left, db)
            b = _eval(right, db)
            return RelationInstance(
                a.degree + b.degree, frozenset(t + u for t in a.tuples for u in b.tuples)
            )
        case Union(left, right):
            a = _eval(left, db)
            b = _eval(right, db)
            return RelationInstance(a.degree, a.tuples | b.tuples)
        case Difference(left, right):
            a = _eval(left, db)
            b = _eval(right, db)
            return RelationInstance(a.degree, a.tuples - b.tuples)
        case Intersection(left, right):
            a = _eval(left, db)
            b = _eval(right, db)
            return RelationInstance(a.degree, a.tuples & b.tuples)
    raise TypeError(f"not an algebra expression: {expr!r}")


# ---------------------------------------------------------------------------
# Text form


def _render_operand(operand: Column | Constant) -> str:
    if isinstance(operand, Column):
        return str(operand.index)
    return f"'{operand.value}'"


def render_algebra(expr: AlgebraExpr) -> str:
    """Canonical prefix text; ``parse_algebra`` round-trips it."""
    match expr:
        case BaseRelation(name):
            return name
        case SingletonConstant(value):
            return f"(const '{value}')"
        case Selection(predicate, inner):
            pred = (
                f"({predicate.op} {_render_operand(predicate.left)}"
                f" {_render_operand(predicate.right)})"
            )
            return f"(select {pred} {render_algebra(inner)})"
        case Projection(indices, inner):
            cols = " ".join(str(i) for i in indices)
            return f"(project ({cols}) {render_algebra(inner)})"
        case Product(left, right):
            return f"(product {render_algebra(left)} {render_algebra(right)})"
        case Union(left, right):
            return f"(union {render_algebra(left)} {render_algebra(right)})"
        case Difference(left, right):
            return f"(diff {render_algebra(left)} {render_algebra(right)})"
        case Intersection(left, right):
            return f"(intersect {render_algebra(left)} {render_algebra(right)})"
    raise TypeError(f"not an algebra expression: {expr!r}")


_SEXPR_TOKEN = re.compile(r"\s*('[^']*'|\(|\)|[^\s()']+)")


def _sexpr_read(text: str) -> list:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _SEXPR_TOKEN.match(text, pos)
        if m is None:
            break
        tokens.append(m.group(1))
        pos = m.end()
    if text[pos:].strip():
        raise QuerySyntaxError(f"bad algebra text near {text[pos:pos + 10]!r}")

    def read(index: int):
        if index >= len(tokens):
            raise QuerySyntaxError("unexpected end of algebra text")
        token = tokens[index]
        if token == "(":
            items = []
            index += 1
            while index < len(tokens) and tokens[index] != ")":
                item, index = read(index)
                items.append(item)
            if index >= len(tokens):
                raise QuerySyntaxError("missing ')' in algebra text")
            return items, index + 1
        if token == ")":
            raise QuerySyntaxError("unexpected ')' in algebra text")
        return token, index + 1

    tree, end = read(0)
    if end != len(tokens):
        raise QuerySyntaxError("trailing tokens after algebra expression")
    return tree


def _parse_operand(token) -> Column | Constant:
    if isinstance(token, str) and token.startswith("'") and token.endswith("'"):
        return Constant(token[1:-1])
    if isinstance(token, str) and token.isdigit():
        return Column(int(token))
    raise QuerySyntaxError(f"bad selection operand {token!r}")


def _build(tree) -> AlgebraExpr:
    if isinstance(tree, str):
        return BaseRelation(tree)
    if not tree:
        raise QuerySyntaxError("empty algebra expression")
    head = tree[0]
    if head == "const" and len(tree) == 2 and isinstance(tree[1], str):
        return SingletonConstant(tree[1].strip("'"))
    if head == "select" and len(tree) == 3 and isinstance(tree[1], list):
        op, left, right = tree[1]
        return Selection(
            SelectionPredicate(_parse_operand(left), op, _parse_operand(right)),
            _build(tree[2]),
        )
    if head == "project" and len(tree) == 3 and isinstance(tree[1], list):
        indices = tuple(int(i) for i in tree[1])
        return Projection(indices, _build(tree[2]))
    binary = {"product": Product, "union": Union, "diff": Difference, "intersect": Intersection}
    if head in binary and len(tree) == 3:
        return binary[head](_build(tree[1]), _build(tree[2]))
    raise QuerySyntaxError(f"bad algebra expression head {head!r}")


def parse_algebra(text: str) -> AlgebraExpr:
    """Parse the canonical prefix text back into an expression tree."""
    return _build(_sexpr_read(text))
