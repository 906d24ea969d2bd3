"""Modal query language: terms, formulas, parser, renderer, variable analysis.

The language keeps two kinds of symbols strictly apart.  Object-level terms
are quoted constants (``'b'``) and ``?x`` variables; concept-level terms are
bare-name constants (``code``) and ``%a`` variables.  ``@t`` denotes the
object a concept ``t`` takes in the state under evaluation and is the only
bridge between the kinds: it turns a concept term into an object term.
Equality and inequality compare object terms only.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

from .errors import FreeVarMismatch, KindError, QuerySyntaxError

# ---------------------------------------------------------------------------
# Terms


@dataclass(frozen=True)
class ObjectConst:
    symbol: str

    def __str__(self) -> str:
        return f"'{self.symbol}'"


@dataclass(frozen=True)
class ConceptConst:
    symbol: str

    def __str__(self) -> str:
        return self.symbol


@dataclass(frozen=True)
class ObjectVar:
    name: str

    def __str__(self) -> str:
        return f"?{self.name}"


@dataclass(frozen=True)
class ConceptVar:
    name: str

    def __str__(self) -> str:
        return f"%{self.name}"


@dataclass(frozen=True)
class Relativized:
    """The object a concept takes in the current state (an object term)."""

    inner: Term

    def __post_init__(self):
        if not is_concept_term(self.inner):
            raise KindError(f"'@' applies only to concept terms, got {self.inner}")

    def __str__(self) -> str:
        return f"@{self.inner}"


Term = ObjectConst | ConceptConst | ObjectVar | ConceptVar | Relativized
Var = ObjectVar | ConceptVar


def is_object_term(term: Term) -> bool:
    return isinstance(term, (ObjectConst, ObjectVar, Relativized))


def is_concept_term(term: Term) -> bool:
    return isinstance(term, (ConceptConst, ConceptVar))


def is_variable(term: Term) -> bool:
    return isinstance(term, (ObjectVar, ConceptVar))


def same_kind(var: Var, term: Term) -> bool:
    """Whether a binder of `var`'s kind may take `term` as its argument."""
    if isinstance(var, ObjectVar):
        return is_object_term(term)
    return is_concept_term(term)


# ---------------------------------------------------------------------------
# Formulas


@dataclass(frozen=True)
class Eq:
    left: Term
    right: Term

    def __post_init__(self):
        for side in (self.left, self.right):
            if not is_object_term(side):
                raise KindError(f"equality compares object terms, got {side}")


@dataclass(frozen=True)
class Neq:
    left: Term
    right: Term

    def __post_init__(self):
        for side in (self.left, self.right):
            if not is_object_term(side):
                raise KindError(f"inequality compares object terms, got {side}")


@dataclass(frozen=True)
class Not:
    body: Formula


@dataclass(frozen=True)
class And:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Or:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Implies:
    left: Formula
    right: Formula


@dataclass(frozen=True)
class Diamond:
    relation: str
    body: Formula


@dataclass(frozen=True)
class Box:
    relation: str
    body: Formula


@dataclass(frozen=True)
class Exists:
    var: Var
    body: Formula

    def __post_init__(self):
        if not is_variable(self.var):
            raise KindError(f"quantifier binds a variable, got {self.var}")


@dataclass(frozen=True)
class Forall:
    var: Var
    body: Formula

    def __post_init__(self):
        if not is_variable(self.var):
            raise KindError(f"quantifier binds a variable, got {self.var}")


@dataclass(frozen=True)
class Abstraction:
    """``<lam v . body>(argument)``: bind v to the argument's current value."""

    var: Var
    body: Formula
    argument: Term

    def __post_init__(self):
        if not is_variable(self.var):
            raise KindError(f"abstraction binds a variable, got {self.var}")
        if not same_kind(self.var, self.argument):
            raise KindError(
                f"abstraction binder {self.var} and argument {self.argument} differ in kind"
            )


Formula = Eq | Neq | Not | And | Or | Implies | Diamond | Box | Exists | Forall | Abstraction


# ---------------------------------------------------------------------------
# Variable analysis


def term_free_vars(term: Term) -> list[Var]:
    match term:
        case ObjectVar() | ConceptVar():
            return [term]
        case Relativized(inner):
            return term_free_vars(inner)
        case _:
            return []


def free_vars(formula: Formula) -> list[Var]:
    """Free variables of a formula, in first-occurrence order."""
    seen: dict[Var, None] = {}

    def collect(terms: list[Var], bound: frozenset[Var]) -> None:
        for var in terms:
            if var not in bound and var not in seen:
                seen[var] = None

    def walk(f: Formula, bound: frozenset[Var]) -> None:
        match f:
            case Eq(left, right) | Neq(left, right):
                collect(term_free_vars(left), bound)
                collect(term_free_vars(right), bound)
            case Not(body):
                walk(body, bound)
            case And(left, right) | Or(left, right) | Implies(left, right):
                walk(left, bound)
                walk(right, bound)
            case Diamond(_, body) | Box(_, body):
                walk(body, bound)
            case Exists(var, body) | Forall(var, body):
                walk(body, bound | {var})
            case Abstraction(var, body, argument):
                walk(body, bound | {var})
                collect(term_free_vars(argument), bound)

    walk(formula, frozenset())
    return list(seen)


@dataclass(frozen=True)
class ModalQuery:
    """A formula plus the ordered list of its free variables (the target)."""

    formula: Formula
    target: tuple[Var, ...]

    def __post_init__(self):
        if len(set(self.target)) != len(self.target):
            raise FreeVarMismatch("target variables must be distinct")
        free = free_vars(self.formula)
        if set(free) != set(self.target):
            wanted = ", ".join(str(v) for v in self.target) or "(none)"
            got = ", ".join(str(v) for v in free) or "(none)"
            raise FreeVarMismatch(f"target list [{wanted}] != free variables [{got}]")


def desugar_implications(formula: Formula) -> Formula:
    """Rewrite every ``a -> b`` into ``!a | b``."""
    match formula:
        case Implies(left, right):
            return Or(Not(desugar_implications(left)), desugar_implications(right))
        case Not(body):
            return Not(desugar_implications(body))
        case And(left, right):
            return And(desugar_implications(left), desugar_implications(right))
        case Or(left, right):
            return Or(desugar_implications(left), desugar_implications(right))
        case Diamond(rel, body):
            return Diamond(rel, desugar_implications(body))
        case Box(rel, body):
            return Box(rel, desugar_implications(body))
        case Exists(var, body):
            return Exists(var, desugar_implications(body))
        case Forall(var, body):
            return Forall(var, desugar_implications(body))
        case Abstraction(var, body, argument):
            return Abstraction(var, desugar_implications(body), argument)
        case _:
            return formula


def all_var_names(formula: Formula) -> set[str]:
    """Names of every variable occurring in the formula, bound or free."""
    names: set[str] = set()

    def from_term(term: Term) -> None:
        for v in term_free_vars(term):
            names.add(v.name)

    def walk(f: Formula) -> None:
        match f:
            case Eq(left, right) | Neq(left, right):
                from_term(left)
                from_term(right)
            case Not(body) | Diamond(_, body) | Box(_, body):
                walk(body)
            case And(left, right) | Or(left, right) | Implies(left, right):
                walk(left)
                walk(right)
            case Exists(var, body) | Forall(var, body):
                names.add(var.name)
                walk(body)
            case Abstraction(var, body, argument):
                names.add(var.name)
                from_term(argument)
                walk(body)

    walk(formula)
    return names


def fresh_var(like: Var, avoid: set[str]) -> Var:
    """A variable of the same kind as `like` whose name is not in `avoid`."""
    counter = 1
    while f"{like.name}_{counter}" in avoid:
        counter += 1
    name = f"{like.name}_{counter}"
    return ObjectVar(name) if isinstance(like, ObjectVar) else ConceptVar(name)


def substitute_in_term(term: Term, var: Var, replacement: Term) -> Term:
    match term:
        case ObjectVar() | ConceptVar():
            return replacement if term == var else term
        case Relativized(inner):
            new_inner = substitute_in_term(inner, var, replacement)
            return term if new_inner == inner else Relativized(new_inner)
        case _:
            return term


def substitute(formula: Formula, var: Var, replacement: Term) -> Formula:
    """Replace free occurrences of `var` by `replacement`, capture-avoiding.

    Binders that would capture a variable of the replacement are renamed to
    a fresh name first.
    """
    replacement_vars = set(term_free_vars(replacement))

    def rename_binder(binder: Var, body: Formula) -> tuple[Var, Formula]:
        avoid = all_var_names(body) | {v.name for v in replacement_vars} | {var.name}
        renamed = fresh_var(binder, avoid)
        return renamed, substitute(body, binder, renamed)

    def walk(f: Formula) -> Formula:
        match f:
            case Eq(left, right):
                return Eq(substitute_in_term(left, var, replacement),
                          substitute_in_term(right, var, replacement))
            case Neq(left, right):
                return Neq(substitute_in_term(left, var, replacement),
                           substitute_in_term(right, var, replacement))
            case Not(body):
                return Not(walk(body))
            case And(left, right):
                return And(walk(left), walk(right))
            case Or(left, right):
                return Or(walk(left), walk(right))
            case Implies(left, right):
                return Implies(walk(left), walk(right))
            case Diamond(rel, body):
                return Diamond(rel, walk(body))
            case Box(rel, body):
                return Box(rel, walk(body))
            case Exists(binder, body):
                if binder == var:
                    return f
                if binder in replacement_vars:
                    binder, body = rename_binder(binder, body)
                return Exists(binder, walk(body))
            case Forall(binder, body):
                if binder == var:
                    return f
                if binder in replacement_vars:
                    binder, body = rename_binder(binder, body)
                return Forall(binder, walk(body))
            case Abstraction(binder, body, argument):
                new_argument = substitute_in_term(argument, var, replacement)
                if binder == var:
                    return Abstraction(binder, body, new_argument)
                if binder in replacement_vars:
                    binder, body = rename_binder(binder, body)
                return Abstraction(binder, walk(body), new_argument)
        raise TypeError(f"not a formula: {f!r}")

    return walk(formula)


# ---------------------------------------------------------------------------
# Parsing

_KEYWORDS = frozenset({"exists", "forall", "lam"})

_TOKEN_RE = re.compile(
    r"""
      (?P<WS>\s+)
    | (?P<OBJCONST>'[^']*')
    | (?P<ARROW>->)
    | (?P<NEQ>!=)
    | (?P<OVAR>\?[A-Za-z_][A-Za-z0-9_]*)
    | (?P<CVAR>%[A-Za-z_][A-Za-z0-9_]*)
    | (?P<NAME>[A-Za-z_][A-Za-z0-9_]*)
    | (?P<PUNCT>[!&|=<>\[\]().@])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class _Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[_Token]:
    tokens: list[_Token] = []
    pos = 0
    line = 1
    line_start = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise QuerySyntaxError(
                f"unexpected character {text[pos]!r}", line, pos - line_start + 1
            )
        kind = m.lastgroup or ""
        value = m.group()
        if kind != "WS":
            tokens.append(_Token(kind, value, line, pos - line_start + 1))
        line += value.count("\n")
        if "\n" in value:
            line_start = pos + value.rindex("\n") + 1
        pos = m.end()
    tokens.append(_Token("EOF", "", line, len(text) - line_start + 1))
    return tokens


class _Parser:
    """Recursive-descent parser for the query grammar.

    Precedence, loosest first: ``->`` (right-associative), ``|``, ``&``, then
    the prefix operators ``!``, ``<R>``, ``[R]``.  Quantifier and abstraction
    bodies extend maximally to the right.
    """

    def __init__(self, tokens: list[_Token]):
        self._tokens = tokens
        self._pos = 0

    def _peek(self, ahead: int = 0) -> _Token:
        return self._tokens[min(self._pos + ahead, len(self._tokens) - 1)]

    def _advance(self) -> _Token:
        token = self._tokens[self._pos]
        if token.kind != "EOF":
            self._pos += 1
        return token

    def _error(self, message: str, token: _Token | None = None) -> QuerySyntaxError:
        token = token or self._peek()
        shown = token.value or "end of input"
        return QuerySyntaxError(f"{message}, found {shown!r}", token.line, token.column)

    def _expect(self, value: str, what: str) -> _Token:
        token = self._peek()
        if token.value != value:
            raise self._error(f"expected {what}", token)
        return self._advance()

    def _expect_name(self, what: str) -> _Token:
        token = self._peek()
        if token.kind != "NAME" or token.value in _KEYWORDS:
            raise self._error(f"expected {what}", token)
        return self._advance()

    def parse(self) -> Formula:
        formula = self.formula()
        if self._peek().kind != "EOF":
            raise self._error("expected end of query")
        return formula

    def formula(self) -> Formula:
        return self._implication()

    def _implication(self) -> Formula:
        left = self._disjunction()
        if self._peek().value == "->":
            self._advance()
            return Implies(left, self._implication())
        return left

    def _disjunction(self) -> Formula:
        formula = self._conjunction()
        while self._peek().value == "|":
            self._advance()
            formula = Or(formula, self._conjunction())
        return formula

    def _conjunction(self) -> Formula:
        formula = self._unary()
        while self._peek().value == "&":
            self._advance()
            formula = And(formula, self._unary())
        return formula

    def _unary(self) -> Formula:
        token = self._peek()
        if token.value == "!":
            self._advance()
            return Not(self._unary())
        if token.value == "<":
            if self._peek(1).value == "lam":
                return self._abstraction()
            self._advance()
            relation = self._expect_name("a relation name after '<'")
            self._expect(">", "'>' after relation name")
            return Diamond(relation.value, self._unary())
        if token.value == "[":
            self._advance()
            relation = self._expect_name("a relation name after '['")
            self._expect("]", "']' after relation name")
            return Box(relation.value, self._unary())
        if token.value in ("exists", "forall"):
            self._advance()
            var = self._variable()
            self._expect(".", "'.' after quantified variable")
            body = self.formula()
            return Exists(var, body) if token.value == "exists" else Forall(var, body)
        return self._atom_or_group()

    def _abstraction(self) -> Formula:
        self._expect("<", "'<'")
        self._expect("lam", "'lam'")
        var = self._variable()
        self._expect(".", "'.' after abstraction variable")
        body = self.formula()
        self._expect(">", "'>' closing the abstraction body")
        self._expect("(", "'(' before the abstraction argument")
        arg_token = self._peek()
        argument = self._term()
        self._expect(")", "')' after the abstraction argument")
        if not same_kind(var, argument):
            raise KindError(
                f"abstraction binder {var} and argument {argument} differ in kind",
                arg_token.line,
                arg_token.column,
            )
        return Abstraction(var, body, argument)

    def _atom_or_group(self) -> Formula:
        if self._peek().value == "(":
            self._advance()
            formula = self.formula()
            self._expect(")", "')'")
            return formula
        left_token = self._peek()
        left = self._term()
        op = self._peek()
        if op.value not in ("=", "!="):
            raise self._error("expected '=' or '!=' after a term", op)
        self._advance()
        right_token = self._peek()
        right = self._term()
        for term, token in ((left, left_token), (right, right_token)):
            if not is_object_term(term):
                raise KindError(
                    f"equality compares object terms, but {term} is a concept term",
                    token.line,
                    token.column,
                )
        return Eq(left, right) if op.value == "=" else Neq(left, right)

    def _variable(self) -> Var:
        token = self._peek()
        if token.kind == "OVAR":
            self._advance()
            return ObjectVar(token.value[1:])
        if token.kind == "CVAR":
            self._advance()
            return ConceptVar(token.value[1:])
        raise self._error("expected a variable ('?name' or '%name')", token)

    def _term(self) -> Term:
        token = self._peek()
        if token.kind == "OBJCONST":
            self._advance()
            return ObjectConst(token.value[1:-1])
        if token.kind == "OVAR":
            self._advance()
            return ObjectVar(token.value[1:])
        if token.kind == "CVAR":
            self._advance()
            return ConceptVar(token.value[1:])
        if token.value == "@":
            self._advance()
            inner = self._peek()
            if inner.kind == "NAME" and inner.value not in _KEYWORDS:
                self._advance()
                return Relativized(ConceptConst(inner.value))
            if inner.kind == "CVAR":
                self._advance()
                return Relativized(ConceptVar(inner.value[1:]))
            raise self._error("expected a concept constant or '%variable' after '@'", inner)
        if token.kind == "NAME" and token.value not in _KEYWORDS:
            self._advance()
            return ConceptConst(token.value)
        raise self._error("expected a term", token)


def parse_formula(text: str) -> Formula:
    """Parse query text into a formula; raises QuerySyntaxError/KindError."""
    return _Parser(_tokenize(text)).parse()


_VAR_NAME_RE = re.compile(r"[?%][A-Za-z_][A-Za-z0-9_]*$")


def parse_variable(name: str) -> Var:
    """Parse a sigiled variable name such as ``?x`` or ``%a``."""
    if not _VAR_NAME_RE.match(name):
        raise QuerySyntaxError(f"not a variable name: {name!r} (use '?name' or '%name')")
    return ObjectVar(name[1:]) if name[0] == "?" else ConceptVar(name[1:])


def parse_query(text: str, target: list[str] | tuple[str, ...] = ()) -> ModalQuery:
    """Parse query text plus its ordered target-variable names."""
    formula = parse_formula(text)
    variables = tuple(parse_variable(name) for name in target)
    return ModalQuery(formula, variables)


# ---------------------------------------------------------------------------
# Rendering

_PREC = {
    Implies: 1,
    Exists: 1,
    Forall: 1,
    Or: 2,
    And: 3,
    Not: 4,
    Diamond: 4,
    Box: 4,
    Eq: 5,
    Neq: 5,
    Abstraction: 5,
}


def render_formula(formula: Formula) -> str:
    """Canonical text for a formula; ``parse_formula`` round-trips it."""
    return _render(formula, 1)


def _render(formula: Formula, min_prec: int) -> str:
    match formula:
        case Eq(left, right):
            text = f"{left} = {right}"
        case Neq(left, right):
            text = f"{left} != {right}"
        case Not(body):
            text = f"!{_render(body, 4)}"
        case And(left, right):
            text = f"{_render(left, 3)} & {_render(right, 4)}"
        case Or(left, right):
            text = f"{_render(left, 2)} | {_render(right, 3)}"
        case Implies(left, right):
            text = f"{_render(left, 2)} -> {_render(right, 1)}"
        case Diamond(rel, body):
            text = f"<{rel}> {_render(body, 4)}"
        case Box(rel, body):
            text = f"[{rel}] {_render(body, 4)}"
        case Exists(var, body):
            text = f"exists {var} . {_render(body, 1)}"
        case Forall(var, body):
            text = f"forall {var} . {_render(body, 1)}"
        case Abstraction(var, body, argument):
            text = f"<lam {var} . {_render(body, 1)}>({argument})"
        case _:
            raise TypeError(f"not a formula: {formula!r}")
    if _PREC[type(formula)] < min_prec:
        return f"({text})"
    return text
