"""Compilation of modal queries to relational algebra.

Column convention: a (sub)formula translated under a context of n variables
yields an expression of degree n+1 — columns 1..n hold the context
variables' values in context order and column n+1 holds the id of the
satisfying state.  Atoms establish the convention by crossing the domain
relations of the context variables with Sta and projecting the variable
columns plus Sta's id column; every other construct preserves it.  Binders
prepend their variable to the context, so a bound variable always occupies
column 1 of the subquery and is projected away afterwards.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import reduce
from typing import AbstractSet, Mapping

from .errors import (
    KindError,
    UnknownConstant,
    UnknownRelation,
    UnknownVariable,
    UntranslatableTerm,
)
from .kripke import KripkeModel, ModalQuery
from .relalg import (
    CON,
    OBJ,
    REL,
    STA,
    AlgebraExpr,
    BaseRelation,
    Column,
    Constant,
    Difference,
    Intersection,
    Product,
    Projection,
    Selection,
    SelectionPredicate,
    Union,
)
from .schema import concept_index
from .syntax import (
    Abstraction,
    And,
    Box,
    ConceptConst,
    ConceptVar,
    Diamond,
    Eq,
    Exists,
    Forall,
    Formula,
    Implies,
    Neq,
    Not,
    ObjectConst,
    ObjectVar,
    Or,
    Relativized,
    Term,
    Var,
    all_var_names,
    desugar_implications,
    fresh_var,
    substitute,
)

# {⟨⟩} for an empty context: the empty projection of Sta.  Sta is never
# empty on a mapped instance, so this always evaluates to the single empty
# tuple and products with it are identities.
EMPTY_CONTEXT_UNIT = Projection((), BaseRelation(STA))


@dataclass(frozen=True)
class VarContext:
    """Ordered, duplicate-free variables in scope; positions are 1-based."""

    variables: tuple[Var, ...] = ()

    def __post_init__(self):
        if len(set(self.variables)) != len(self.variables):
            raise ValueError("context variables must be distinct")

    def __len__(self) -> int:
        return len(self.variables)

    def __contains__(self, var: Var) -> bool:
        return var in self.variables

    def index_of(self, var: Var) -> int:
        try:
            return self.variables.index(var) + 1
        except ValueError:
            raise UnknownVariable(f"variable {var} is not in scope") from None

    def prepend(self, var: Var) -> VarContext:
        return VarContext((var,) + self.variables)


class Translator:
    """Compiles formulas to algebra expressions for one model signature."""

    def __init__(
        self,
        concepts: Mapping[str, int],
        relation_names: AbstractSet[str],
        object_constants: AbstractSet[str],
    ):
        self._concepts = dict(concepts)
        self._relations = frozenset(relation_names)
        self._constants = frozenset(object_constants)

    @classmethod
    def for_model(cls, model: KripkeModel) -> Translator:
        return cls(concept_index(model), frozenset(model.relations), model.object_constants)

    def translate_query(self, query: ModalQuery) -> AlgebraExpr:
        """Translate a whole query; the result has degree len(target)+1."""
        context = VarContext(tuple(query.target))
        return self.translate(desugar_implications(query.formula), context)

    def translate(self, formula: Formula, context: VarContext) -> AlgebraExpr:
        match formula:
            case Eq(left, right):
                return self._atom(left, right, "=", context)
            case Neq(left, right):
                return self._atom(left, right, "!=", context)
            case Not(body):
                return self._negation(body, context)
            case And(left, right):
                return Intersection(self.translate(left, context), self.translate(right, context))
            case Or(left, right):
                return Union(self.translate(left, context), self.translate(right, context))
            case Implies(left, right):
                return self.translate(Or(Not(left), right), context)
            case Diamond(relation, body):
                return self._diamond(relation, body, context)
            case Box(relation, body):
                return self._box(relation, body, context)
            case Exists(var, body):
                return self._exists(var, body, context)
            case Forall(var, body):
                return self._forall(var, body, context)
            case Abstraction(var, body, argument):
                return self._abstraction(var, body, argument, context)
        raise TypeError(f"not a formula: {formula!r}")

    # -- terms and variable lists --------------------------------------

    def term_ref(self, term: Term, context: VarContext) -> Column | Constant:
        """Attribute position or literal for a term.

        In a product of the context's domain relations with Sta, context
        variables occupy columns 1..n and the concept columns of Sta start
        at n+1, so a relativized concept constant lands on n plus its Sta
        column.
        """
        match term:
            case ObjectConst(symbol):
                if symbol not in self._constants:
                    raise UnknownConstant(f"unknown object constant '{symbol}'")
                return Constant(symbol)
            case ObjectVar() | ConceptVar():
                return Column(context.index_of(term))
            case Relativized(ConceptConst(symbol)):
                if symbol not in self._concepts:
                    raise UnknownConstant(f"unknown concept constant {symbol!r}")
                return Column(len(context) + self._concepts[symbol])
            case Relativized(inner):
                raise UntranslatableTerm(
                    f"@{inner} has no algebra translation: the concept a variable denotes "
                    "has no fixed column (the direct evaluator still supports it)"
                )
        raise KindError(f"term {term} cannot appear in an atom")

    def domain_product(self, context: VarContext) -> AlgebraExpr:
        """Cross product of one domain relation per context variable."""
        if not len(context):
            return EMPTY_CONTEXT_UNIT
        factors = [
            BaseRelation(OBJ if isinstance(var, ObjectVar) else CON)
            for var in context.variables
        ]
        return reduce(Product, factors)

    # -- formula constructs --------------------------------------------

    def _atom(self, left: Term, right: Term, op: str, context: VarContext) -> AlgebraExpr:
        n = len(context)
        predicate = SelectionPredicate(
            self.term_ref(left, context), op, self.term_ref(right, context)
        )
        base = Product(self.domain_product(context), BaseRelation(STA))
        return Projection(tuple(range(1, n + 2)), Selection(predicate, base))

    def _negation(self, body: Formula, context: VarContext) -> AlgebraExpr:
        universe = Product(self.domain_product(context), Projection((1,), BaseRelation(STA)))
        return Difference(universe, self.translate(body, context))

    def _diamond(self, relation: str, body: Formula, context: VarContext) -> AlgebraExpr:
        if relation not in self._relations:
            raise UnknownRelation(f"unknown accessibility relation {relation!r}")
        n = len(context)
        # Columns of body × Rel: 1..n vars, n+1 body state, n+2 source,
        # n+3 target, n+4 relation name.  Keep rows whose body state is the
        # target of a matching edge, then report the source state.
        crossed = Product(self.translate(body, context), BaseRelation(REL))
        selected = Selection(
            SelectionPredicate(Column(n + 4), "=", Constant(relation)),
            Selection(SelectionPredicate(Column(n + 1), "=", Column(n + 3)), crossed),
        )
        return Projection(tuple(range(1, n + 1)) + (n + 2,), selected)

    def _box(self, relation: str, body: Formula, context: VarContext) -> AlgebraExpr:
        # A box is definitionally the dual of the diamond.
        return self.translate(Not(Diamond(relation, Not(body))), context)

    def _exists(self, var: Var, body: Formula, context: VarContext) -> AlgebraExpr:
        var, body = self._unshadow(var, body, context)
        n = len(context)
        inner = self.translate(body, context.prepend(var))
        return Projection(tuple(range(2, n + 3)), inner)

    def _forall(self, var: Var, body: Formula, context: VarContext) -> AlgebraExpr:
        var, body = self._unshadow(var, body, context)
        n = len(context)
        inner = self.translate(body, context.prepend(var))
        keep = tuple(range(2, n + 3))
        kept = Projection(keep, inner)
        # Division by the bound variable's domain: drop result rows for
        # which some domain value fails the body.
        failing = Difference(Product(self.domain_product(VarContext((var,))), kept), inner)
        return Difference(kept, Projection(keep, failing))

    def _abstraction(
        self, var: Var, body: Formula, argument: Term, context: VarContext
    ) -> AlgebraExpr:
        match argument:
            case Relativized(ConceptConst(symbol)):
                if symbol not in self._concepts:
                    raise UnknownConstant(f"unknown concept constant {symbol!r}")
                var, body = self._unshadow(var, body, context)
                n = len(context)
                inner = self.translate(body, context.prepend(var))  # degree n+2
                # Two columns per state: the argument concept's value and
                # the state id.  Joining on the state id while equating the
                # bound variable with the concept value pins the variable to
                # the argument's value at the reported state.
                gadget = Projection((self._concepts[symbol], 1), BaseRelation(STA))
                selected = Selection(
                    SelectionPredicate(Column(1), "=", Column(n + 3)),
                    Selection(
                        SelectionPredicate(Column(n + 2), "=", Column(n + 4)),
                        Product(inner, gadget),
                    ),
                )
                return Projection(tuple(range(2, n + 3)), selected)
            case Relativized(inner_term):
                raise UntranslatableTerm(
                    f"abstraction argument @{inner_term} has no algebra translation"
                )
            case _:
                # Rigid argument: its value does not depend on the state, so
                # binding is the same as substituting it for the variable.
                return self.translate(substitute(body, var, argument), context)

    def _unshadow(self, var: Var, body: Formula, context: VarContext) -> tuple[Var, Formula]:
        """Rename a binder that would collide with a context variable."""
        if var not in context:
            return var, body
        avoid = all_var_names(body) | {v.name for v in context.variables}
        renamed = fresh_var(var, avoid)
        return renamed, substitute(body, var, renamed)


def translate_query(query: ModalQuery, model: KripkeModel) -> AlgebraExpr:
    """Translate a query against a model's signature."""
    return Translator.for_model(model).translate_query(query)


def simplify(expr: AlgebraExpr) -> AlgebraExpr:
    """Remove the ``{⟨⟩} ×`` padding that empty contexts introduce.

    This is the only rewrite applied to translations; products with the
    empty-tuple instance are identities.
    """
    match expr:
        case Selection(predicate, inner):
            return Selection(predicate, simplify(inner))
        case Projection(indices, inner):
            return Projection(indices, simplify(inner))
        case Product(left, right):
            left = simplify(left)
            right = simplify(right)
            if left == EMPTY_CONTEXT_UNIT:
                return right
            if right == EMPTY_CONTEXT_UNIT:
                return left
            return Product(left, right)
        case Union(left, right):
            return Union(simplify(left), simplify(right))
        case Difference(left, right):
            return Difference(simplify(left), simplify(right))
        case Intersection(left, right):
            return Intersection(simplify(left), simplify(right))
        case _:
            return expr
