"""Kripke models with individual concepts, and the direct truth evaluator.

A model is a finite set of states, one or more named accessibility
relations, a finite object domain, and a set of named concepts — total
functions from states to objects.  The distinguished concept ``id`` is
injective and serves as the external identity of a state.  Constants are
identified with the objects they denote (unique names), so the object
domain doubles as the pool of object-constant symbols.
"""

from __future__ import annotations

import hashlib
import itertools
from dataclasses import dataclass
from typing import Mapping

import yaml

from .errors import ModelInvariantError, UnboundVariable, UnknownConstant, UnknownRelation
from .relalg import RelationInstance
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
    ModalQuery,
    Neq,
    Not,
    ObjectConst,
    ObjectVar,
    Or,
    Relativized,
    Term,
    Var,
)

ID_CONCEPT = "id"

Assignment = dict  # Var -> str (object value, or concept name for concept vars)


@dataclass(frozen=True)
class KripkeModel:
    """Immutable finite model; states are internal handles."""

    states: tuple[str, ...]
    relations: dict[str, frozenset[tuple[str, str]]]
    objects: frozenset[str]
    concepts: dict[str, dict[str, str]]
    object_constants: frozenset[str]

    def successors(self, relation: str, state: str) -> list[str]:
        if relation not in self.relations:
            raise UnknownRelation(f"unknown accessibility relation {relation!r}")
        return sorted(dst for src, dst in self.relations[relation] if src == state)

    def id_of(self, state: str) -> str:
        return self.concepts[ID_CONCEPT][state]


def validate_model(model: KripkeModel) -> None:
    """Raise ModelInvariantError on the first structural violation found."""
    if not model.states:
        raise ModelInvariantError("a model needs at least one state")
    if len(set(model.states)) != len(model.states):
        raise ModelInvariantError("state handles must be distinct")
    if not model.objects:
        raise ModelInvariantError("a model needs at least one object")
    if not model.relations:
        raise ModelInvariantError("a model needs at least one accessibility relation")
    if ID_CONCEPT not in model.concepts:
        raise ModelInvariantError(f"a concept named {ID_CONCEPT!r} is required")
    state_set = set(model.states)
    for name, pairs in model.relations.items():
        for src, dst in pairs:
            if src not in state_set or dst not in state_set:
                raise ModelInvariantError(
                    f"relation {name!r} references unknown state in pair ({src!r}, {dst!r})"
                )
    for name, values in model.concepts.items():
        if set(values) != state_set:
            raise ModelInvariantError(f"concept {name!r} must be total on the states")
        for state, value in values.items():
            if value not in model.objects:
                raise ModelInvariantError(
                    f"concept {name!r} maps state {state!r} to {value!r}, "
                    "which is not an object of the model"
                )
    id_values = list(model.concepts[ID_CONCEPT].values())
    if len(set(id_values)) != len(id_values):
        duplicate = sorted(v for v in set(id_values) if id_values.count(v) > 1)[0]
        raise ModelInvariantError(f"duplicate id value {duplicate!r}: id must be injective")
    if not model.object_constants <= model.objects:
        raise ModelInvariantError("object constants must denote objects of the model")


# ---------------------------------------------------------------------------
# Term evaluation and truth


def term_eval(model: KripkeModel, assignment: Assignment, term: Term, state: str) -> str:
    """Value of a term at a state: an object value, or a concept name for
    concept terms."""
    match term:
        case ObjectConst(symbol):
            if symbol not in model.object_constants:
                raise UnknownConstant(f"unknown object constant '{symbol}'")
            return symbol
        case ConceptConst(symbol):
            if symbol not in model.concepts:
                raise UnknownConstant(f"unknown concept constant {symbol!r}")
            return symbol
        case ObjectVar() | ConceptVar():
            try:
                return assignment[term]
            except KeyError:
                raise UnboundVariable(f"variable {term} has no value") from None
        case Relativized(inner):
            name = term_eval(model, assignment, inner, state)
            if name not in model.concepts:
                raise UnknownConstant(f"unknown concept constant {name!r}")
            return model.concepts[name][state]
    raise TypeError(f"not a term: {term!r}")


def _domain(model: KripkeModel, var: Var) -> list[str]:
    if isinstance(var, ObjectVar):
        return sorted(model.objects)
    return list(model.concepts)


def satisfies(model: KripkeModel, state: str, assignment: Assignment, formula: Formula) -> bool:
    """Truth of a formula at a state under an assignment.

    Quantifiers range over the model's objects (object variables) or concept
    names (concept variables) — the same domain at every state.  A diamond
    asks for some successor satisfying the body, a box for all successors.
    Abstraction binds its variable to the argument's value at the current
    state before evaluating the body.
    """
    match formula:
        case Eq(left, right):
            return term_eval(model, assignment, left, state) == term_eval(
                model, assignment, right, state
            )
        case Neq(left, right):
            return term_eval(model, assignment, left, state) != term_eval(
                model, assignment, right, state
            )
        case Not(body):
            return not satisfies(model, state, assignment, body)
        case And(left, right):
            return satisfies(model, state, assignment, left) and satisfies(
                model, state, assignment, right
            )
        case Or(left, right):
            return satisfies(model, state, assignment, left) or satisfies(
                model, state, assignment, right
            )
        case Implies(left, right):
            return (not satisfies(model, state, assignment, left)) or satisfies(
                model, state, assignment, right
            )
        case Diamond(relation, body):
            return any(
                satisfies(model, nxt, assignment, body)
                for nxt in model.successors(relation, state)
            )
        case Box(relation, body):
            return all(
                satisfies(model, nxt, assignment, body)
                for nxt in model.successors(relation, state)
            )
        case Exists(var, body):
            return any(
                satisfies(model, state, {**assignment, var: value}, body)
                for value in _domain(model, var)
            )
        case Forall(var, body):
            return all(
                satisfies(model, state, {**assignment, var: value}, body)
                for value in _domain(model, var)
            )
        case Abstraction(var, body, argument):
            value = term_eval(model, assignment, argument, state)
            return satisfies(model, state, {**assignment, var: value}, body)
    raise TypeError(f"not a formula: {formula!r}")


def answer_direct(model: KripkeModel, query: ModalQuery) -> RelationInstance:
    """Answer a query by enumerating assignments and states.

    The result has degree len(target)+1: one column per target variable plus
    the id of the satisfying state.
    """
    domains = [_domain(model, var) for var in query.target]
    rows = set()
    for values in itertools.product(*domains):
        assignment = dict(zip(query.target, values))
        for state in model.states:
            if satisfies(model, state, assignment, query.formula):
                rows.add((*values, model.id_of(state)))
    return RelationInstance(len(query.target) + 1, frozenset(rows))


# ---------------------------------------------------------------------------
# Model files


def _scalar(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, bool) or value is None or isinstance(value, (list, dict)):
        raise ModelInvariantError(f"model values must be strings or numbers, got {value!r}")
    return str(value)


def parse_model(text: str) -> KripkeModel:
    """Parse the structured-text model format.

    Fields: ``objects`` (list), ``concepts`` (list containing ``id``),
    ``states`` (list of records, one field per concept), ``relations``
    (map name -> list of [source-id, target-id] pairs, referencing states
    by their id value).
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ModelInvariantError(f"model file is not valid YAML: {exc}") from exc
    if not isinstance(data, Mapping):
        raise ModelInvariantError("model file must be a mapping")
    for field in ("objects", "concepts", "states", "relations"):
        if field not in data:
            raise ModelInvariantError(f"model file is missing the {field!r} field")

    if not isinstance(data["objects"], list):
        raise ModelInvariantError("'objects' must be a list")
    objects = frozenset(_scalar(x) for x in data["objects"])

    if not isinstance(data["concepts"], list):
        raise ModelInvariantError("'concepts' must be a list")
    concept_names = [_scalar(x) for x in data["concepts"]]
    if len(set(concept_names)) != len(concept_names):
        raise ModelInvariantError("concept names must be distinct")

    if not isinstance(data["states"], list):
        raise ModelInvariantError("'states' must be a list")
    states = tuple(f"s{i}" for i in range(len(data["states"])))
    concepts: dict[str, dict[str, str]] = {name: {} for name in concept_names}
    for handle, record in zip(states, data["states"]):
        if not isinstance(record, Mapping):
            raise ModelInvariantError("each state must be a record of concept values")
        keys = {_scalar(k) for k in record}
        if keys != set(concept_names):
            raise ModelInvariantError(
                f"state record fields {sorted(keys)} do not match concepts {sorted(concept_names)}"
            )
        for key, value in record.items():
            concepts[_scalar(key)][handle] = _scalar(value)

    if ID_CONCEPT not in concepts:
        raise ModelInvariantError(f"a concept named {ID_CONCEPT!r} is required")
    id_to_handle: dict[str, str] = {}
    for handle in states:
        id_value = concepts[ID_CONCEPT][handle]
        if id_value in id_to_handle:
            raise ModelInvariantError(f"duplicate id value {id_value!r}: id must be injective")
        id_to_handle[id_value] = handle

    if not isinstance(data["relations"], Mapping):
        raise ModelInvariantError("'relations' must be a map")
    relations: dict[str, frozenset[tuple[str, str]]] = {}
    for raw_name, raw_pairs in data["relations"].items():
        name = _scalar(raw_name)
        pairs = set()
        for raw_pair in raw_pairs or []:
            if not isinstance(raw_pair, list) or len(raw_pair) != 2:
                raise ModelInvariantError(
                    f"relation {name!r} pairs must be [source-id, target-id] lists"
                )
            src, dst = (_scalar(x) for x in raw_pair)
            for endpoint in (src, dst):
                if endpoint not in id_to_handle:
                    raise ModelInvariantError(
                        f"relation {name!r} references unknown state id {endpoint!r}"
                    )
            pairs.add((id_to_handle[src], id_to_handle[dst]))
        relations[name] = frozenset(pairs)

    model = KripkeModel(
        states=states,
        relations=relations,
        objects=objects,
        concepts=concepts,
        object_constants=objects,
    )
    validate_model(model)
    return model


def load_model(path) -> KripkeModel:
    with open(path, "r", encoding="utf-8") as handle:
        return parse_model(handle.read())


def dump_model(model: KripkeModel) -> str:
    """Canonical text form of a model; ``parse_model`` round-trips it."""
    ordered_concepts = [ID_CONCEPT] + sorted(n for n in model.concepts if n != ID_CONCEPT)
    data = {
        "objects": sorted(model.objects),
        "concepts": ordered_concepts,
        "states": [
            {name: model.concepts[name][state] for name in ordered_concepts}
            for state in model.states
        ],
        "relations": {
            name: sorted(
                [model.id_of(src), model.id_of(dst)] for src, dst in model.relations[name]
            )
            for name in sorted(model.relations)
        },
    }
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)


def model_fingerprint(model: KripkeModel) -> str:
    """Short stable digest of a model's canonical text form."""
    return hashlib.sha256(dump_model(model).encode("utf-8")).hexdigest()[:12]
