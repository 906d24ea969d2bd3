"""Mapping between models and their four-relation database image.

Sta holds one row per state with one column per concept (the id concept is
always column 1, remaining concepts follow in name order); Rel holds one
``(source-id, target-id, relation-name)`` row per accessibility pair; Con
and Obj enumerate the concept names and the objects.
"""

from __future__ import annotations

from .errors import ModelInvariantError
from .kripke import ID_CONCEPT, KripkeModel, validate_model
from .relalg import CON, OBJ, REL, STA, DatabaseInstance, RelationInstance

ConceptIndex = dict  # concept name -> column index in Sta, bijective onto 1..k


def concept_index(model: KripkeModel) -> ConceptIndex:
    """Column index for every concept: ``id`` is 1, the rest follow by name."""
    others = sorted(name for name in model.concepts if name != ID_CONCEPT)
    index = {ID_CONCEPT: 1}
    index.update({name: i for i, name in enumerate(others, start=2)})
    return index


def ordered_concepts(model: KripkeModel) -> list[str]:
    index = concept_index(model)
    return sorted(index, key=index.get)


def build_database(model: KripkeModel) -> DatabaseInstance:
    """Build the database image of a model."""
    validate_model(model)
    columns = ordered_concepts(model)
    sta = RelationInstance.of(
        len(columns),
        (tuple(model.concepts[name][state] for name in columns) for state in model.states),
    )
    rel = RelationInstance.of(
        3,
        (
            (model.id_of(src), model.id_of(dst), name)
            for name, pairs in model.relations.items()
            for src, dst in pairs
        ),
    )
    con = RelationInstance.of(1, ((name,) for name in model.concepts))
    obj = RelationInstance.of(1, ((value,) for value in model.objects))
    return DatabaseInstance(
        relations={STA: sta, REL: rel, CON: con, OBJ: obj},
        relation_names=frozenset(model.relations),
    )


def validate_instance(db: DatabaseInstance) -> list[str]:
    """Check the data-level invariants of a mapped instance.

    Returns a list of human-readable violations; empty means the instance
    could have come from a model: every Sta value is an object, Sta is
    non-empty, Sta column 1 is a key, and Rel rows connect known state ids
    with declared relation names.
    """
    violations: list[str] = []
    sta = db.relations[STA]
    obj_values = {row[0] for row in db.relations[OBJ].tuples}

    for row in sta.sorted_rows():
        for value in row:
            if value not in obj_values:
                violations.append(f"Sta value {value!r} does not appear in Obj")

    if not sta.tuples:
        violations.append("Sta is empty")

    ids = [row[0] for row in sta.sorted_rows()]
    for value in sorted(set(ids)):
        if ids.count(value) > 1:
            violations.append(f"duplicate id {value!r}: Sta column 1 must be a key")

    id_set = set(ids)
    for row in db.relations[REL].sorted_rows():
        for endpoint in row[:2]:
            if endpoint not in id_set:
                violations.append(f"Rel endpoint {endpoint!r} is not a state id")
        if row[2] not in db.relation_names:
            violations.append(f"Rel relation name {row[2]!r} is not declared")

    return violations


def model_from_database(db: DatabaseInstance) -> KripkeModel:
    """Rebuild a model from a mapped instance, with fresh state handles.

    Inverse of ``build_database`` up to state-handle renaming: mapping the
    result again yields an identical DatabaseInstance.
    """
    concept_names = sorted(row[0] for row in db.relations[CON].tuples)
    if ID_CONCEPT not in concept_names:
        raise ModelInvariantError(f"Con does not list the {ID_CONCEPT!r} concept")
    columns = [ID_CONCEPT] + [name for name in concept_names if name != ID_CONCEPT]
    sta = db.relations[STA]
    if sta.degree != len(columns):
        raise ModelInvariantError(
            f"Sta degree {sta.degree} does not match the {len(columns)} concepts in Con"
        )

    rows = sta.sorted_rows()
    states = tuple(f"s{i}" for i in range(len(rows)))
    concepts: dict[str, dict[str, str]] = {name: {} for name in columns}
    id_to_handle: dict[str, str] = {}
    for handle, row in zip(states, rows):
        for name, value in zip(columns, row):
            concepts[name][handle] = value
        if row[0] in id_to_handle:
            raise ModelInvariantError(f"duplicate id value {row[0]!r} in Sta")
        id_to_handle[row[0]] = handle

    relations: dict[str, frozenset[tuple[str, str]]] = {
        name: frozenset() for name in db.relation_names
    }
    for src, dst, name in db.relations[REL].sorted_rows():
        if name not in relations:
            raise ModelInvariantError(f"Rel row uses undeclared relation name {name!r}")
        if src not in id_to_handle or dst not in id_to_handle:
            raise ModelInvariantError(f"Rel row ({src!r}, {dst!r}) references unknown state id")
        relations[name] = relations[name] | {(id_to_handle[src], id_to_handle[dst])}

    objects = frozenset(row[0] for row in db.relations[OBJ].tuples)
    model = KripkeModel(
        states=states,
        relations=relations,
        objects=objects,
        concepts=concepts,
        object_constants=objects,
    )
    validate_model(model)
    return model
