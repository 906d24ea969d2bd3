from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from modalrel import (
    CON,
    OBJ,
    REL,
    STA,
    BaseRelation,
    Column,
    Constant,
    DatabaseInstance,
    DegreeError,
    Difference,
    Intersection,
    Product,
    Projection,
    RelationInstance,
    Selection,
    SelectionPredicate,
    SingletonConstant,
    Union,
    UnknownRelation,
    degree_of,
    evaluate,
    parse_algebra,
    render_algebra,
    to_tsv,
)

STA_REL = BaseRelation(STA)
REL_REL = BaseRelation(REL)
CON_REL = BaseRelation(CON)
OBJ_REL = BaseRelation(OBJ)


def eq(left, right):
    return SelectionPredicate(left, "=", right)


# ---------------------------------------------------------------------------
# Instances


def test_instance_rejects_ragged_tuples():
    with pytest.raises(DegreeError):
        RelationInstance.of(2, [("a", "b"), ("c",)])


def test_degree_zero_holds_at_most_the_empty_tuple():
    unit = RelationInstance.of(0, [()])
    assert unit.tuples == {()}
    with pytest.raises(DegreeError):
        RelationInstance.of(0, [("a",)])


def test_to_tsv_sorted_with_optional_header():
    inst = RelationInstance.of(2, [("3", "b"), ("1", "d")])
    assert to_tsv(inst) == "1\td\n3\tb\n"
    assert to_tsv(inst, header=True) == "1\t2\n1\td\n3\tb\n"
    assert to_tsv(RelationInstance.of(1, [])) == ""


def test_database_requires_schema_degrees(example_db):
    with pytest.raises(DegreeError):
        DatabaseInstance(
            relations={**example_db.relations, REL: RelationInstance.of(2, [])},
            relation_names=example_db.relation_names,
        )
    with pytest.raises(DegreeError):
        DatabaseInstance(
            relations={STA: example_db.relations[STA]},
            relation_names=example_db.relation_names,
        )


# ---------------------------------------------------------------------------
# Static degrees


def test_degree_of_product(example_db):
    assert degree_of(Product(STA_REL, REL_REL), example_db.schema) == 5


def test_degree_of_empty_projection(example_db):
    assert degree_of(Projection((), STA_REL), example_db.schema) == 0


def test_union_needs_compatible_degrees(example_db):
    with pytest.raises(DegreeError):
        degree_of(Union(CON_REL, REL_REL), example_db.schema)


def test_degree_errors(example_db):
    with pytest.raises(UnknownRelation):
        degree_of(BaseRelation("Foo"), example_db.schema)
    with pytest.raises(DegreeError):
        degree_of(Projection((3,), STA_REL), example_db.schema)
    with pytest.raises(DegreeError):
        degree_of(Selection(eq(Column(4), Constant("x")), STA_REL), example_db.schema)
    with pytest.raises(DegreeError):
        Column(0)


# ---------------------------------------------------------------------------
# Evaluation per the operator definitions


def test_selection_by_constant(example_db):
    got = evaluate(Selection(eq(Column(2), Constant("b")), STA_REL), example_db)
    assert got == RelationInstance.of(2, [("3", "b")])


def test_projection_after_selection(example_db):
    got = evaluate(Projection((1,), Selection(eq(Column(2), Constant("b")), STA_REL)), example_db)
    assert got == RelationInstance.of(1, [("3",)])


def test_projection_with_repeats(example_db):
    got = evaluate(Projection((1, 1), Selection(eq(Column(2), Constant("b")), STA_REL)), example_db)
    assert got == RelationInstance.of(2, [("3", "3")])


def test_product_identity_with_empty_tuple(example_db):
    unit = Projection((), STA_REL)  # evaluates to {()} since Sta is non-empty
    assert evaluate(unit, example_db) == RelationInstance.of(0, [()])
    got = evaluate(Product(unit, SingletonConstant("c")), example_db)
    assert got == RelationInstance.of(1, [("c",)])
    got = evaluate(Product(SingletonConstant("c"), unit), example_db)
    assert got == RelationInstance.of(1, [("c",)])


def test_singleton_constant(example_db):
    assert evaluate(SingletonConstant("b"), example_db) == RelationInstance.of(1, [("b",)])


def test_constant_constant_selection(example_db):
    always = evaluate(Selection(eq(Constant("a"), Constant("a")), STA_REL), example_db)
    assert always == example_db.relations[STA]
    never = evaluate(Selection(eq(Constant("a"), Constant("b")), STA_REL), example_db)
    assert never.degree == 2 and not never.tuples


def test_column_column_selection(example_db):
    same = evaluate(Selection(eq(Column(1), Column(2)), Product(OBJ_REL, OBJ_REL)), example_db)
    assert same == RelationInstance.of(2, [(o, o) for (o,) in example_db.relations[OBJ].tuples])


def test_not_equal_selection(example_db):
    pred = SelectionPredicate(Column(2), "!=", Constant("b"))
    got = evaluate(Projection((1,), Selection(pred, STA_REL)), example_db)
    assert got == RelationInstance.of(1, [("1",), ("2",), ("4",)])


def test_set_operators(example_db):
    con = example_db.relations[CON]
    obj = example_db.relations[OBJ]
    assert evaluate(Union(CON_REL, OBJ_REL), example_db).tuples == con.tuples | obj.tuples
    assert evaluate(Difference(OBJ_REL, CON_REL), example_db).tuples == obj.tuples - con.tuples
    assert evaluate(Intersection(OBJ_REL, CON_REL), example_db).tuples == obj.tuples & con.tuples


def test_evaluate_checks_degrees_before_running(example_db):
    with pytest.raises(DegreeError):
        evaluate(Union(CON_REL, REL_REL), example_db)


# ---------------------------------------------------------------------------
# Algebra text round trip


RENDER_TABLE = [
    (Projection((1,), Selection(eq(Column(2), Constant("b")), STA_REL)),
     "(project (1) (select (= 2 'b') Sta))"),
    (SingletonConstant("b"), "(const 'b')"),
    (Difference(OBJ_REL, CON_REL), "(diff Obj Con)"),
    (Projection((), STA_REL), "(project () Sta)"),
    (Selection(SelectionPredicate(Column(1), "!=", Column(3)), REL_REL),
     "(select (!= 1 3) Rel)"),
    (Intersection(Union(CON_REL, CON_REL), Product(CON_REL, Projection((), STA_REL))),
     "(intersect (union Con Con) (product Con (project () Sta)))"),
]


@pytest.mark.parametrize("expr,text", RENDER_TABLE, ids=[t for _, t in RENDER_TABLE])
def test_render_algebra(expr, text):
    assert render_algebra(expr) == text
    assert parse_algebra(text) == expr


# ---------------------------------------------------------------------------
# Algebraic laws on random instances

_values = st.sampled_from(["a", "b", "c", "d"])


def _instances(degree):
    return st.builds(
        lambda rows: RelationInstance.of(degree, rows),
        st.frozensets(st.tuples(*[_values] * degree), max_size=12),
    )


@given(_instances(2), _instances(2))
@settings(max_examples=100)
def test_intersection_via_double_difference(left, right):
    # A ∩ B = A − (A − B)
    assert left.tuples & right.tuples == left.tuples - (left.tuples - right.tuples)


@given(_instances(1), _instances(2), _instances(1))
@settings(max_examples=50)
def test_product_associativity(a, b, c):
    def cross(x, y):
        return RelationInstance(
            x.degree + y.degree, frozenset(t + u for t in x.tuples for u in y.tuples)
        )

    assert cross(cross(a, b), c) == cross(a, cross(b, c))


@given(_instances(2))
@settings(max_examples=50)
def test_selection_and_projection_bounds(inst):
    selected = {t for t in inst.tuples if t[0] == "a"}
    assert selected <= inst.tuples
    projected = {(t[0],) for t in inst.tuples}
    assert len(projected) <= len(inst.tuples)


def test_eval_degree_matches_static_degree(example_db):
    exprs = [
        Product(STA_REL, REL_REL),
        Projection((), STA_REL),
        Projection((2, 1, 2), STA_REL),
        Union(CON_REL, OBJ_REL),
        Selection(eq(Column(1), Column(5)), Product(STA_REL, REL_REL)),
    ]
    for expr in exprs:
        assert evaluate(expr, example_db).degree == degree_of(expr, example_db.schema)
