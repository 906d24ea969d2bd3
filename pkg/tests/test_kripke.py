from __future__ import annotations

import pytest

from modalrel import (
    Box,
    ConceptConst,
    ConceptVar,
    Diamond,
    Eq,
    Exists,
    Forall,
    KripkeModel,
    ModalQuery,
    ModelInvariantError,
    Not,
    ObjectConst,
    ObjectVar,
    Or,
    Relativized,
    RelationInstance,
    UnboundVariable,
    UnknownConstant,
    UnknownRelation,
    answer_direct,
    dump_model,
    free_vars,
    model_fingerprint,
    parse_formula,
    parse_model,
    parse_query,
    satisfies,
    substitute,
    term_eval,
    validate_model,
)
from modalrel.harness import GenParams, case_params, gen_model, gen_query


def state_with_id(model, id_value):
    return next(s for s in model.states if model.id_of(s) == id_value)


# ---------------------------------------------------------------------------
# Term evaluation


def test_term_eval_relativized_concept(example_model):
    state = state_with_id(example_model, "3")
    assert term_eval(example_model, {}, Relativized(ConceptConst("code")), state) == "b"


def test_term_eval_variable_lookup(example_model):
    x = ObjectVar("x")
    assert term_eval(example_model, {x: "a"}, x, example_model.states[0]) == "a"
    with pytest.raises(UnboundVariable):
        term_eval(example_model, {}, x, example_model.states[0])


def test_term_eval_concept_variable(example_model):
    g = ConceptVar("g")
    state = state_with_id(example_model, "1")
    assert term_eval(example_model, {g: "code"}, g, state) == "code"
    assert term_eval(example_model, {g: "code"}, Relativized(g), state) == "d"


def test_term_eval_unknown_constant(example_model):
    with pytest.raises(UnknownConstant):
        term_eval(example_model, {}, ObjectConst("zz"), example_model.states[0])
    with pytest.raises(UnknownConstant):
        term_eval(example_model, {}, Relativized(ConceptConst("nope")), example_model.states[0])


# ---------------------------------------------------------------------------
# Truth


def test_satisfies_atom_at_state(example_model):
    formula = parse_formula("@code = 'b'")
    assert satisfies(example_model, state_with_id(example_model, "3"), {}, formula)
    assert not satisfies(example_model, state_with_id(example_model, "1"), {}, formula)


def test_identity_atom_holds_everywhere(example_model):
    x = ObjectVar("x")
    for state in example_model.states:
        assert satisfies(example_model, state, {x: "a"}, Eq(x, x))


def test_satisfies_lambda_over_successor_codes(example_model):
    # binds ?y to the state's own code, then asks for a successor with it
    formula = parse_formula("<lam ?y . <COMP> @code = ?y>(@code)")
    state1 = state_with_id(example_model, "1")
    assert not satisfies(example_model, state1, {}, formula)


def test_satisfies_unknown_relation(example_model):
    with pytest.raises(UnknownRelation):
        satisfies(example_model, example_model.states[0], {}, parse_formula("<NOPE> ?x = ?x"))


# ---------------------------------------------------------------------------
# Direct answers


def test_answer_diamond(example_model):
    got = answer_direct(example_model, parse_query("<COMP> @code = 'b'"))
    assert got == RelationInstance.of(1, [("1",)])


def test_answer_box_vacuous_states(example_model):
    got = answer_direct(example_model, parse_query("[COMP] @code = 'b'"))
    assert got == RelationInstance.of(1, [("2",), ("3",), ("4",)])


def test_answer_one_variable(example_model):
    got = answer_direct(example_model, parse_query("@id = '3' & @code = ?a", ["?a"]))
    assert got == RelationInstance.of(2, [("b", "3")])


def test_answer_degree_without_matches(example_model):
    got = answer_direct(example_model, parse_query("@code = '1' & @code = ?a", ["?a"]))
    assert got.degree == 2 and not got.tuples


def test_empty_target_answers_are_id_values(example_model):
    ids = {example_model.id_of(s) for s in example_model.states}
    for text in ("@code = 'b'", "<COMP> ?q = ?q", "@code != @id"):
        # closed queries: free vars eliminated by quantification where needed
        formula = parse_formula(text)
        if free_vars(formula):
            formula = Exists(free_vars(formula)[0], formula)
        got = answer_direct(example_model, ModalQuery(formula, ()))
        assert {row[0] for row in got.tuples} <= ids


# ---------------------------------------------------------------------------
# Semantic laws on generated models


def _sample_cases(n, **overrides):
    params = GenParams(seed=99, max_states=4, max_objects=5, max_concepts=2,
                       max_relations=2, max_depth=3, max_free_vars=1, **overrides)
    for i in range(n):
        local = case_params(params, i)
        model = gen_model(local)
        query = gen_query(local, model)
        yield model, query


def test_box_diamond_duality():
    for model, query in _sample_cases(60):
        rel = sorted(model.relations)[0]
        assignment = {v: sorted(model.objects)[0] for v in query.target}
        for state in model.states:
            box = satisfies(model, state, assignment, Box(rel, query.formula))
            dual = satisfies(model, state, assignment, Not(Diamond(rel, Not(query.formula))))
            assert box == dual


def test_de_morgan():
    from modalrel import And, Or

    for model, query in _sample_cases(60):
        assignment = {v: sorted(model.objects)[0] for v in query.target}
        a = query.formula
        b = Eq(Relativized(ConceptConst("id")), ObjectConst(sorted(model.objects)[0]))
        for state in model.states:
            assert satisfies(model, state, assignment, Not(And(a, b))) == satisfies(
                model, state, assignment, Or(Not(a), Not(b))
            )


def test_quantifier_duality():
    x = ObjectVar("dm")
    for model, query in _sample_cases(60):
        assignment = {v: sorted(model.objects)[0] for v in query.target}
        a = query.formula
        for state in model.states:
            assert satisfies(model, state, assignment, Forall(x, a)) == satisfies(
                model, state, assignment, Not(Exists(x, Not(a)))
            )


def test_abstraction_of_rigid_argument_is_substitution():
    from modalrel import Abstraction

    y = ObjectVar("rigid")
    for model, query in _sample_cases(40):
        constant = ObjectConst(sorted(model.objects)[0])
        body = Or(query.formula, Eq(y, constant))
        lam = Abstraction(y, body, constant)
        assignment = {v: sorted(model.objects)[0] for v in query.target}
        for state in model.states:
            assert satisfies(model, state, assignment, lam) == satisfies(
                model, state, assignment, substitute(body, y, constant)
            )


# ---------------------------------------------------------------------------
# Model files and invariants


def test_model_file_round_trip(example_model):
    text = dump_model(example_model)
    again = parse_model(text)
    assert again == example_model
    assert model_fingerprint(again) == model_fingerprint(example_model)


def test_model_values_normalized_to_strings(example_model):
    # the YAML file spells ids as numbers; the model sees strings
    assert example_model.objects >= {"1", "4", "a", "d"}
    assert example_model.id_of(example_model.states[0]) == "1"


def test_parse_model_rejects_duplicate_ids(example_model):
    broken = dump_model(example_model).replace("id: '2'", "id: '1'")
    with pytest.raises(ModelInvariantError, match="id must be injective"):
        parse_model(broken)


def test_parse_model_rejects_unknown_relation_endpoint(example_model):
    broken = dump_model(example_model).replace("- ['1', '2']", "- ['1', '9']")
    with pytest.raises(ModelInvariantError, match="unknown state id"):
        parse_model(broken)


def test_parse_model_rejects_missing_fields():
    with pytest.raises(ModelInvariantError, match="missing"):
        parse_model("objects: [a]\nconcepts: [id]\nstates: [{id: a}]\n")


def test_parse_model_requires_concept_totality():
    text = (
        "objects: [a, b]\nconcepts: [id, c1]\nstates:\n  - {id: a}\n"
        "relations: {R: []}\n"
    )
    with pytest.raises(ModelInvariantError):
        parse_model(text)


def test_validate_model_needs_relation_and_concept():
    base = parse_model(
        "objects: [a]\nconcepts: [id]\nstates: [{id: a}]\nrelations: {R: []}\n"
    )
    validate_model(base)
    with pytest.raises(ModelInvariantError, match="relation"):
        validate_model(KripkeModel(base.states, {}, base.objects, base.concepts, base.objects))
    with pytest.raises(ModelInvariantError, match="id"):
        validate_model(KripkeModel(base.states, base.relations, base.objects,
                                   {"other": dict(base.concepts["id"])}, base.objects))
    with pytest.raises(ModelInvariantError, match="object"):
        validate_model(KripkeModel(base.states, base.relations, frozenset(),
                                   base.concepts, frozenset()))


def test_concept_value_must_be_object():
    text = "objects: [a]\nconcepts: [id, c1]\nstates: [{id: a, c1: z}]\nrelations: {R: []}\n"
    with pytest.raises(ModelInvariantError, match="not an object"):
        parse_model(text)
