"""Instances, constraint checking, homomorphisms."""

from __future__ import annotations

import itertools
import random

import pytest

from catmig import (
    check_constraints,
    check_hom,
    compose_homs,
    enumerate_homs,
    eval_path,
    identity_hom,
    iso_check,
    make_hom,
    path_from_text,
    prove_equal,
    validate_instance,
    validate_schema,
)
from catmig.errors import CatmigError, ValidationError

from helpers import (
    brute_force_homs,
    empdept_schema,
    empdept_tables,
    random_dag_schema,
    random_instance,
)


@pytest.fixture(scope="module")
def schema():
    return empdept_schema()


@pytest.fixture(scope="module")
def raw(schema):
    return empdept_tables(schema, fixed_admin=False)


@pytest.fixture(scope="module")
def fixed(schema):
    return empdept_tables(schema, fixed_admin=True)


def kinds(excinfo):
    return [v.kind for v in excinfo.value.violations]


def test_tables_validate(raw):
    assert raw.carriers["Emp"] == ("101", "102", "103")
    assert raw.carriers["Dept"] == ("q10", "x02")


def test_empty_instance_is_valid(schema):
    empty = validate_instance(schema, {}, {})
    assert all(c == () for c in empty.carriers.values())
    assert check_constraints(empty).ok


def test_missing_edge_value(schema):
    with pytest.raises(ValidationError) as excinfo:
        validate_instance(
            schema,
            {"Emp": ["101"], "Dept": ["q10"]},
            {
                "mgr": {"101": "101"},
                "works": {},
                "name": {"101": "Al"},
                "admin": {"q10": "101"},
                "dname": {"q10": "CS"},
            },
        )
    assert kinds(excinfo) == ["missing-edge-value"]


def test_codomain_and_literal_violations(schema):
    with pytest.raises(ValidationError) as excinfo:
        validate_instance(
            schema,
            {"Emp": ["101", "101"], "Dept": ["q10"]},
            {
                "mgr": {"101": "999"},
                "works": {"101": "q10"},
                "name": {"101": 5},
                "admin": {"q10": "101"},
                "dname": {"q10": "CS"},
            },
        )
    ks = kinds(excinfo)
    assert "duplicate-element-id" in ks
    assert "unknown-element" in ks
    assert "literal-type-mismatch" in ks


def test_eval_path_demonstrates_violation(schema, raw):
    # admin(q10)=102 and works(102)=x02, so the constraint fails at q10.
    p = path_from_text(schema.graph, "admin.works")
    assert eval_path(raw, p, "q10") == "x02"


def test_eval_identity(raw):
    from catmig import Path

    assert eval_path(raw, Path("Emp"), "101") == "101"


def test_eval_attribute_chain(schema, raw):
    assert eval_path(raw, path_from_text(schema.graph, "mgr.name"), "101") == "Carl"


def test_eval_outside_carrier_raises(schema, raw):
    with pytest.raises(CatmigError):
        eval_path(raw, path_from_text(schema.graph, "mgr"), "999")


def test_check_constraints_raw_two_violations(raw):
    report = check_constraints(raw)
    assert [(e.element, e.lhs, e.rhs) for e in report.entries] == [
        ("q10", "x02", "q10"),
        ("x02", "q10", "x02"),
    ]


def test_check_constraints_fixed_clean(fixed):
    assert check_constraints(fixed).ok


def test_no_equations_no_violations():
    s = validate_schema("S", ["A"], [], [("e", "A", "A")], [])
    i = validate_instance(s, {"A": ["x", "y"]}, {"e": {"x": "y", "y": "x"}})
    assert check_constraints(i).ok


def test_identity_hom_is_natural(fixed):
    assert check_hom(identity_hom(fixed)).ok


def test_hom_attribute_mismatch(schema, fixed, raw):
    # Raw and Fixed have the same attributes but different admin columns, so
    # the identity components fail naturality on admin.
    h = make_hom(raw, fixed, {n: {x: x for x in raw.carriers[n]} for n in schema.entities})
    report = check_hom(h)
    assert not report.ok
    assert {e.context for e in report.entries} == {"edge admin"}


def test_hom_literal_fixing():
    s = validate_schema("S", ["A"], ["String"], [("nm", "A", "String")], [])
    i = validate_instance(s, {"A": ["x"]}, {"nm": {"x": "Al"}})
    j = validate_instance(s, {"A": ["y"]}, {"nm": {"y": "Bob"}})
    h = make_hom(i, j, {"A": {"x": "y"}})
    report = check_hom(h)
    assert [e.context for e in report.entries] == ["attribute nm"]


def test_collapse_hom_against_brute_force():
    s = validate_schema("S", ["A"], [], [("e", "A", "A")], [])
    i = validate_instance(s, {"A": ["x", "y"]}, {"e": {"x": "y", "y": "x"}})
    j = validate_instance(s, {"A": ["z"]}, {"e": {"z": "z"}})
    found = enumerate_homs(i, j)
    assert found.complete
    assert len(found.homs) == len(brute_force_homs(i, j)) == 1


def test_enumerate_homs_all_functions():
    s = validate_schema("S", ["A"], [], [], [])
    i = validate_instance(s, {"A": ["x", "y"]}, {})
    j = validate_instance(s, {"A": ["1", "2", "3"]}, {})
    assert len(enumerate_homs(i, j).homs) == 9


def test_enumerate_homs_empty_target():
    s = validate_schema("S", ["A"], [], [], [])
    i = validate_instance(s, {"A": ["x"]}, {})
    j = validate_instance(s, {"A": []}, {})
    assert enumerate_homs(i, j).homs == ()


def test_enumerate_homs_matches_brute_force_on_tables(fixed):
    search = enumerate_homs(fixed, fixed)
    brute = brute_force_homs(fixed, fixed)
    assert search.complete
    assert len(search.homs) == len(brute) == 1  # distinct names pin everything


def test_enumerate_homs_cap():
    s = validate_schema("S", ["A"], [], [], [])
    i = validate_instance(s, {"A": ["x", "y"]}, {})
    j = validate_instance(s, {"A": ["1", "2", "3"]}, {})
    search = enumerate_homs(i, j, cap=4)
    assert not search.complete and len(search.homs) == 4


def test_homs_unique_and_natural(fixed, raw):
    search = enumerate_homs(raw, fixed)
    assert search.complete
    seen = []
    for h in search.homs:
        assert check_hom(h).ok
        assert h.components not in seen
        seen.append(h.components)


def test_iso_check_identity(fixed):
    iso = iso_check(fixed, fixed)
    assert iso is not None and check_hom(iso).ok


def test_iso_check_size_mismatch(schema, fixed):
    smaller = validate_instance(
        schema,
        {"Emp": ["101"], "Dept": ["q10"]},
        {
            "mgr": {"101": "101"},
            "works": {"101": "q10"},
            "name": {"101": "Al"},
            "admin": {"q10": "101"},
            "dname": {"q10": "CS"},
        },
    )
    assert iso_check(fixed, smaller) is None


def test_iso_check_renamed_copy(schema, fixed):
    renaming = {"101": "e1", "102": "e2", "103": "e3", "q10": "d1", "x02": "d2"}
    carriers = {n: [renaming[x] for x in fixed.carriers[n]] for n in schema.entities}
    edge_maps = {}
    for e in schema.edges():
        m = {}
        for x, v in fixed.edge_maps[e.name].items():
            m[renaming[x]] = renaming[v] if schema.is_entity(e.dst) else v
        edge_maps[e.name] = m
    copy = validate_instance(schema, carriers, edge_maps)
    iso = iso_check(fixed, copy)
    assert iso is not None
    assert iso.components["Emp"]["101"] == "e1"


def test_hom_composition_and_identity_closure():
    rng = random.Random(81)
    for _ in range(25):
        schema = random_dag_schema(rng, "H")
        a = random_instance(rng, schema, max_elems=2)
        b = random_instance(rng, schema, max_elems=2)
        c = random_instance(rng, schema, max_elems=2)
        ab = enumerate_homs(a, b, cap=50).homs
        bc = enumerate_homs(b, c, cap=50).homs
        for f, g in itertools.islice(itertools.product(ab, bc), 20):
            assert check_hom(compose_homs(f, g)).ok
        assert check_hom(identity_hom(a)).ok


def test_eval_respects_proven_equality():
    rng = random.Random(82)
    checked = 0
    for _ in range(40):
        schema = random_dag_schema(rng, "Q", equation_prob=1.0)
        if not schema.equations:
            continue
        inst = random_instance(rng, schema, max_elems=3)
        from catmig import hom_set

        for a in schema.entities:
            for b in schema.nodes:
                for p in hom_set(schema, a, b).paths:
                    for q in hom_set(schema, a, b).paths:
                        outcome = prove_equal(schema.theory, p, q)
                        if outcome.is_proven:
                            for x in inst.carriers[a]:
                                assert eval_path(inst, p, x) == eval_path(inst, q, x)
                                checked += 1
    assert checked > 50
