"""Path terms, orientation, completion, normalization, proving, enumeration."""

from __future__ import annotations

import json
import random

import pytest

from catmig import (
    Budget,
    CONVERGENT,
    Edge,
    Graph,
    PARTIAL,
    Path,
    PathEquation,
    complete,
    enumerate_paths,
    equation_from_text,
    make_theory,
    normalize,
    normalize_with_trace,
    orient,
    path_from_text,
    prove_equal,
    verify_trace,
)
from catmig.errors import EndpointMismatch, Unorientable

from helpers import empdept_schema


@pytest.fixture(scope="module")
def empdept():
    return empdept_schema()


def test_compose_identities(empdept):
    g = empdept.graph
    ident = g.identity("Dept")
    assert g.compose(ident, ident) == ident


def test_compose_admin_works(empdept):
    g = empdept.graph
    p = g.compose(g.edge_path("admin"), g.edge_path("works"))
    assert p == Path("Dept", ("admin", "works"))
    assert g.end(p) == "Dept"


def test_compose_endpoint_mismatch(empdept):
    g = empdept.graph
    mgr2 = g.compose(g.edge_path("mgr"), g.edge_path("mgr"))
    assert mgr2.edges == ("mgr", "mgr")
    dept_path = g.edge_path("admin")
    with pytest.raises(EndpointMismatch):
        g.compose(dept_path, dept_path)  # admin ends at Emp, not Dept


def test_orient_by_length(empdept):
    g = empdept.graph
    eq = equation_from_text(g, "admin.works = id:Dept")
    rule = orient(eq)
    assert rule.lhs.edges == ("admin", "works") and rule.rhs.is_identity


def test_orient_degenerate_raises(empdept):
    p = empdept.graph.edge_path("mgr")
    with pytest.raises(Unorientable):
        orient(PathEquation(p, p))


def test_orient_equal_length_lexicographic():
    g = Graph(["n"], [Edge(e, "n", "n") for e in "abcd"])
    eq = PathEquation(g.path(("a", "b")), g.path(("c", "d")))
    rule = orient(eq)
    assert rule.lhs.edges == ("c", "d") and rule.rhs.edges == ("a", "b")


def test_complete_empdept_one_rule(empdept):
    theory = empdept.theory
    assert theory.status == CONVERGENT
    assert len(theory.rules) == 1
    assert str(theory.rules[0]) == "admin.works => id:Dept"


def test_complete_empty_equations():
    g = Graph(["n"], [Edge("e", "n", "n")])
    theory = complete(make_theory(g, []))
    assert theory.status == CONVERGENT and theory.rules == ()


def test_complete_idempotent_loop():
    g = Graph(["a"], [Edge("e", "a", "a")])
    theory = complete(make_theory(g, [equation_from_text(g, "e.e = e")]))
    assert theory.status == CONVERGENT
    assert [str(r) for r in theory.rules] == ["e.e => e"]


def test_rules_carry_derivations(empdept):
    for rule in empdept.theory.rules:
        assert rule.derivation and rule.ordering


def test_normalize_to_identity(empdept):
    g = empdept.graph
    assert normalize(path_from_text(g, "admin.works"), empdept.theory) == g.identity("Dept")


def test_normalize_no_rule_applies(empdept):
    mgr = empdept.graph.edge_path("mgr")
    assert normalize(mgr, empdept.theory) == mgr


def test_normalize_two_steps(empdept):
    g = empdept.graph
    p = path_from_text(g, "admin.works.admin.works")
    nf, steps = normalize_with_trace(p, empdept.theory)
    assert nf == g.identity("Dept")
    assert len(steps) == 2
    assert all(s.source == "rule" for s in steps)


def test_prove_paper_equation(empdept):
    g = empdept.graph
    eq = equation_from_text(g, "admin.works = id:Dept")
    outcome = prove_equal(empdept.theory, eq.lhs, eq.rhs)
    assert outcome.is_proven
    assert verify_trace(empdept.theory, eq.lhs, eq.rhs, outcome.trace)


def test_prove_refutes_under_convergence(empdept):
    g = empdept.graph
    outcome = prove_equal(empdept.theory, g.edge_path("mgr"), g.identity("Emp"))
    assert outcome.is_refuted


def test_prove_reflexive_empty_trace(empdept):
    p = path_from_text(empdept.graph, "mgr.works")
    outcome = prove_equal(empdept.theory, p, p)
    assert outcome.is_proven and outcome.trace == ()


def test_prove_endpoint_mismatch_is_an_error(empdept):
    g = empdept.graph
    with pytest.raises(EndpointMismatch):
        prove_equal(empdept.theory, g.edge_path("mgr"), g.identity("Dept"))


def _starved_two_loops():
    g = Graph(["n"], [Edge("a", "n", "n"), Edge("b", "n", "n")])
    eqs = [equation_from_text(g, "a.a = a"), equation_from_text(g, "b.b = b")]
    tiny = Budget(max_completion_iterations=1, max_rewrite_steps=128, max_path_length=6)
    return g, complete(make_theory(g, eqs), tiny), tiny


def test_prove_unknown_when_partial():
    g, theory, tiny = _starved_two_loops()
    assert theory.status == PARTIAL
    outcome = prove_equal(theory, g.edge_path("a"), g.edge_path("b"), tiny)
    assert outcome.is_unknown


def test_prove_search_succeeds_when_partial():
    # a.a.a = a is not joinable by the (starved) rules alone at budget 1,
    # but the bidirectional search over raw equations finds it.
    g, theory, tiny = _starved_two_loops()
    p = g.path(("a", "a", "a"))
    outcome = prove_equal(theory, p, g.edge_path("a"), tiny)
    assert outcome.is_proven
    assert verify_trace(theory, p, g.edge_path("a"), outcome.trace)


def test_enumerate_truncated_by_loop(empdept):
    hs = enumerate_paths(empdept.theory, "Dept", "Dept")
    assert not hs.complete
    assert Path("Dept") in hs.paths


def test_enumerate_single_node():
    g = Graph(["a"], [])
    theory = complete(make_theory(g, []))
    hs = enumerate_paths(theory, "a", "a")
    assert hs.complete and hs.paths == (Path("a"),)


def test_enumerate_idempotent_loop_complete():
    g = Graph(["a"], [Edge("e", "a", "a")])
    theory = complete(make_theory(g, [equation_from_text(g, "e.e = e")]))
    hs = enumerate_paths(theory, "a", "a")
    assert hs.complete
    assert [str(p) for p in hs.paths] == ["id:a", "e"]


def test_enumerate_emp_to_string_by_hand(empdept):
    # Independent oracle: every raw word Emp -> String of length <= 3,
    # filtered for irreducibility, written out by hand from the graph.
    expected = {
        "name",
        "mgr.name",
        "works.dname",
        "mgr.mgr.name",
        "mgr.works.dname",
        "works.admin.name",
    }
    hs = enumerate_paths(empdept.theory, "Emp", "String", Budget(max_path_length=3))
    assert {str(p) for p in hs.paths} == expected
    assert not hs.complete  # mgr chains keep going past any bound


def test_theory_serialization_deterministic(empdept):
    g = empdept.graph
    eqs = list(empdept.equations)
    t1 = complete(make_theory(g, eqs))
    t2 = complete(make_theory(g, eqs))
    assert json.dumps(t1.to_dict(), sort_keys=True) == json.dumps(t2.to_dict(), sort_keys=True)


def _random_presentation(rng: random.Random):
    n = rng.randint(1, 3)
    nodes = [f"n{i}" for i in range(n)]
    edges = [
        Edge(f"e{k}", rng.choice(nodes), rng.choice(nodes))
        for k in range(rng.randint(1, 4))
    ]
    graph = Graph(nodes, edges)

    def random_path(start=None, max_len=4):
        cur = start if start is not None else rng.choice(nodes)
        p = Path(cur)
        for _ in range(rng.randint(0, max_len)):
            outs = graph.edges_from[cur]
            if not outs:
                break
            e = rng.choice(outs)
            p = Path(p.start, p.edges + (e.name,))
            cur = e.dst
        return p

    eqs = []
    for _ in range(rng.randint(0, 3)):
        p = random_path()
        q = random_path(p.start)
        if graph.end(p) == graph.end(q) and p != q:
            eqs.append(PathEquation(p, q))
    budget = Budget(max_completion_iterations=300, max_rewrite_steps=2000, max_path_length=10)
    return graph, complete(make_theory(graph, eqs), budget), random_path, budget


def test_property_normalize_idempotent_and_endpoint_preserving():
    rng = random.Random(72)
    for _ in range(120):
        graph, theory, random_path, budget = _random_presentation(rng)
        p = random_path()
        nf = normalize(p, theory, budget)
        assert normalize(nf, theory, budget) == nf
        assert nf.start == p.start and graph.end(nf) == graph.end(p)


def test_property_steps_strictly_decrease():
    rng = random.Random(73)
    for _ in range(80):
        _, theory, random_path, budget = _random_presentation(rng)
        p = random_path()
        _, steps = normalize_with_trace(p, theory, budget)
        for s in steps:
            assert s.after.key() < s.before.key()


def test_property_convergent_never_unknown_and_traces_verify():
    rng = random.Random(74)
    seen_convergent = 0
    for _ in range(150):
        graph, theory, random_path, budget = _random_presentation(rng)
        p = random_path()
        q = random_path(p.start)
        if graph.end(p) != graph.end(q):
            continue
        outcome = prove_equal(theory, p, q, budget)
        if theory.status == CONVERGENT:
            seen_convergent += 1
            assert not outcome.is_unknown
        if outcome.is_proven:
            assert verify_trace(theory, p, q, outcome.trace)
    assert seen_convergent > 30


def test_verify_trace_rejects_tampering(empdept):
    g = empdept.graph
    p = path_from_text(g, "admin.works.admin.works")
    q = g.identity("Dept")
    outcome = prove_equal(empdept.theory, p, q)
    broken = list(outcome.trace)
    broken[0] = type(broken[0])(
        before=broken[0].before,
        after=broken[0].after,
        position=broken[0].position + 1,
        source=broken[0].source,
        index=broken[0].index,
        forward=broken[0].forward,
    )
    assert not verify_trace(empdept.theory, p, q, tuple(broken))
