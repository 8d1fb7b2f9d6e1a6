"""Schemas: a typed multigraph plus path equations, completed into a theory.

Entity nodes carry finite carriers in instances; type nodes are the two
builtin literal carriers (String and Int) and never have outgoing edges, so
every path stays inside entity nodes until a final attribute hop.
"""

from __future__ import annotations

import warnings

from .errors import ValidationError, Violation
from .paths import (
    Budget,
    DEFAULT_BUDGET,
    Edge,
    Graph,
    Path,
    PathEquation,
    PathSet,
    Theory,
    complete,
    enumerate_paths,
    path_from_text,
)

BUILTIN_TYPES = ("String", "Int")

RESERVED_EDGE_NAMES = ("id",)  # `id:Node` is path syntax


class Schema:
    """A validated presentation: build these with :func:`validate_schema`."""

    def __init__(self, name, entities, types, graph, equations, theory):
        self.name: str = name
        self.entities: tuple[str, ...] = tuple(entities)
        self.types: tuple[str, ...] = tuple(types)
        self.graph: Graph = graph
        self.equations: tuple[PathEquation, ...] = tuple(equations)
        self.theory: Theory = theory
        self._entity_set = frozenset(self.entities)
        self._type_set = frozenset(self.types)

    def is_entity(self, node: str) -> bool:
        return node in self._entity_set

    def is_type(self, node: str) -> bool:
        return node in self._type_set

    @property
    def nodes(self) -> tuple[str, ...]:
        return self.entities + self.types

    def edges(self) -> tuple[Edge, ...]:
        return tuple(self.graph.edges.values())

    def edges_from(self, node: str) -> tuple[Edge, ...]:
        return self.graph.edges_from[node]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Schema):
            return NotImplemented
        return (
            self.entities == other.entities
            and self.types == other.types
            and self.graph == other.graph
            and self.equations == other.equations
        )

    __hash__ = None

    def __repr__(self) -> str:
        return (
            f"Schema({self.name!r}, entities={len(self.entities)}, "
            f"types={len(self.types)}, edges={len(self.graph.edges)}, "
            f"equations={len(self.equations)})"
        )


def _resolve_equation_spec(graph: Graph, spec) -> PathEquation:
    """Accept a PathEquation, a pair of path texts, or a pair of syntax tuples.

    Syntax tuples are what the frontend hands over: ``("id", node)`` or
    ``("word", (edge, ...))``.
    """
    if isinstance(spec, PathEquation):
        return spec
    lhs_spec, rhs_spec = spec

    def build(side) -> Path:
        if isinstance(side, str):
            return path_from_text(graph, side)
        kind, payload = side
        if kind == "id":
            return graph.identity(payload)
        return graph.path(tuple(payload))

    return PathEquation(build(lhs_spec), build(rhs_spec))


def validate_schema(
    name: str,
    entities,
    types,
    edges,
    equations=(),
    *,
    budget: Budget = DEFAULT_BUDGET,
) -> Schema:
    """Check every invariant and return the schema with its completed theory.

    All violations are collected and reported together.  Degenerate
    equations (identical sides) are dropped with a warning rather than
    reported, since they constrain nothing.
    """
    entities = tuple(entities)
    types = tuple(types)
    edges = tuple(edges)
    violations: list[Violation] = []

    seen_nodes: set[str] = set()
    for n in entities + types:
        if n in seen_nodes:
            violations.append(Violation("duplicate-name", f"node {n!r} declared twice"))
        seen_nodes.add(n)
    for t in types:
        if t not in BUILTIN_TYPES:
            violations.append(
                Violation(
                    "unknown-type",
                    f"type node {t!r} is not a builtin (expected one of {', '.join(BUILTIN_TYPES)})",
                )
            )

    type_set = set(types)
    seen_edges: set[str] = set()
    for ename, src, dst in edges:
        if ename in seen_edges:
            violations.append(Violation("duplicate-name", f"edge {ename!r} declared twice"))
        seen_edges.add(ename)
        if ename in RESERVED_EDGE_NAMES:
            violations.append(Violation("reserved-name", f"edge name {ename!r} is reserved"))
        if ename in seen_nodes:
            violations.append(
                Violation("duplicate-name", f"edge {ename!r} collides with a node name")
            )
        for endpoint, role in ((src, "source"), (dst, "target")):
            if endpoint not in seen_nodes:
                violations.append(
                    Violation(
                        "dangling-edge",
                        f"edge {ename!r} has undeclared {role} node {endpoint!r}",
                    )
                )
        if src in type_set:
            violations.append(
                Violation(
                    "edge-from-type-node",
                    f"edge {ename!r} starts at type node {src!r}; type nodes only receive edges",
                )
            )

    if violations:
        raise ValidationError(f"schema {name}", violations)

    graph = Graph(entities + types, [Edge(e, s, d) for e, s, d in edges])

    resolved: list[PathEquation] = []
    for spec in equations:
        try:
            eq = _resolve_equation_spec(graph, spec)
        except Exception as exc:  # unknown edge, non-composable word, ...
            violations.append(Violation("ill-typed-equation", str(exc)))
            continue
        lhs_end = graph.end(eq.lhs)
        rhs_end = graph.end(eq.rhs)
        if eq.lhs.start != eq.rhs.start or lhs_end != rhs_end:
            violations.append(
                Violation(
                    "ill-typed-equation",
                    f"equation {eq}: endpoints {eq.lhs.start} -> {lhs_end} vs "
                    f"{eq.rhs.start} -> {rhs_end}",
                )
            )
            continue
        if eq.lhs == eq.rhs:
            warnings.warn(f"schema {name}: dropping degenerate equation {eq}", stacklevel=2)
            continue
        resolved.append(eq)

    if violations:
        raise ValidationError(f"schema {name}", violations)

    theory = complete(Theory(graph, tuple(resolved)), budget)
    return Schema(name, entities, types, graph, tuple(resolved), theory)


def hom_set(schema: Schema, a: str, b: str, budget: Budget = DEFAULT_BUDGET) -> PathSet:
    """Irreducible paths ``a -> b`` in the schema, with a completeness flag."""
    return enumerate_paths(schema.theory, a, b, budget)
