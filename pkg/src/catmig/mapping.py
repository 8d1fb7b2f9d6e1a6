"""Schema mappings: functor presentations with machine-checked functoriality.

A mapping sends nodes to nodes and each edge to a path between the images.
That data is only a functor when every source equation maps to a provable
target equation, which is undecidable in general; the verdict is therefore
three-valued, mirroring the prover.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import SchemaMismatch, ValidationError, Violation
from .paths import (
    Budget,
    DEFAULT_BUDGET,
    Path,
    PathEquation,
    ProofOutcome,
    normalize,
    path_from_text,
    prove_equal,
)
from .schema import Schema

FUNCTORIAL = "functorial"
NOT_FUNCTORIAL = "not-functorial"
UNDETERMINED = "undetermined"


@dataclass(frozen=True)
class FunctorialityVerdict:
    status: str
    # One entry per source equation: the image equation and its proof outcome.
    outcomes: tuple[tuple[PathEquation, ProofOutcome], ...]
    failed_index: int | None = None  # first refuted equation, by index
    witness: tuple[Path, Path] | None = None  # distinct normal forms refuting it
    unknown_indices: tuple[int, ...] = ()

    @property
    def is_functorial(self) -> bool:
        return self.status == FUNCTORIAL


@dataclass(eq=False)
class Mapping:
    source: Schema
    target: Schema
    nodes: dict[str, str]
    edges: dict[str, Path]
    _verdicts: dict = field(default_factory=dict, repr=False)

    def node(self, n: str) -> str:
        return self.nodes[n]

    def edge(self, e: str) -> Path:
        return self.edges[e]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Mapping):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.nodes == other.nodes
            and self.edges == other.edges
        )

    def __repr__(self) -> str:
        return f"Mapping({self.source.name!r} -> {self.target.name!r})"


def validate_mapping(source: Schema, target: Schema, nodes, edges, *, name: str = "mapping") -> Mapping:
    """Totality and endpoint compatibility; functoriality is checked separately.

    Type nodes may be omitted: the only legal assignment is the same builtin
    in the target, so it is filled in.  Entity nodes must land on entity
    nodes, otherwise none of the migrations could materialize an output.
    """
    violations: list[Violation] = []
    node_map: dict[str, str] = {}

    given_nodes = dict(nodes)
    for n in given_nodes:
        if n not in source.nodes:
            violations.append(Violation("unknown-node", f"assignment for unknown node {n!r}"))

    for n in source.entities:
        if n not in given_nodes:
            violations.append(Violation("missing-assignment", f"entity node {n!r} is unassigned"))
            continue
        img = given_nodes[n]
        if img in target.types:
            violations.append(
                Violation("entity-to-type", f"entity node {n!r} maps to type node {img!r}")
            )
        elif not target.is_entity(img):
            violations.append(
                Violation("unknown-node", f"node {n!r} maps to unknown target node {img!r}")
            )
        else:
            node_map[n] = img
    for t in source.types:
        img = given_nodes.get(t, t)
        if img != t:
            violations.append(
                Violation("builtin-mismatch", f"type node {t!r} must map to itself, not {img!r}")
            )
        elif t not in target.types:
            violations.append(
                Violation("builtin-mismatch", f"target schema does not declare builtin {t!r}")
            )
        else:
            node_map[t] = t

    given_edges = dict(edges)
    for e in given_edges:
        if e not in source.graph.edges:
            violations.append(Violation("unknown-edge", f"assignment for unknown edge {e!r}"))

    edge_map: dict[str, Path] = {}
    for edge in source.edges():
        if edge.name not in given_edges:
            violations.append(
                Violation("missing-assignment", f"edge {edge.name!r} is unassigned")
            )
            continue
        spec = given_edges[edge.name]
        try:
            path = spec if isinstance(spec, Path) else path_from_text(target.graph, spec)
            end = target.graph.end(path)
        except Exception as exc:
            violations.append(
                Violation("ill-typed-path", f"edge {edge.name!r}: {exc}")
            )
            continue
        want_start = node_map.get(edge.src)
        want_end = node_map.get(edge.dst)
        if want_start is None or want_end is None:
            continue  # the node assignment already failed; avoid noise
        if path.start != want_start or end != want_end:
            violations.append(
                Violation(
                    "endpoint-mismatch",
                    f"edge {edge.name!r}: assigned path {path} runs "
                    f"{path.start} -> {end}, expected {want_start} -> {want_end}",
                )
            )
            continue
        edge_map[edge.name] = path

    if violations:
        raise ValidationError(name, violations)
    return Mapping(source, target, node_map, edge_map)


def apply_to_path(mapping: Mapping, p: Path) -> Path:
    """Homomorphic extension of the edge assignment; identities map to identities."""
    edges: tuple[str, ...] = ()
    for ename in p.edges:
        edges = edges + mapping.edges[ename].edges
    return Path(mapping.nodes[p.start], edges)


def check_functoriality(mapping: Mapping, budget: Budget = DEFAULT_BUDGET) -> FunctorialityVerdict:
    """Prove every source equation's image in the target theory and aggregate.

    Any refuted image makes the mapping not functorial (reported by first
    equation index, with the refuting normal forms); otherwise any unknown
    leaves it undetermined.  Verdicts are cached per budget on the mapping.
    """
    cached = mapping._verdicts.get(budget)
    if cached is not None:
        return cached
    outcomes: list[tuple[PathEquation, ProofOutcome]] = []
    failed_index: int | None = None
    witness: tuple[Path, Path] | None = None
    unknown: list[int] = []
    theory = mapping.target.theory
    for i, eq in enumerate(mapping.source.equations):
        image = PathEquation(apply_to_path(mapping, eq.lhs), apply_to_path(mapping, eq.rhs))
        outcome = prove_equal(theory, image.lhs, image.rhs, budget)
        outcomes.append((image, outcome))
        if outcome.is_refuted and failed_index is None:
            failed_index = i
            witness = (
                normalize(image.lhs, theory, budget),
                normalize(image.rhs, theory, budget),
            )
        elif outcome.is_unknown:
            unknown.append(i)
    if failed_index is not None:
        verdict = FunctorialityVerdict(
            NOT_FUNCTORIAL, tuple(outcomes), failed_index=failed_index, witness=witness
        )
    elif unknown:
        verdict = FunctorialityVerdict(
            UNDETERMINED, tuple(outcomes), unknown_indices=tuple(unknown)
        )
    else:
        verdict = FunctorialityVerdict(FUNCTORIAL, tuple(outcomes))
    mapping._verdicts[budget] = verdict
    return verdict


def identity_mapping(schema: Schema) -> Mapping:
    return Mapping(
        schema,
        schema,
        {n: n for n in schema.nodes},
        {e.name: Path(e.src, (e.name,)) for e in schema.edges()},
    )


def compose_mappings(f: Mapping, g: Mapping) -> Mapping:
    """First ``f``, then ``g``; paths are translated edge by edge."""
    if f.target != g.source:
        raise SchemaMismatch(
            f"cannot compose: {f.target.name!r} is not {g.source.name!r}"
        )
    return Mapping(
        f.source,
        g.target,
        {n: g.nodes[img] for n, img in f.nodes.items()},
        {e: apply_to_path(g, p) for e, p in f.edges.items()},
    )
