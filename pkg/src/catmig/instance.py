"""Finite instances over a schema and the morphisms between them.

An instance assigns a finite carrier of element ids to every entity node and
a total function to every edge; attribute edges land in literals (str for
String, int for Int).  Morphisms are per-node functions that commute with
every edge and leave literals fixed, which is exactly naturality checked on
the generating edges.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import CatmigError, SchemaMismatch, ValidationError, Violation
from .paths import Path
from .schema import Schema


def _literal_ok(value, type_node: str) -> bool:
    if type_node == "String":
        return type(value) is str
    if type_node == "Int":
        return type(value) is int
    return False


@dataclass(frozen=True)
class ReportEntry:
    """One mismatch: where it happened and the two values that disagree."""

    context: str  # e.g. "equation admin.works = id:Dept" or "edge works"
    element: str
    lhs: object
    rhs: object

    def __str__(self) -> str:
        return f"{self.context} at {self.element}: {self.lhs!r} != {self.rhs!r}"


@dataclass(frozen=True)
class ViolationReport:
    entries: tuple[ReportEntry, ...]

    @property
    def ok(self) -> bool:
        return not self.entries

    def lines(self) -> list[str]:
        return [str(e) for e in self.entries]


class Instance:
    """A validated instance; build these with :func:`validate_instance`."""

    def __init__(self, schema: Schema, carriers, edge_maps):
        self.schema = schema
        self.carriers: dict[str, tuple[str, ...]] = {
            n: tuple(xs) for n, xs in carriers.items()
        }
        self.edge_maps: dict[str, dict[str, object]] = {
            e: dict(m) for e, m in edge_maps.items()
        }

    def carrier(self, node: str) -> tuple[str, ...]:
        return self.carriers[node]

    def edge_map(self, edge: str) -> dict[str, object]:
        return self.edge_maps[edge]

    def size(self) -> int:
        return sum(len(xs) for xs in self.carriers.values())

    def __eq__(self, other) -> bool:
        if not isinstance(other, Instance):
            return NotImplemented
        return (
            self.schema == other.schema
            and self.carriers == other.carriers
            and self.edge_maps == other.edge_maps
        )

    __hash__ = None

    def __repr__(self) -> str:
        parts = ", ".join(f"{n}:{len(xs)}" for n, xs in self.carriers.items())
        return f"Instance({self.schema.name!r}, {parts})"


def validate_instance(schema: Schema, carriers, edge_maps, *, name: str = "instance") -> Instance:
    """Totality and codomain checks; equations are check_constraints' job.

    Missing carriers are read as empty.  Carrier order and edge-map key order
    follow the input, so parsed instances keep their source order.
    """
    violations: list[Violation] = []
    norm_carriers: dict[str, tuple[str, ...]] = {}

    for node in carriers:
        if not schema.is_entity(node):
            violations.append(
                Violation("unknown-node", f"carrier declared for unknown entity node {node!r}")
            )
    for node in schema.entities:
        xs = tuple(carriers.get(node, ()))
        seen: set[str] = set()
        for x in xs:
            if x in seen:
                violations.append(
                    Violation("duplicate-element-id", f"element {x!r} repeats in carrier {node!r}")
                )
            seen.add(x)
        norm_carriers[node] = xs

    for ename in edge_maps:
        if ename not in schema.graph.edges:
            violations.append(Violation("unknown-edge", f"edge map for unknown edge {ename!r}"))

    norm_maps: dict[str, dict[str, object]] = {}
    for edge in schema.edges():
        given = dict(edge_maps.get(edge.name, {}))
        src_carrier = norm_carriers.get(edge.src, ())
        src_set = set(src_carrier)
        for x in given:
            if x not in src_set:
                violations.append(
                    Violation(
                        "unknown-element",
                        f"edge {edge.name!r} maps unknown element {x!r} of {edge.src!r}",
                    )
                )
        out: dict[str, object] = {}
        for x in src_carrier:
            if x not in given:
                violations.append(
                    Violation(
                        "missing-edge-value",
                        f"edge {edge.name!r} has no value for element {x!r} of {edge.src!r}",
                    )
                )
                continue
            v = given[x]
            if schema.is_entity(edge.dst):
                if v not in set(norm_carriers.get(edge.dst, ())):
                    violations.append(
                        Violation(
                            "unknown-element",
                            f"edge {edge.name!r} sends {x!r} to {v!r}, which is not in carrier {edge.dst!r}",
                        )
                    )
                    continue
            elif not _literal_ok(v, edge.dst):
                violations.append(
                    Violation(
                        "literal-type-mismatch",
                        f"edge {edge.name!r} sends {x!r} to {v!r}, not a {edge.dst} literal",
                    )
                )
                continue
            out[x] = v
        norm_maps[edge.name] = out

    if violations:
        raise ValidationError(name, violations)
    return Instance(schema, norm_carriers, norm_maps)


def eval_path(instance: Instance, path: Path, x: str):
    """Fold the edge maps along ``path`` starting from element ``x``."""
    if x not in set(instance.carriers.get(path.start, ())):
        raise CatmigError(f"element {x!r} is not in carrier {path.start!r}")
    cur: object = x
    for ename in path.edges:
        cur = instance.edge_maps[ename][cur]
    return cur


def check_constraints(instance: Instance) -> ViolationReport:
    """Evaluate every schema equation at every element of its start carrier."""
    entries: list[ReportEntry] = []
    for eq in instance.schema.equations:
        for x in instance.carriers.get(eq.lhs.start, ()):
            lv = eval_path(instance, eq.lhs, x)
            rv = eval_path(instance, eq.rhs, x)
            if lv != rv:
                entries.append(ReportEntry(f"equation {eq}", x, lv, rv))
    return ViolationReport(tuple(entries))


@dataclass
class InstanceMorphism:
    """Per-entity-node components; literals stay fixed, so no type components."""

    source: Instance
    target: Instance
    components: dict[str, dict[str, str]]

    def component(self, node: str) -> dict[str, str]:
        return self.components[node]

    def __eq__(self, other) -> bool:
        if not isinstance(other, InstanceMorphism):
            return NotImplemented
        return (
            self.source == other.source
            and self.target == other.target
            and self.components == other.components
        )


def make_hom(source: Instance, target: Instance, components) -> InstanceMorphism:
    """Structural validation only: totality and codomains, not naturality."""
    if source.schema != target.schema:
        raise SchemaMismatch("homomorphism endpoints live over different schemas")
    violations: list[Violation] = []
    norm: dict[str, dict[str, str]] = {}
    for node in source.schema.entities:
        comp = dict(components.get(node, {}))
        tgt = set(target.carriers[node])
        out: dict[str, str] = {}
        for x in source.carriers[node]:
            if x not in comp:
                violations.append(
                    Violation("missing-component", f"no image for {x!r} at node {node!r}")
                )
                continue
            if comp[x] not in tgt:
                violations.append(
                    Violation(
                        "unknown-element",
                        f"component at {node!r} sends {x!r} outside the target carrier",
                    )
                )
                continue
            out[x] = comp[x]
        norm[node] = out
    if violations:
        raise ValidationError("homomorphism", violations)
    return InstanceMorphism(source, target, norm)


def check_hom(h: InstanceMorphism) -> ViolationReport:
    """Naturality on every generating edge; attribute edges must agree on literals.

    Checking the generators suffices: both instances satisfy the schema
    equations, so commuting with every edge gives commuting with every path.
    """
    entries: list[ReportEntry] = []
    schema = h.source.schema
    for edge in schema.edges():
        comp_src = h.components[edge.src]
        for x in h.source.carriers[edge.src]:
            image_then_edge = h.target.edge_maps[edge.name][comp_src[x]]
            if schema.is_entity(edge.dst):
                edge_then_image = h.components[edge.dst][h.source.edge_maps[edge.name][x]]
                if edge_then_image != image_then_edge:
                    entries.append(
                        ReportEntry(f"edge {edge.name}", x, edge_then_image, image_then_edge)
                    )
            else:
                original = h.source.edge_maps[edge.name][x]
                if original != image_then_edge:
                    entries.append(
                        ReportEntry(f"attribute {edge.name}", x, original, image_then_edge)
                    )
    return ViolationReport(tuple(entries))


def identity_hom(instance: Instance) -> InstanceMorphism:
    return InstanceMorphism(
        instance,
        instance,
        {n: {x: x for x in instance.carriers[n]} for n in instance.schema.entities},
    )


def compose_homs(f: InstanceMorphism, g: InstanceMorphism) -> InstanceMorphism:
    """First ``f``, then ``g``."""
    if f.target != g.source:
        raise SchemaMismatch("middle instances of a composition differ")
    return InstanceMorphism(
        f.source,
        g.target,
        {
            n: {x: g.components[n][f.components[n][x]] for x in f.source.carriers[n]}
            for n in f.source.schema.entities
        },
    )


@dataclass(frozen=True)
class HomSearch:
    homs: tuple[InstanceMorphism, ...]
    complete: bool  # False when the cap cut the search short


def _hom_slots(source: Instance):
    """Element slots in the fixed search order, plus the checks each slot completes."""
    schema = source.schema
    slots: list[tuple[str, str]] = [
        (node, x) for node in schema.entities for x in source.carriers[node]
    ]
    index = {slot: i for i, slot in enumerate(slots)}
    # Each entry at slot k is either ("edge", i, ename, j) requiring
    # h[j] == target_edge(h[i]), or ("attr", ename, literal) at the slot itself.
    checks: list[list[tuple]] = [[] for _ in slots]
    for edge in schema.edges():
        for x in source.carriers[edge.src]:
            i = index[(edge.src, x)]
            if schema.is_entity(edge.dst):
                j = index[(edge.dst, source.edge_maps[edge.name][x])]
                checks[max(i, j)].append(("edge", i, edge.name, j))
            else:
                checks[i].append(("attr", edge.name, source.edge_maps[edge.name][x]))
    return slots, checks


def enumerate_homs(source: Instance, target: Instance, cap: int = 10000) -> HomSearch:
    """Backtracking over per-element images, pruning on naturality as soon as
    both ends of an edge constraint are assigned.  Deterministic: slots follow
    entity then carrier order, candidate images follow the target carrier."""
    if source.schema != target.schema:
        raise SchemaMismatch("hom search endpoints live over different schemas")
    slots, checks = _hom_slots(source)
    assigned: list[str | None] = [None] * len(slots)
    found: list[InstanceMorphism] = []
    capped = False

    def admissible(k: int) -> bool:
        for check in checks[k]:
            if check[0] == "edge":
                _, i, ename, j = check
                if target.edge_maps[ename][assigned[i]] != assigned[j]:
                    return False
            else:
                _, ename, literal = check
                if target.edge_maps[ename][assigned[k]] != literal:
                    return False
        return True

    def record() -> None:
        components: dict[str, dict[str, str]] = {
            n: {} for n in source.schema.entities
        }
        for (node, x), y in zip(slots, assigned):
            components[node][x] = y
        found.append(InstanceMorphism(source, target, components))

    def search(k: int) -> bool:
        nonlocal capped
        if k == len(slots):
            if len(found) >= cap:
                capped = True
                return False
            record()
            return True
        node, _ = slots[k]
        for y in target.carriers[node]:
            assigned[k] = y
            if admissible(k) and not search(k + 1):
                assigned[k] = None
                return False
        assigned[k] = None
        return True

    search(0)
    return HomSearch(tuple(found), not capped)


def iso_check(source: Instance, target: Instance) -> InstanceMorphism | None:
    """An invertible hom if one exists.

    A componentwise bijective natural transformation into Set has a natural
    inverse, so it is enough to search for a bijective hom.
    """
    if source.schema != target.schema:
        raise SchemaMismatch("iso check endpoints live over different schemas")
    for node in source.schema.entities:
        if len(source.carriers[node]) != len(target.carriers[node]):
            return None
    slots, checks = _hom_slots(source)
    assigned: list[str | None] = [None] * len(slots)
    used: dict[str, set[str]] = {n: set() for n in source.schema.entities}

    def admissible(k: int) -> bool:
        for check in checks[k]:
            if check[0] == "edge":
                _, i, ename, j = check
                if target.edge_maps[ename][assigned[i]] != assigned[j]:
                    return False
            else:
                _, ename, literal = check
                if target.edge_maps[ename][assigned[k]] != literal:
                    return False
        return True

    def search(k: int) -> InstanceMorphism | None:
        if k == len(slots):
            components: dict[str, dict[str, str]] = {n: {} for n in source.schema.entities}
            for (node, x), y in zip(slots, assigned):
                components[node][x] = y
            return InstanceMorphism(source, target, components)
        node, _ = slots[k]
        for y in target.carriers[node]:
            if y in used[node]:
                continue
            assigned[k] = y
            used[node].add(y)
            if admissible(k):
                hit = search(k + 1)
                if hit is not None:
                    return hit
            used[node].remove(y)
            assigned[k] = None
        return None

    return search(0)
