"""The three data migrations and the adjointness test harness.

``delta`` pulls a target-schema instance back along a mapping by
pre-composition.  ``sigma`` pushes forward freely: it seeds one generator per
source element and chases totality and the target equations to a fixpoint,
inventing labeled nulls and merging congruence classes as it goes.  ``pi``
pushes forward by limits: an output element at a target node is a compatible
family of choices indexed by the comma objects (source node, path from the
target node into its image).

All three refuse mappings whose functoriality verdict is negative, and an
undetermined verdict needs an explicit override; outputs of gated runs then
satisfy the target constraints by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (
    ElementLimitExceeded,
    LiteralCollision,
    NonConvergentTheory,
    NonFunctorialMapping,
    PiInfinite,
    SchemaMismatch,
    SigmaDivergence,
    UnconstrainedAttribute,
    UndeterminedMapping,
    HomSearchCapped,
)
from .instance import Instance, InstanceMorphism, enumerate_homs, eval_path, validate_instance
from .mapping import NOT_FUNCTORIAL, UNDETERMINED, Mapping, check_functoriality
from .paths import Budget, CONVERGENT, DEFAULT_BUDGET, Path, enumerate_paths, normalize
from .schema import Schema
from .unionfind import UnionFind


@dataclass(frozen=True)
class MigrationLimits:
    max_chase_rounds: int = 1000
    max_elements: int = 100_000
    comma_path_bound: int = 12
    budget: Budget = DEFAULT_BUDGET

    def __post_init__(self):
        for name in ("max_chase_rounds", "max_elements", "comma_path_bound"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_LIMITS = MigrationLimits()


def _require_functorial(mapping: Mapping, budget: Budget, allow_undetermined: bool) -> None:
    verdict = check_functoriality(mapping, budget)
    if verdict.status == NOT_FUNCTORIAL:
        lhs, rhs = verdict.witness
        raise NonFunctorialMapping(
            f"mapping is not functorial: source equation {verdict.failed_index} maps to "
            f"paths with distinct normal forms {lhs} vs {rhs}"
        )
    if verdict.status == UNDETERMINED and not allow_undetermined:
        raise UndeterminedMapping(
            "functoriality is undetermined for source equation(s) "
            f"{list(verdict.unknown_indices)}; rerun with the override to proceed anyway"
        )


def delta(
    mapping: Mapping,
    j: Instance,
    *,
    budget: Budget = DEFAULT_BUDGET,
    allow_undetermined: bool = False,
) -> Instance:
    """Pre-composition: carriers are copied from the image nodes, element ids
    included, and each edge evaluates its assigned path in the input."""
    _require_functorial(mapping, budget, allow_undetermined)
    if j.schema != mapping.target:
        raise SchemaMismatch("instance does not live on the mapping's target schema")
    src = mapping.source
    carriers = {c: j.carriers[mapping.nodes[c]] for c in src.entities}
    edge_maps: dict[str, dict[str, object]] = {}
    for edge in src.edges():
        path = mapping.edges[edge.name]
        edge_maps[edge.name] = {x: eval_path(j, path, x) for x in carriers[edge.src]}
    return validate_instance(src, carriers, edge_maps, name="delta output")


def delta_hom(
    mapping: Mapping,
    h: InstanceMorphism,
    *,
    budget: Budget = DEFAULT_BUDGET,
    allow_undetermined: bool = False,
) -> InstanceMorphism:
    """Components are copied along the node assignment."""
    src = delta(mapping, h.source, budget=budget, allow_undetermined=allow_undetermined)
    tgt = delta(mapping, h.target, budget=budget, allow_undetermined=allow_undetermined)
    components = {
        c: dict(h.components[mapping.nodes[c]]) for c in mapping.source.entities
    }
    return InstanceMorphism(src, tgt, components)


_UNSET = object()


class _Chase:
    """Working state for sigma: union-find over generators, nulls and literals,
    partial edge maps keyed by class root, and congruence propagation."""

    def __init__(self, target: Schema, limits: MigrationLimits):
        self.schema = target
        self.limits = limits
        self.uf = UnionFind()
        self.node_of: list[str] = []
        self.tags: list[tuple] = []  # ("gen", node, element) | ("null", k) | ("lit",)
        self.members_at: dict[str, list[int]] = {n: [] for n in target.nodes}
        self.edge_val: dict[str, dict[int, int]] = {e.name: {} for e in target.edges()}
        self.lit_of: dict[int, object] = {}  # class root -> literal value
        self.lit_member: dict[tuple[str, object], int] = {}
        self.null_count = 0
        self.element_count = 0
        self.changed = False

    def _new(self, node: str, tag: tuple) -> int:
        m = self.uf.make()
        self.node_of.append(node)
        self.tags.append(tag)
        self.members_at[node].append(m)
        if tag[0] != "lit":
            self.element_count += 1
            if self.element_count > self.limits.max_elements:
                raise SigmaDivergence(
                    f"chase exceeded the element limit ({self.limits.max_elements})"
                )
        return m

    def generator(self, node: str, source_node: str, element: str) -> int:
        return self._new(node, ("gen", source_node, element))

    def fresh_null(self, node: str) -> int:
        k = self.null_count
        self.null_count += 1
        self.changed = True
        return self._new(node, ("null", k))

    def literal(self, type_node: str, value) -> int:
        key = (type_node, value)
        m = self.lit_member.get(key)
        if m is None:
            m = self._new(type_node, ("lit",))
            self.lit_member[key] = m
            self.lit_of[m] = value
        return self.uf.find(m)

    def live_roots_at(self, node: str) -> list[int]:
        seen: set[int] = set()
        out: list[int] = []
        for m in self.members_at[node]:
            r = self.uf.find(m)
            if r not in seen:
                seen.add(r)
                out.append(r)
        return out

    def walk(self, member: int, path: Path) -> int:
        """Follow ``path`` from the class of ``member``, inventing a labeled
        null wherever an edge has no image yet."""
        cur = self.uf.find(member)
        for ename in path.edges:
            edge = self.schema.graph.edges[ename]
            table = self.edge_val[ename]
            cur = self.uf.find(cur)
            nxt = table.get(cur)
            if nxt is None:
                nxt = self.fresh_null(edge.dst)
                table[cur] = nxt
            cur = self.uf.find(nxt)
        return cur

    def merge(self, a: int, b: int) -> None:
        """Union with congruence: whenever both classes carry an image under
        the same edge, those images merge too.  Two distinct literals in one
        class is a hard error, not a state."""
        queue = [(a, b)]
        while queue:
            x, y = queue.pop()
            rx, ry = self.uf.find(x), self.uf.find(y)
            if rx == ry:
                continue
            la = self.lit_of.pop(rx, _UNSET)
            lb = self.lit_of.pop(ry, _UNSET)
            if la is not _UNSET and lb is not _UNSET and la != lb:
                raise LiteralCollision(
                    f"the mapping forces literals {la!r} and {lb!r} to be equal"
                )
            root, absorbed = self.uf.union(rx, ry)
            self.changed = True
            if la is not _UNSET:
                self.lit_of[root] = la
            elif lb is not _UNSET:
                self.lit_of[root] = lb
            for edge in self.schema.graph.edges_from[self.node_of[root]]:
                table = self.edge_val[edge.name]
                moved = table.pop(absorbed, None)
                if moved is None:
                    continue
                kept = table.get(root)
                if kept is None:
                    table[root] = moved
                elif self.uf.find(kept) != self.uf.find(moved):
                    queue.append((kept, moved))


def sigma(
    mapping: Mapping,
    i: Instance,
    limits: MigrationLimits = DEFAULT_LIMITS,
    *,
    allow_undetermined: bool = False,
) -> tuple[Instance, dict[tuple[str, str], str]]:
    """Free push-forward via the chase; also returns the provenance map
    sending each (source node, element) generator to its output element.

    Canonical output names: the least original element id in a class, else
    the least labeled null; name clashes within a node get a ``~k`` suffix in
    class-creation order.
    """
    _require_functorial(mapping, limits.budget, allow_undetermined)
    if i.schema != mapping.source:
        raise SchemaMismatch("instance does not live on the mapping's source schema")
    source, target = mapping.source, mapping.target
    chase = _Chase(target, limits)

    generators: dict[tuple[str, str], int] = {}
    for c in source.entities:
        for x in i.carriers[c]:
            generators[(c, x)] = chase.generator(mapping.nodes[c], c, x)

    # Each source edge pins down where its assigned path must send a generator.
    for edge in source.edges():
        path = mapping.edges[edge.name]
        for x in i.carriers[edge.src]:
            reached = chase.walk(generators[(edge.src, x)], path)
            value = i.edge_maps[edge.name][x]
            if source.is_entity(edge.dst):
                wanted = generators[(edge.dst, value)]
            else:
                wanted = chase.literal(edge.dst, value)
            chase.merge(reached, wanted)

    for _round in range(limits.max_chase_rounds):
        chase.changed = False
        for edge in target.edges():
            table = chase.edge_val[edge.name]
            for root in chase.live_roots_at(edge.src):
                if root not in table:
                    table[root] = chase.fresh_null(edge.dst)
        for eq in target.equations:
            for root in chase.live_roots_at(eq.lhs.start):
                left = chase.walk(root, eq.lhs)
                right = chase.walk(root, eq.rhs)
                if chase.uf.find(left) != chase.uf.find(right):
                    chase.merge(left, right)
        if not chase.changed:
            break
    else:
        raise SigmaDivergence(
            f"chase did not reach a fixpoint within {limits.max_chase_rounds} rounds"
        )

    return _extract_sigma(chase, mapping, generators)


def _extract_sigma(chase: _Chase, mapping: Mapping, generators) -> tuple[Instance, dict]:
    target = mapping.target
    name_of: dict[int, str] = {}
    carriers: dict[str, tuple[str, ...]] = {}
    for node in target.entities:
        groups: dict[int, list[int]] = {}
        for m in chase.members_at[node]:
            groups.setdefault(chase.uf.find(m), []).append(m)
        used: set[str] = set()
        order: list[tuple[tuple, str, int]] = []
        for root, members in groups.items():
            ids = sorted(
                chase.tags[m][2] for m in members if chase.tags[m][0] == "gen"
            )
            nulls = sorted(chase.tags[m][1] for m in members if chase.tags[m][0] == "null")
            preferred = ids[0] if ids else f"!{nulls[0]}"
            name = preferred
            suffix = 2
            while name in used:
                name = f"{preferred}~{suffix}"
                suffix += 1
            used.add(name)
            name_of[root] = name
            sort_key = (0, name, 0) if ids else (1, "", nulls[0])
            order.append((sort_key, name, root))
        order.sort(key=lambda item: item[0])
        carriers[node] = tuple(name for _, name, _ in order)

    edge_maps: dict[str, dict[str, object]] = {}
    for edge in target.edges():
        table = chase.edge_val[edge.name]
        out: dict[str, object] = {}
        for root in chase.live_roots_at(edge.src):
            value_root = chase.uf.find(table[root])
            if target.is_entity(edge.dst):
                out[name_of[root]] = name_of[value_root]
            else:
                literal = chase.lit_of.get(value_root, _UNSET)
                if literal is _UNSET:
                    raise UnconstrainedAttribute(
                        f"attribute {edge.name!r} of element {name_of[root]!r} at "
                        f"{edge.src!r} is not forced to any literal"
                    )
                out[name_of[root]] = literal
        edge_maps[edge.name] = out

    instance = validate_instance(target, carriers, edge_maps, name="sigma output")
    provenance = {
        key: name_of[chase.uf.find(member)] for key, member in generators.items()
    }
    return instance, provenance


def pi(
    mapping: Mapping,
    i: Instance,
    limits: MigrationLimits = DEFAULT_LIMITS,
    *,
    allow_undetermined: bool = False,
) -> Instance:
    """Push-forward by limits over comma categories.

    Output elements at a target node ``d`` are families: one source element
    per comma object ``(c, path d -> F(c))`` with ``c`` an entity node,
    compatible with every source edge.  Comma objects at type nodes must have
    their literal forced by compatibility.  The target theory must be
    convergent (normal forms stand for morphisms) and every comma enumeration
    must be complete within the configured path bound.
    """
    _require_functorial(mapping, limits.budget, allow_undetermined)
    if i.schema != mapping.source:
        raise SchemaMismatch("instance does not live on the mapping's source schema")
    source, target = mapping.source, mapping.target
    theory = target.theory
    if theory.status != CONVERGENT:
        raise NonConvergentTheory(
            "pi needs a convergent target theory; completion was only partial"
        )
    budget = limits.budget
    comma_budget = Budget(
        budget.max_completion_iterations, budget.max_rewrite_steps, limits.comma_path_bound
    )

    per_node: dict[str, dict] = {}
    total = 0
    for d in target.entities:
        slots: list[tuple[str, Path]] = []
        type_slots: list[tuple[str, Path]] = []
        for c in source.nodes:
            paths = enumerate_paths(theory, d, mapping.nodes[c], comma_budget)
            if not paths.complete:
                raise PiInfinite(
                    f"comma category at {d!r} is not finite within path bound "
                    f"{limits.comma_path_bound} (towards {mapping.nodes[c]!r})"
                )
            bucket = slots if source.is_entity(c) else type_slots
            for g in paths.paths:
                bucket.append((c, g))
        slot_ix = {s: k for k, s in enumerate(slots)}
        tslot_ix = {s: t for t, s in enumerate(type_slots)}

        edge_checks: list[list[tuple[int, str, int]]] = [[] for _ in slots]
        forcings: list[list[tuple[int, str]]] = [[] for _ in slots]
        forced_count = [0] * len(type_slots)
        for k, (c, g) in enumerate(slots):
            for edge in source.edges_from(c):
                translated = normalize(
                    target.graph.compose(g, mapping.edges[edge.name]), theory, budget
                )
                if source.is_entity(edge.dst):
                    j = slot_ix[(edge.dst, translated)]
                    edge_checks[max(k, j)].append((k, edge.name, j))
                else:
                    t = tslot_ix[(edge.dst, translated)]
                    forcings[k].append((t, edge.name))
                    forced_count[t] += 1
        for t, (c, g) in enumerate(type_slots):
            if forced_count[t] == 0:
                raise UnconstrainedAttribute(
                    f"comma object ({c}, {g}) at {d!r} is not determined by any source edge"
                )
        for edge in target.edges_from(d):
            if target.is_entity(edge.dst):
                continue
            attr_path = normalize(Path(d, (edge.name,)), theory, budget)
            if edge.dst not in source.types or (edge.dst, attr_path) not in tslot_ix:
                raise UnconstrainedAttribute(
                    f"attribute {edge.name!r} at {d!r} has no determining data in the source"
                )

        families: list[tuple[tuple[str, ...], tuple]] = []
        choices: list[str | None] = [None] * len(slots)
        forced: list = [_UNSET] * len(type_slots)

        def admissible(k: int, journal: list[int]) -> bool:
            for a, ename, b in edge_checks[k]:
                if i.edge_maps[ename][choices[a]] != choices[b]:
                    return False
            for t, ename in forcings[k]:
                value = i.edge_maps[ename][choices[k]]
                if forced[t] is _UNSET:
                    forced[t] = value
                    journal.append(t)
                elif forced[t] != value:
                    return False
            return True

        def search(k: int) -> None:
            if k == len(slots):
                if total + len(families) >= limits.max_elements:
                    raise ElementLimitExceeded(
                        f"pi output exceeded the element limit ({limits.max_elements})"
                    )
                families.append((tuple(choices), tuple(forced)))
                return
            c, _ = slots[k]
            for x in i.carriers[c]:
                choices[k] = x
                journal: list[int] = []
                if admissible(k, journal):
                    search(k + 1)
                for t in journal:
                    forced[t] = _UNSET
            choices[k] = None

        search(0)
        total += len(families)
        names = tuple(f"#{n}" for n in range(len(families)))
        per_node[d] = {
            "slots": slots,
            "slot_ix": slot_ix,
            "tslot_ix": tslot_ix,
            "families": families,
            "names": names,
            "by_choices": {fam[0]: name for fam, name in zip(families, names)},
        }

    carriers = {d: per_node[d]["names"] for d in target.entities}
    edge_maps: dict[str, dict[str, object]] = {}
    for edge in target.edges():
        info = per_node[edge.src]
        out: dict[str, object] = {}
        step = Path(edge.src, (edge.name,))
        if target.is_entity(edge.dst):
            info2 = per_node[edge.dst]
            reindex = [
                info["slot_ix"][(c, normalize(target.graph.compose(step, g), theory, budget))]
                for c, g in info2["slots"]
            ]
            for (choice_vec, _), name in zip(info["families"], info["names"]):
                key = tuple(choice_vec[r] for r in reindex)
                out[name] = info2["by_choices"][key]
        else:
            t = info["tslot_ix"][(edge.dst, normalize(step, theory, budget))]
            for (_, forced_vec), name in zip(info["families"], info["names"]):
                out[name] = forced_vec[t]
        edge_maps[edge.name] = out

    return validate_instance(target, carriers, edge_maps, name="pi output")


@dataclass(frozen=True)
class AdjointnessReport:
    """Hom-set cardinalities on the two sides of an adjunction candidate."""

    target_count: int
    source_count: int

    @property
    def equal(self) -> bool:
        return self.target_count == self.source_count


def adjointness_check_sigma(
    mapping: Mapping,
    i: Instance,
    j: Instance,
    limits: MigrationLimits = DEFAULT_LIMITS,
    cap: int = 10000,
) -> AdjointnessReport:
    """Compare |Hom(sigma(i), j)| on the target with |Hom(i, delta(j))| on the source."""
    pushed, _ = sigma(mapping, i, limits)
    target_side = enumerate_homs(pushed, j, cap)
    pulled = delta(mapping, j, budget=limits.budget)
    source_side = enumerate_homs(i, pulled, cap)
    if not target_side.complete or not source_side.complete:
        raise HomSearchCapped(f"hom enumeration hit the cap ({cap})")
    return AdjointnessReport(len(target_side.homs), len(source_side.homs))


def adjointness_check_pi(
    mapping: Mapping,
    i: Instance,
    j: Instance,
    limits: MigrationLimits = DEFAULT_LIMITS,
    cap: int = 10000,
) -> AdjointnessReport:
    """Compare |Hom(j, pi(i))| on the target with |Hom(delta(j), i)| on the source."""
    pushed = pi(mapping, i, limits)
    target_side = enumerate_homs(j, pushed, cap)
    pulled = delta(mapping, j, budget=limits.budget)
    source_side = enumerate_homs(pulled, i, cap)
    if not target_side.complete or not source_side.complete:
        raise HomSearchCapped(f"hom enumeration hit the cap ({cap})")
    return AdjointnessReport(len(target_side.homs), len(source_side.homs))
