"""Shared test utilities: the employees/departments fixture, an independent
brute-force homomorphism oracle, and seeded random generators for schemas,
instances and mappings.

The brute-force oracle deliberately avoids the production search: it takes
the full cartesian product of component functions and filters with check_hom,
so enumerate_homs can be validated against it.
"""

from __future__ import annotations

import itertools
import random

from catmig import (
    Budget,
    CONVERGENT,
    InstanceMorphism,
    Path,
    PathEquation,
    check_constraints,
    check_hom,
    hom_set,
    validate_instance,
    validate_mapping,
    validate_schema,
)

EMPDEPT_EDGES = [
    ("mgr", "Emp", "Emp"),
    ("works", "Emp", "Dept"),
    ("name", "Emp", "String"),
    ("admin", "Dept", "Emp"),
    ("dname", "Dept", "String"),
]


def empdept_schema():
    return validate_schema(
        "S", ["Emp", "Dept"], ["String"], EMPDEPT_EDGES, [("admin.works", "id:Dept")]
    )


def empdept_tables(schema, *, fixed_admin: bool):
    admin = {"q10": "101", "x02": "102"} if fixed_admin else {"q10": "102", "x02": "101"}
    return validate_instance(
        schema,
        {"Emp": ["101", "102", "103"], "Dept": ["q10", "x02"]},
        {
            "mgr": {"101": "103", "102": "102", "103": "103"},
            "works": {"101": "q10", "102": "x02", "103": "q10"},
            "name": {"101": "Al", "102": "Bob", "103": "Carl"},
            "admin": admin,
            "dname": {"q10": "CS", "x02": "Math"},
        },
    )


def brute_force_homs(source, target):
    """Every structure-preserving map, found the slow way."""
    nodes = source.schema.entities
    per_node = []
    for n in nodes:
        src, tgt = source.carriers[n], target.carriers[n]
        per_node.append(
            [dict(zip(src, images)) for images in itertools.product(tgt, repeat=len(src))]
        )
    homs = []
    for combo in itertools.product(*per_node):
        h = InstanceMorphism(source, target, {n: dict(c) for n, c in zip(nodes, combo)})
        if check_hom(h).ok:
            homs.append(h)
    return homs


def hom_candidate_count(source, target) -> int:
    total = 1
    for n in source.schema.entities:
        total *= len(target.carriers[n]) ** len(source.carriers[n])
    return total


LITERALS = ["Al", "Bob", "Carl", "Dana"]


def random_dag_schema(rng: random.Random, prefix: str, *, max_entities=3, max_edges=3,
                      attr_prob=0.4, equation_prob=0.4):
    """A schema whose graph is acyclic, so hom-sets are finite and sigma's
    chase terminates.  Sometimes adds one parallel-path equation (kept only
    when completion converges, which it does on these word lengths)."""
    n = rng.randint(1, max_entities)
    entities = [f"{prefix}{i}" for i in range(n)]
    edges: list[tuple[str, str, str]] = []
    if n >= 2:
        for t in range(rng.randint(0, max_edges)):
            i = rng.randrange(0, n - 1)
            j = rng.randrange(i + 1, n)
            edges.append((f"{prefix}e{t}", entities[i], entities[j]))
    types: set[str] = set()
    a = 0
    for ent in entities:
        if rng.random() < attr_prob:
            tname = rng.choice(["String", "Int"])
            types.add(tname)
            edges.append((f"{prefix}a{a}", ent, tname))
            a += 1
    schema = validate_schema(prefix, entities, sorted(types), edges, [])
    if rng.random() < equation_prob:
        pairs = []
        short = Budget(max_path_length=4)
        for x in entities:
            for y in entities + sorted(types):
                paths = hom_set(schema, x, y, short).paths
                pairs.extend(
                    (p, q) for p, q in itertools.combinations(paths, 2) if p.edges != q.edges
                )
        if pairs:
            lhs, rhs = rng.choice(pairs)
            candidate = validate_schema(
                prefix, entities, sorted(types), edges, [PathEquation(lhs, rhs)]
            )
            if candidate.theory.status == CONVERGENT:
                schema = candidate
    return schema


def random_instance(rng: random.Random, schema, *, max_elems=3, min_elems=0, attempts=400):
    """A valid, constraint-satisfying instance, by rejection sampling."""
    for _ in range(attempts):
        carriers = {
            n: [f"{n}_{i}" for i in range(rng.randint(min_elems, max_elems))]
            for n in schema.entities
        }
        edge_maps: dict[str, dict[str, object]] = {}
        feasible = True
        for e in schema.edges():
            m: dict[str, object] = {}
            for x in carriers[e.src]:
                if schema.is_entity(e.dst):
                    if not carriers[e.dst]:
                        feasible = False
                        break
                    m[x] = rng.choice(carriers[e.dst])
                elif e.dst == "String":
                    m[x] = rng.choice(LITERALS)
                else:
                    m[x] = rng.randint(0, 3)
            if not feasible:
                break
            edge_maps[e.name] = m
        if not feasible:
            continue
        inst = validate_instance(schema, carriers, edge_maps)
        if check_constraints(inst).ok:
            return inst
    raise RuntimeError(f"no satisfying instance found for {schema.name} in {attempts} tries")


def random_mapping_into(rng: random.Random, target, prefix: str, *, max_entities=2,
                        max_edges=3, path_len=3):
    """A mapping from a fresh equation-free schema into ``target``.

    With no source equations, functoriality holds vacuously, so these are
    safe inputs for the migration gates.
    """
    n = rng.randint(1, max_entities)
    entities = [f"{prefix}{i}" for i in range(n)]
    assign = {c: rng.choice(target.entities) for c in entities}
    short = Budget(max_path_length=path_len)
    edges: list[tuple[str, str, str]] = []
    emap: dict[str, Path] = {}
    types: set[str] = set()
    k = 0
    for _ in range(rng.randint(0, max_edges)):
        src = rng.choice(entities)
        if target.types and rng.random() < 0.3:
            tname = rng.choice(target.types)
            paths = hom_set(target, assign[src], tname, short).paths
            if not paths:
                continue
            ename = f"{prefix}e{k}"
            k += 1
            types.add(tname)
            edges.append((ename, src, tname))
            emap[ename] = rng.choice(paths)
        else:
            dst = rng.choice(entities)
            paths = hom_set(target, assign[src], assign[dst], short).paths
            if not paths:
                continue
            ename = f"{prefix}e{k}"
            k += 1
            edges.append((ename, src, dst))
            emap[ename] = rng.choice(paths)
    source = validate_schema(prefix, entities, sorted(types), edges, [])
    return validate_mapping(source, target, assign, emap)
