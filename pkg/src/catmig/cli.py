"""Command-line interface.

Exit codes follow one convention everywhere: 0 for success (proven, no
violations, functorial), 1 for a domain failure (refuted, violations found,
not functorial, divergence), 2 for unknown/undetermined outcomes and usage
errors.  All output is deterministic.
"""

from __future__ import annotations

import argparse
import json
import sys

from .errors import (
    CatmigError,
    EndpointMismatch,
    ParseError,
    UndeterminedMapping,
    UnresolvedReference,
    ValidationError,
)
from .instance import check_constraints, enumerate_homs
from .mapping import FUNCTORIAL, NOT_FUNCTORIAL, check_functoriality
from .migrate import MigrationLimits, delta, pi, sigma
from .paths import Budget, PROVEN, REFUTED, equation_from_text, prove_equal
from .source import SourceFile, instance_to_decl, load_file, print_source
from .tabular import atomic_write, export_csv


def _common_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("file", help="source file to load")
    p.add_argument(
        "--include",
        action="append",
        default=[],
        metavar="FILE",
        help="additional source file whose declarations are in scope (repeatable)",
    )
    p.add_argument("--max-kb-steps", type=int, default=2048, metavar="N",
                   help="completion iteration budget (default 2048)")
    p.add_argument("--max-path-len", type=int, default=12, metavar="N",
                   help="path length bound for proving and enumeration (default 12)")
    p.add_argument("--max-chase-rounds", type=int, default=1000, metavar="N",
                   help="chase round limit for sigma (default 1000)")
    p.add_argument("--max-elements", type=int, default=100000, metavar="N",
                   help="materialized element limit (default 100000)")


def _budget(args) -> Budget:
    return Budget(
        max_completion_iterations=args.max_kb_steps,
        max_path_length=args.max_path_len,
    )


def _limits(args) -> MigrationLimits:
    return MigrationLimits(
        max_chase_rounds=args.max_chase_rounds,
        max_elements=args.max_elements,
        comma_path_bound=args.max_path_len,
        budget=_budget(args),
    )


def _load(args):
    return load_file(args.file, includes=tuple(args.include), budget=_budget(args))


def _fail(message: str, code: int) -> int:
    print(f"error: {message}", file=sys.stderr)
    return code


def cmd_validate(args) -> int:
    lib = _load(args)
    print(
        f"ok: {len(lib.schemas)} schema(s), {len(lib.instances)} instance(s), "
        f"{len(lib.mappings)} mapping(s)"
    )
    return 0


def cmd_check(args) -> int:
    lib = _load(args)
    if args.instance not in lib.instances:
        return _fail(f"no instance named {args.instance!r}", 2)
    report = check_constraints(lib.instances[args.instance])
    for entry in report.entries:
        print(f"violation: {entry}")
    if report.ok:
        print(f"ok: {args.instance} satisfies all constraints")
        return 0
    print(f"{len(report.entries)} violation(s)")
    return 1


def cmd_prove(args) -> int:
    lib = _load(args)
    if args.schema not in lib.schemas:
        return _fail(f"no schema named {args.schema!r}", 2)
    schema = lib.schemas[args.schema]
    try:
        eq = equation_from_text(schema.graph, args.equation)
    except CatmigError as exc:
        return _fail(str(exc), 2)
    outcome = prove_equal(schema.theory, eq.lhs, eq.rhs, _budget(args))
    print(outcome.describe())
    if outcome.verdict == PROVEN:
        return 0
    if outcome.verdict == REFUTED:
        return 1
    return 2


def cmd_map_check(args) -> int:
    lib = _load(args)
    if args.mapping not in lib.mappings:
        return _fail(f"no mapping named {args.mapping!r}", 2)
    mapping = lib.mappings[args.mapping]
    verdict = check_functoriality(mapping, _budget(args))
    print(f"{verdict.status}")
    for i, (eq, outcome) in enumerate(verdict.outcomes):
        print(f"  equation {i}: {eq} ... {outcome.verdict}")
    if verdict.status == NOT_FUNCTORIAL:
        lhs, rhs = verdict.witness
        print(f"  witness: normal forms {lhs} vs {rhs}")
        return 1
    return 0 if verdict.status == FUNCTORIAL else 2


def cmd_migrate(args) -> int:
    lib = _load(args)
    if args.mapping not in lib.mappings:
        return _fail(f"no mapping named {args.mapping!r}", 2)
    if args.instance not in lib.instances:
        return _fail(f"no instance named {args.instance!r}", 2)
    if args.provenance and args.kind != "sigma":
        return _fail("--provenance is only meaningful with --kind sigma", 2)
    mapping = lib.mappings[args.mapping]
    instance = lib.instances[args.instance]
    limits = _limits(args)
    out_name = args.out_name or f"{args.instance}_{args.kind}"
    provenance = None
    if args.kind == "delta":
        result = delta(
            mapping, instance, budget=limits.budget, allow_undetermined=args.allow_undetermined
        )
    elif args.kind == "sigma":
        result, provenance = sigma(
            mapping, instance, limits, allow_undetermined=args.allow_undetermined
        )
    else:
        result = pi(mapping, instance, limits, allow_undetermined=args.allow_undetermined)
    text = print_source(SourceFile([instance_to_decl(out_name, result)]))
    atomic_write(args.output, text)
    sizes = ", ".join(f"{n}={len(result.carriers[n])}" for n in result.schema.entities)
    print(f"{args.kind}: wrote {out_name} on {result.schema.name} ({sizes}) to {args.output}")
    if args.csv:
        for path in export_csv(result, args.csv):
            print(f"csv: {path}")
    if args.provenance:
        nested: dict[str, dict[str, str]] = {}
        for (node, element), target in sorted(provenance.items()):
            nested.setdefault(node, {})[element] = target
        atomic_write(args.provenance, json.dumps(nested, indent=2, sort_keys=True) + "\n")
        print(f"provenance: {args.provenance}")
    return 0


def cmd_homs(args) -> int:
    lib = _load(args)
    for name in (args.source, args.target):
        if name not in lib.instances:
            return _fail(f"no instance named {name!r}", 2)
    search = enumerate_homs(lib.instances[args.source], lib.instances[args.target], args.cap)
    status = "complete" if search.complete else "capped"
    print(f"{len(search.homs)} hom(s) ({status})")
    for i, hom in enumerate(search.homs):
        parts = []
        for node in hom.source.schema.entities:
            for x, y in hom.components[node].items():
                parts.append(f"{node}.{x}->{y}")
        print(f"  #{i}: " + (", ".join(parts) if parts else "<empty>"))
    return 0 if search.complete else 2


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="catmig",
        description="Validate, prove over, and migrate categorical databases.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="parse and validate every declaration")
    _common_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("check", help="check an instance against its schema equations")
    _common_flags(p)
    p.add_argument("--instance", required=True)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("prove", help="prove or refute a path equation")
    _common_flags(p)
    p.add_argument("--schema", required=True)
    p.add_argument("equation", help="equation text, e.g. 'admin.works = id:Dept'")
    p.set_defaults(func=cmd_prove)

    p = sub.add_parser("map-check", help="check a mapping's functoriality")
    _common_flags(p)
    p.add_argument("--mapping", required=True)
    p.set_defaults(func=cmd_map_check)

    p = sub.add_parser("migrate", help="run a data migration")
    _common_flags(p)
    p.add_argument("--kind", required=True, choices=("delta", "sigma", "pi"))
    p.add_argument("--mapping", required=True)
    p.add_argument("--instance", required=True)
    p.add_argument("-o", "--output", required=True, help="output source file")
    p.add_argument("--as", dest="out_name", default=None, help="name of the output instance")
    p.add_argument("--csv", default=None, metavar="DIR", help="also export CSV files")
    p.add_argument("--provenance", default=None, metavar="FILE",
                   help="write the sigma provenance map as JSON")
    p.add_argument("--allow-undetermined", action="store_true",
                   help="migrate even when functoriality is undetermined")
    p.set_defaults(func=cmd_migrate)

    p = sub.add_parser("homs", help="enumerate homomorphisms between two instances")
    _common_flags(p)
    p.add_argument("--from", dest="source", required=True)
    p.add_argument("--to", dest="target", required=True)
    p.add_argument("--cap", type=int, default=10000)
    p.set_defaults(func=cmd_homs)
    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except (ParseError, UnresolvedReference, ValidationError) as exc:
        return _fail(str(exc), 1)
    except UndeterminedMapping as exc:
        return _fail(str(exc), 2)
    except EndpointMismatch as exc:
        return _fail(str(exc), 2)
    except OSError as exc:
        return _fail(str(exc), 1)
    except CatmigError as exc:
        return _fail(str(exc), 1)


if __name__ == "__main__":
    sys.exit(main())
