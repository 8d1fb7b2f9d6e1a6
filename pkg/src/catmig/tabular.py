"""CSV and triple views of an instance.

One CSV file per entity node, header ``id,<edge>,...`` with the node's
outgoing edges in declaration order; String literals are always quoted, ids
and Int literals stay bare.  Triples are (subject, edge, object) with one
triple per element and outgoing edge.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

from .errors import HeaderMismatch, ValidationError, Violation
from .instance import Instance, validate_instance
from .schema import Schema


def atomic_write(path: str, text: str) -> None:
    tmp = path + ".tmp"
    with open(tmp, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)
    os.replace(tmp, path)


def _csv_quote(value: str) -> str:
    return '"' + value.replace('"', '""') + '"'


def export_csv(instance: Instance, directory: str) -> list[str]:
    """Write one ``<Node>.csv`` per entity node; returns the paths written."""
    os.makedirs(directory, exist_ok=True)
    schema = instance.schema
    written: list[str] = []
    for node in schema.entities:
        edges = schema.edges_from(node)
        lines = ["id," + ",".join(e.name for e in edges) if edges else "id"]
        for x in instance.carriers[node]:
            fields = [x]
            for e in edges:
                v = instance.edge_maps[e.name][x]
                if schema.is_entity(e.dst):
                    fields.append(v)
                elif e.dst == "String":
                    fields.append(_csv_quote(v))
                else:
                    fields.append(str(v))
            lines.append(",".join(fields))
        path = os.path.join(directory, f"{node}.csv")
        atomic_write(path, "\n".join(lines) + "\n")
        written.append(path)
    return written


def import_csv(schema: Schema, directory: str) -> Instance:
    """Inverse of :func:`export_csv`: headers must match the schema exactly."""
    carriers: dict[str, list[str]] = {}
    edge_maps: dict[str, dict[str, object]] = {e.name: {} for e in schema.edges()}
    violations: list[Violation] = []
    for node in schema.entities:
        path = os.path.join(directory, f"{node}.csv")
        if not os.path.exists(path):
            raise HeaderMismatch(f"missing file {node}.csv in {directory!r}")
        with open(path, encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
        edges = schema.edges_from(node)
        expected = ["id"] + [e.name for e in edges]
        if not rows or rows[0] != expected:
            got = rows[0] if rows else []
            raise HeaderMismatch(
                f"{node}.csv: header {','.join(got)!r} does not match {','.join(expected)!r}"
            )
        carriers[node] = []
        for row in rows[1:]:
            if not row:
                continue
            if len(row) != len(expected):
                violations.append(
                    Violation("row-shape", f"{node}.csv: row {row!r} has {len(row)} fields")
                )
                continue
            x = row[0]
            carriers[node].append(x)
            for e, raw in zip(edges, row[1:]):
                if schema.is_entity(e.dst) or e.dst == "String":
                    edge_maps[e.name][x] = raw
                else:
                    try:
                        edge_maps[e.name][x] = int(raw)
                    except ValueError:
                        violations.append(
                            Violation(
                                "literal-type-mismatch",
                                f"{node}.csv: {e.name} value {raw!r} is not an Int",
                            )
                        )
    if violations:
        raise ValidationError(f"csv import from {directory}", violations)
    return validate_instance(schema, carriers, edge_maps, name=f"csv import from {directory}")


@dataclass(frozen=True)
class TripleSet:
    """(subject id, edge name, object id-or-literal), one per element and edge."""

    triples: tuple[tuple[str, str, object], ...]

    def __len__(self) -> int:
        return len(self.triples)


def export_triples(instance: Instance) -> TripleSet:
    schema = instance.schema
    triples: list[tuple[str, str, object]] = []
    for node in schema.entities:
        for x in instance.carriers[node]:
            for e in schema.edges_from(node):
                triples.append((x, e.name, instance.edge_maps[e.name][x]))
    return TripleSet(tuple(triples))


def format_triples(instance: Instance) -> str:
    """Tab-separated lines; String literals quoted so ids stay distinguishable."""
    schema = instance.schema
    lines = []
    for subj, ename, obj in export_triples(instance).triples:
        e = schema.graph.edges[ename]
        if schema.is_entity(e.dst):
            rendered = obj
        elif e.dst == "String":
            rendered = '"' + str(obj).replace("\\", "\\\\").replace('"', '\\"') + '"'
        else:
            rendered = str(obj)
        lines.append(f"{subj}\t{ename}\t{rendered}")
    return "\n".join(lines) + ("\n" if lines else "")
