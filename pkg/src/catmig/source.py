"""The text format: parser, canonical printer, and resolution.

A source file is an ordered list of named declarations::

    schema S {
      entities: Emp, Dept;
      types: String;
      edges: mgr: Emp -> Emp, works: Emp -> Dept;
      equations: admin.works = id:Dept;
    }
    instance I on S {
      Emp = { 101, 102 };
      works = { 101 -> q10, 102 -> x02 };
    }
    mapping F : S -> T {
      nodes: Emp -> E;
      edges: mgr -> boss.of;
    }

Paths are dot-joined edge names or ``id:Node``.  Quoted strings are String
literals and nothing else is; bare tokens are element ids, and a bare number
is an Int literal only where the edge targets Int.  Line comments start with
``//``.  Printing is canonical: fixed section order, one declaration per
line, declarations kept in source order, so parse-print-parse is parse.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .errors import ParseError, UnresolvedReference, ValidationError, Violation
from .instance import Instance, validate_instance
from .mapping import Mapping, validate_mapping
from .paths import Budget, DEFAULT_BUDGET
from .schema import Schema, validate_schema

_IDENT_START = set("abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_!#~")
_IDENT_CONT = _IDENT_START | set("0123456789")
_DIGITS = set("0123456789")


@dataclass(frozen=True)
class Token:
    kind: str  # ident number string lbrace rbrace colon semi comma eq dot arrow eof
    text: str
    line: int
    col: int


def _lex(text: str) -> list[Token]:
    tokens: list[Token] = []
    i, line, col = 0, 1, 1
    n = len(text)

    def push(kind: str, s: str, ln: int, cl: int) -> None:
        tokens.append(Token(kind, s, ln, cl))

    while i < n:
        ch = text[i]
        if ch == "\n":
            i += 1
            line += 1
            col = 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if text.startswith("//", i):
            while i < n and text[i] != "\n":
                i += 1
            continue
        start_line, start_col = line, col
        if ch == '"':
            i += 1
            col += 1
            out = []
            while True:
                if i >= n or text[i] == "\n":
                    raise ParseError("unterminated string literal", start_line, start_col)
                c = text[i]
                if c == "\\":
                    if i + 1 >= n or text[i + 1] not in '"\\':
                        raise ParseError("bad escape in string literal", line, col)
                    out.append(text[i + 1])
                    i += 2
                    col += 2
                    continue
                if c == '"':
                    i += 1
                    col += 1
                    break
                out.append(c)
                i += 1
                col += 1
            push("string", "".join(out), start_line, start_col)
            continue
        if ch == "-":
            if text.startswith("->", i):
                push("arrow", "->", start_line, start_col)
                i += 2
                col += 2
                continue
            if i + 1 < n and text[i + 1] in _DIGITS:
                j = i + 1
                while j < n and text[j] in _DIGITS:
                    j += 1
                if j < n and text[j] in _IDENT_CONT:
                    raise ParseError("malformed number", start_line, start_col)
                push("number", text[i:j], start_line, start_col)
                col += j - i
                i = j
                continue
            raise ParseError("stray '-'", start_line, start_col)
        if ch in _IDENT_CONT:
            j = i
            while j < n and text[j] in _IDENT_CONT:
                j += 1
            word = text[i:j]
            kind = "number" if all(c in _DIGITS for c in word) else "ident"
            push(kind, word, start_line, start_col)
            col += j - i
            i = j
            continue
        simple = {"{": "lbrace", "}": "rbrace", ":": "colon", ";": "semi", ",": "comma", "=": "eq", ".": "dot"}
        if ch in simple:
            push(simple[ch], ch, start_line, start_col)
            i += 1
            col += 1
            continue
        raise ParseError(f"unexpected character {ch!r}", start_line, start_col)
    tokens.append(Token("eof", "", line, col))
    return tokens


# Path syntax: ("id", node) or ("word", (edge, edge, ...)).
PathSyntax = tuple


@dataclass
class SchemaDecl:
    name: str
    entities: list[str] = field(default_factory=list)
    types: list[str] = field(default_factory=list)
    edges: list[tuple[str, str, str]] = field(default_factory=list)
    equations: list[tuple[PathSyntax, PathSyntax]] = field(default_factory=list)


@dataclass
class InstanceDecl:
    name: str
    schema: str
    # binding: (name, [("value", token_pair)...] or [("pair", tok, tok)...])
    bindings: list[tuple[str, list]] = field(default_factory=list)


@dataclass
class MappingDecl:
    name: str
    source: str
    target: str
    nodes: list[tuple[str, str]] = field(default_factory=list)
    edges: list[tuple[str, PathSyntax]] = field(default_factory=list)


@dataclass
class SourceFile:
    decls: list = field(default_factory=list)


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    def peek(self) -> Token:
        return self.tokens[self.pos]

    def next(self) -> Token:
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            wanted = what or kind
            raise ParseError(f"expected {wanted}, found {tok.text or tok.kind!r}", tok.line, tok.col)
        return self.next()

    def at(self, kind: str, text: str | None = None) -> bool:
        tok = self.peek()
        return tok.kind == kind and (text is None or tok.text == text)

    def parse_source(self) -> SourceFile:
        decls = []
        names: dict[str, set[str]] = {"schema": set(), "instance": set(), "mapping": set()}
        while not self.at("eof"):
            tok = self.peek()
            if tok.kind != "ident" or tok.text not in ("schema", "instance", "mapping"):
                raise ParseError(
                    "expected a schema, instance or mapping declaration", tok.line, tok.col
                )
            kind = tok.text
            decl = getattr(self, f"parse_{kind}")()
            if decl.name in names[kind]:
                raise ParseError(f"duplicate {kind} name {decl.name!r}", tok.line, tok.col)
            names[kind].add(decl.name)
            decls.append(decl)
        return SourceFile(decls)

    def parse_name(self) -> str:
        return self.expect("ident", "a name").text

    def parse_path_syntax(self) -> PathSyntax:
        first = self.expect("ident", "a path")
        if first.text == "id" and self.at("colon"):
            self.next()
            node = self.parse_name()
            return ("id", node)
        names = [first.text]
        while self.at("dot"):
            self.next()
            names.append(self.parse_name())
        return ("word", tuple(names))

    def end_of_items(self) -> bool:
        return self.at("semi") or self.at("rbrace")

    def finish_section(self) -> None:
        if self.at("semi"):
            self.next()

    def parse_schema(self) -> SchemaDecl:
        self.next()  # schema
        decl = SchemaDecl(self.parse_name())
        self.expect("lbrace")
        while not self.at("rbrace"):
            section = self.expect("ident", "a section (entities/types/edges/equations)")
            self.expect("colon")
            if section.text in ("entities", "types"):
                bucket = decl.entities if section.text == "entities" else decl.types
                while not self.end_of_items():
                    bucket.append(self.parse_name())
                    if self.at("comma"):
                        self.next()
            elif section.text == "edges":
                while not self.end_of_items():
                    ename = self.parse_name()
                    self.expect("colon")
                    src = self.parse_name()
                    self.expect("arrow")
                    dst = self.parse_name()
                    decl.edges.append((ename, src, dst))
                    if self.at("comma"):
                        self.next()
            elif section.text == "equations":
                while not self.end_of_items():
                    lhs = self.parse_path_syntax()
                    self.expect("eq")
                    rhs = self.parse_path_syntax()
                    decl.equations.append((lhs, rhs))
                    if self.at("comma"):
                        self.next()
            else:
                raise ParseError(
                    f"unknown schema section {section.text!r}", section.line, section.col
                )
            self.finish_section()
        self.expect("rbrace")
        return decl

    def parse_scalar(self) -> tuple[str, str]:
        tok = self.peek()
        if tok.kind in ("ident", "number", "string"):
            self.next()
            return (tok.kind, tok.text)
        raise ParseError("expected an element id or literal", tok.line, tok.col)

    def parse_instance(self) -> InstanceDecl:
        self.next()  # instance
        name = self.parse_name()
        on = self.expect("ident", "'on'")
        if on.text != "on":
            raise ParseError("expected 'on'", on.line, on.col)
        decl = InstanceDecl(name, self.parse_name())
        self.expect("lbrace")
        while not self.at("rbrace"):
            bname = self.parse_name()
            self.expect("eq")
            self.expect("lbrace")
            items: list = []
            while not self.at("rbrace"):
                first = self.parse_scalar()
                if self.at("arrow"):
                    self.next()
                    items.append(("pair", first, self.parse_scalar()))
                else:
                    items.append(("value", first))
                if self.at("comma"):
                    self.next()
            self.expect("rbrace")
            decl.bindings.append((bname, items))
            self.finish_section()
        self.expect("rbrace")
        return decl

    def parse_mapping(self) -> MappingDecl:
        self.next()  # mapping
        name = self.parse_name()
        self.expect("colon")
        source = self.parse_name()
        self.expect("arrow")
        target = self.parse_name()
        decl = MappingDecl(name, source, target)
        self.expect("lbrace")
        while not self.at("rbrace"):
            section = self.expect("ident", "a section (nodes/edges)")
            self.expect("colon")
            if section.text == "nodes":
                while not self.end_of_items():
                    a = self.parse_name()
                    self.expect("arrow")
                    decl.nodes.append((a, self.parse_name()))
                    if self.at("comma"):
                        self.next()
            elif section.text == "edges":
                while not self.end_of_items():
                    e = self.parse_name()
                    self.expect("arrow")
                    decl.edges.append((e, self.parse_path_syntax()))
                    if self.at("comma"):
                        self.next()
            else:
                raise ParseError(
                    f"unknown mapping section {section.text!r}", section.line, section.col
                )
            self.finish_section()
        self.expect("rbrace")
        return decl


def parse_source(text: str) -> SourceFile:
    return _Parser(_lex(text)).parse_source()


def _quote(value: str) -> str:
    return '"' + value.replace("\\", "\\\\").replace('"', '\\"') + '"'


def _path_text(spec: PathSyntax) -> str:
    kind, payload = spec
    return f"id:{payload}" if kind == "id" else ".".join(payload)


def _scalar_text(tok: tuple[str, str]) -> str:
    kind, text = tok
    return _quote(text) if kind == "string" else text


def print_source(sf: SourceFile) -> str:
    """Canonical text: sections in fixed order, one item per line for edges,
    equations and bindings, insertion order preserved everywhere."""
    blocks: list[str] = []
    for decl in sf.decls:
        if isinstance(decl, SchemaDecl):
            lines = [f"schema {decl.name} {{"]
            if decl.entities:
                lines.append(f"  entities: {', '.join(decl.entities)};")
            if decl.types:
                lines.append(f"  types: {', '.join(decl.types)};")
            if decl.edges:
                lines.append("  edges:")
                for i, (e, s, d) in enumerate(decl.edges):
                    sep = "," if i + 1 < len(decl.edges) else ";"
                    lines.append(f"    {e}: {s} -> {d}{sep}")
            if decl.equations:
                lines.append("  equations:")
                for i, (lhs, rhs) in enumerate(decl.equations):
                    sep = "," if i + 1 < len(decl.equations) else ";"
                    lines.append(f"    {_path_text(lhs)} = {_path_text(rhs)}{sep}")
            lines.append("}")
            blocks.append("\n".join(lines))
        elif isinstance(decl, InstanceDecl):
            lines = [f"instance {decl.name} on {decl.schema} {{"]
            for bname, items in decl.bindings:
                rendered = []
                for item in items:
                    if item[0] == "value":
                        rendered.append(_scalar_text(item[1]))
                    else:
                        rendered.append(f"{_scalar_text(item[1])} -> {_scalar_text(item[2])}")
                body = f" {', '.join(rendered)} " if rendered else " "
                lines.append(f"  {bname} = {{{body}}};")
            lines.append("}")
            blocks.append("\n".join(lines))
        elif isinstance(decl, MappingDecl):
            lines = [f"mapping {decl.name} : {decl.source} -> {decl.target} {{"]
            if decl.nodes:
                lines.append("  nodes:")
                for i, (a, b) in enumerate(decl.nodes):
                    sep = "," if i + 1 < len(decl.nodes) else ";"
                    lines.append(f"    {a} -> {b}{sep}")
            if decl.edges:
                lines.append("  edges:")
                for i, (e, p) in enumerate(decl.edges):
                    sep = "," if i + 1 < len(decl.edges) else ";"
                    lines.append(f"    {e} -> {_path_text(p)}{sep}")
            lines.append("}")
            blocks.append("\n".join(lines))
        else:
            raise TypeError(f"not a declaration: {decl!r}")
    return "\n\n".join(blocks) + ("\n" if blocks else "")


@dataclass
class Library:
    """Every declaration of a source file (plus includes), validated in order."""

    source: SourceFile
    schemas: dict[str, Schema]
    instances: dict[str, Instance]
    mappings: dict[str, Mapping]


def _value_from_token(tok, edge_dst: str, schema: Schema, context: str, violations):
    kind, text = tok
    if schema.is_entity(edge_dst):
        if kind == "string":
            violations.append(
                Violation(
                    "literal-type-mismatch",
                    f"{context}: quoted string {text!r} cannot be an element id",
                )
            )
            return text
        return text
    if edge_dst == "String":
        if kind != "string":
            violations.append(
                Violation(
                    "literal-type-mismatch",
                    f"{context}: String attribute values must be quoted, got {text!r}",
                )
            )
            return text
        return text
    if edge_dst == "Int":
        if kind != "number":
            violations.append(
                Violation(
                    "literal-type-mismatch",
                    f"{context}: Int attribute values must be decimal integers, got {text!r}",
                )
            )
            return text
        return int(text)
    return text


def _id_from_token(tok, context: str, violations) -> str:
    kind, text = tok
    if kind == "string":
        violations.append(
            Violation(
                "literal-type-mismatch",
                f"{context}: quoted string {text!r} cannot be an element id",
            )
        )
    return text


def _resolve_instance(decl: InstanceDecl, schema: Schema) -> Instance:
    violations: list[Violation] = []
    carriers: dict[str, list[str]] = {}
    edge_maps: dict[str, dict[str, object]] = {}
    for bname, items in decl.bindings:
        if bname in carriers or bname in edge_maps:
            violations.append(
                Violation("duplicate-name", f"binding for {bname!r} appears twice")
            )
            continue
        if schema.is_entity(bname):
            xs: list[str] = []
            for item in items:
                if item[0] != "value":
                    violations.append(
                        Violation(
                            "binding-shape",
                            f"carrier {bname!r} must list plain ids, not arrows",
                        )
                    )
                    continue
                xs.append(_id_from_token(item[1], f"carrier {bname!r}", violations))
            carriers[bname] = xs
        elif bname in schema.graph.edges:
            edge = schema.graph.edges[bname]
            mapping: dict[str, object] = {}
            for item in items:
                if item[0] != "pair":
                    violations.append(
                        Violation(
                            "binding-shape",
                            f"edge map {bname!r} must list 'x -> y' pairs",
                        )
                    )
                    continue
                key = _id_from_token(item[1], f"edge {bname!r}", violations)
                if key in mapping:
                    violations.append(
                        Violation("duplicate-name", f"edge {bname!r} maps {key!r} twice")
                    )
                mapping[key] = _value_from_token(
                    item[2], edge.dst, schema, f"edge {bname!r}", violations
                )
            edge_maps[bname] = mapping
        else:
            violations.append(
                Violation(
                    "unknown-name",
                    f"binding {bname!r} names neither an entity node nor an edge of {schema.name!r}",
                )
            )
    if violations:
        raise ValidationError(f"instance {decl.name}", violations)
    return validate_instance(schema, carriers, edge_maps, name=f"instance {decl.name}")


def _resolve_mapping(decl: MappingDecl, schemas: dict[str, Schema]) -> Mapping:
    for ref in (decl.source, decl.target):
        if ref not in schemas:
            raise UnresolvedReference(
                f"mapping {decl.name!r} references unknown schema {ref!r}"
            )
    pre: list[Violation] = []
    nodes: dict[str, str] = {}
    for a, b in decl.nodes:
        if a in nodes:
            pre.append(Violation("duplicate-name", f"node {a!r} assigned twice"))
        nodes[a] = b
    edges: dict[str, str] = {}
    for e, spec in decl.edges:
        if e in edges:
            pre.append(Violation("duplicate-name", f"edge {e!r} assigned twice"))
        edges[e] = _path_text(spec)
    try:
        mapping = validate_mapping(
            schemas[decl.source], schemas[decl.target], nodes, edges, name=f"mapping {decl.name}"
        )
    except ValidationError as exc:
        raise ValidationError(f"mapping {decl.name}", pre + list(exc.violations)) from None
    if pre:
        raise ValidationError(f"mapping {decl.name}", pre)
    return mapping


def resolve(sf: SourceFile, *, budget: Budget = DEFAULT_BUDGET) -> Library:
    schemas: dict[str, Schema] = {}
    instances: dict[str, Instance] = {}
    mappings: dict[str, Mapping] = {}
    for decl in sf.decls:
        if isinstance(decl, SchemaDecl):
            schemas[decl.name] = validate_schema(
                decl.name,
                decl.entities,
                decl.types,
                decl.edges,
                decl.equations,
                budget=budget,
            )
        elif isinstance(decl, InstanceDecl):
            if decl.schema not in schemas:
                raise UnresolvedReference(
                    f"instance {decl.name!r} references unknown schema {decl.schema!r}"
                )
            instances[decl.name] = _resolve_instance(decl, schemas[decl.schema])
        elif isinstance(decl, MappingDecl):
            mappings[decl.name] = _resolve_mapping(decl, schemas)
    return Library(sf, schemas, instances, mappings)


def _merge(files: list[SourceFile]) -> SourceFile:
    merged = SourceFile([])
    seen: dict[str, set[str]] = {"schema": set(), "instance": set(), "mapping": set()}
    kinds = {SchemaDecl: "schema", InstanceDecl: "instance", MappingDecl: "mapping"}
    for sf in files:
        for decl in sf.decls:
            kind = kinds[type(decl)]
            if decl.name in seen[kind]:
                raise UnresolvedReference(
                    f"duplicate {kind} {decl.name!r} across included files"
                )
            seen[kind].add(decl.name)
            merged.decls.append(decl)
    return merged


def load_text(text: str, *, includes: tuple[str, ...] = (), budget: Budget = DEFAULT_BUDGET) -> Library:
    files = []
    for path in includes:
        with open(path, encoding="utf-8") as fh:
            files.append(parse_source(fh.read()))
    files.append(parse_source(text))
    return resolve(_merge(files), budget=budget)


def load_file(path: str, *, includes: tuple[str, ...] = (), budget: Budget = DEFAULT_BUDGET) -> Library:
    with open(path, encoding="utf-8") as fh:
        return load_text(fh.read(), includes=includes, budget=budget)


def instance_to_decl(name: str, instance: Instance) -> InstanceDecl:
    """Render a resolved instance back to syntax (carriers first, schema order)."""
    schema = instance.schema
    decl = InstanceDecl(name, schema.name)
    for node in schema.entities:
        items = [("value", ("ident", x)) for x in instance.carriers[node]]
        decl.bindings.append((node, items))
    for edge in schema.edges():
        items = []
        for x in instance.carriers[edge.src]:
            v = instance.edge_maps[edge.name][x]
            if schema.is_entity(edge.dst):
                vtok = ("ident", v)
            elif edge.dst == "String":
                vtok = ("string", v)
            else:
                vtok = ("number", str(v))
            items.append(("pair", ("ident", x), vtok))
        decl.bindings.append((edge.name, items))
    return decl
