"""Typed edge words over a multigraph and the equational machinery on them.

A path is a word of edge names read left to right: ``admin.works`` means
"follow admin, then works", so concatenation is composition.  Edge names are
unique within a graph, which makes a word determine every intermediate node;
rewriting therefore reduces to word rewriting with typing checked once, at
construction time.

The prover is three-valued.  Equations are oriented into length-then-lex
decreasing rules, the rule set is closed under critical pairs (within a
budget), and two paths are equal when their normal forms agree.  Distinct
normal forms refute equality only when completion converged; under a partial
rule set the prover falls back to a bounded bidirectional search and reports
``unknown`` on exhaustion, because the underlying word problem is not
decidable in general.
"""

from __future__ import annotations

import warnings
from collections import deque
from dataclasses import dataclass, field

from .errors import BudgetExceeded, CatmigError, EndpointMismatch, Unorientable

CONVERGENT = "convergent"
PARTIAL = "partial"

PROVEN = "proven"
REFUTED = "refuted"
UNKNOWN = "unknown"


@dataclass(frozen=True)
class Edge:
    name: str
    src: str
    dst: str


@dataclass(frozen=True)
class Path:
    """A composable word of edge names; an empty word is the identity."""

    start: str
    edges: tuple[str, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "edges", tuple(self.edges))

    @property
    def is_identity(self) -> bool:
        return not self.edges

    def __len__(self) -> int:
        return len(self.edges)

    def __str__(self) -> str:
        return f"id:{self.start}" if not self.edges else ".".join(self.edges)

    def key(self) -> tuple[int, tuple[str, ...]]:
        """Length-then-lexicographic order key (the term order used throughout)."""
        return (len(self.edges), self.edges)


@dataclass(frozen=True)
class PathEquation:
    lhs: Path
    rhs: Path

    def __str__(self) -> str:
        return f"{self.lhs} = {self.rhs}"


class Graph:
    """Directed multigraph with unique node and edge names.

    The constructor assumes its input already passed schema validation; it
    raises plain ``CatmigError`` on malformed input rather than producing
    user-facing violation lists.
    """

    def __init__(self, nodes, edges):
        self.nodes: tuple[str, ...] = tuple(nodes)
        self._node_set = frozenset(self.nodes)
        if len(self._node_set) != len(self.nodes):
            raise CatmigError("duplicate node names in graph")
        self.edges: dict[str, Edge] = {}
        for e in edges:
            if e.name in self.edges:
                raise CatmigError(f"duplicate edge name {e.name!r}")
            if e.src not in self._node_set or e.dst not in self._node_set:
                raise CatmigError(f"edge {e.name!r} references an undeclared node")
            self.edges[e.name] = e
        self.edges_from: dict[str, tuple[Edge, ...]] = {
            n: tuple(e for e in self.edges.values() if e.src == n) for n in self.nodes
        }

    def __eq__(self, other) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.nodes == other.nodes and self.edges == other.edges

    __hash__ = None  # mutable-ish container semantics; never used as a key

    def __repr__(self) -> str:
        return f"Graph(nodes={list(self.nodes)}, edges={len(self.edges)})"

    def has_node(self, name: str) -> bool:
        return name in self._node_set

    def identity(self, node: str) -> Path:
        if node not in self._node_set:
            raise CatmigError(f"unknown node {node!r}")
        return Path(node)

    def edge_path(self, name: str) -> Path:
        e = self.edges.get(name)
        if e is None:
            raise CatmigError(f"unknown edge {name!r}")
        return Path(e.src, (name,))

    def path(self, names, start: str | None = None) -> Path:
        """Build and type-check a path from edge names.

        ``start`` is only needed for the empty word; otherwise it is inferred
        from the first edge and checked if given.
        """
        names = tuple(names)
        if not names:
            if start is None:
                raise CatmigError("identity path needs an explicit start node")
            return self.identity(start)
        first = self.edges.get(names[0])
        if first is None:
            raise CatmigError(f"unknown edge {names[0]!r}")
        if start is not None and start != first.src:
            raise CatmigError(
                f"path starting at {start!r} cannot begin with edge {names[0]!r} (source {first.src!r})"
            )
        p = Path(first.src, names)
        self.end(p)  # raises if not composable
        return p

    def end(self, path: Path) -> str:
        """Target node of ``path``; raises if the word is not composable here."""
        cur = path.start
        if cur not in self._node_set:
            raise CatmigError(f"unknown node {cur!r}")
        for name in path.edges:
            e = self.edges.get(name)
            if e is None:
                raise CatmigError(f"unknown edge {name!r}")
            if e.src != cur:
                raise CatmigError(
                    f"edge {name!r} has source {e.src!r} but the path is at {cur!r}"
                )
            cur = e.dst
        return cur

    def node_at(self, path: Path, position: int) -> str:
        """Node reached after ``position`` edges of ``path``."""
        return self.end(Path(path.start, path.edges[:position]))

    def compose(self, p: Path, q: Path) -> Path:
        """Concatenation; defined only when ``p`` ends where ``q`` starts."""
        if self.end(p) != q.start:
            raise EndpointMismatch(
                f"cannot compose: {p} ends at {self.end(p)!r}, {q} starts at {q.start!r}"
            )
        return Path(p.start, p.edges + q.edges)


def path_from_text(graph: Graph, text: str) -> Path:
    """Parse ``a.b.c`` or ``id:Node`` relative to ``graph``."""
    text = text.strip()
    if not text:
        raise CatmigError("empty path")
    if text.startswith("id:"):
        return graph.identity(text[3:].strip())
    names = tuple(part.strip() for part in text.split("."))
    if any(not n for n in names):
        raise CatmigError(f"malformed path {text!r}")
    return graph.path(names)


def equation_from_text(graph: Graph, text: str) -> PathEquation:
    """Parse ``p = q`` relative to ``graph`` and check the endpoints agree."""
    if text.count("=") != 1:
        raise CatmigError(f"expected exactly one '=' in {text!r}")
    left, right = text.split("=")
    lhs = path_from_text(graph, left)
    rhs = path_from_text(graph, right)
    if lhs.start != rhs.start or graph.end(lhs) != graph.end(rhs):
        raise EndpointMismatch(
            f"equation sides disagree: {lhs} is {lhs.start} -> {graph.end(lhs)}, "
            f"{rhs} is {rhs.start} -> {graph.end(rhs)}"
        )
    return PathEquation(lhs, rhs)


@dataclass(frozen=True)
class Budget:
    """Resource bounds for completion, proving and enumeration."""

    max_completion_iterations: int = 2048
    max_rewrite_steps: int = 4096
    max_path_length: int = 12

    def __post_init__(self):
        for name in ("max_completion_iterations", "max_rewrite_steps", "max_path_length"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be strictly positive")


DEFAULT_BUDGET = Budget()


@dataclass(frozen=True)
class RewriteRule:
    """An oriented equation: ``lhs`` rewrites to the strictly smaller ``rhs``."""

    lhs: Path
    rhs: Path
    ordering: str  # evidence that lhs > rhs under length-then-lex
    derivation: tuple[str, ...]  # how the rule follows from the equations

    def __str__(self) -> str:
        return f"{self.lhs} => {self.rhs}"


@dataclass(frozen=True)
class RewriteStep:
    """One replay-checkable proof step: apply a rule or equation at a position."""

    before: Path
    after: Path
    position: int
    source: str  # "rule" | "equation"
    index: int
    forward: bool

    def describe(self) -> str:
        arrow = "" if self.forward else " (reversed)"
        return (
            f"{self.before} -> {self.after} via {self.source} "
            f"{self.index}{arrow} at {self.position}"
        )


@dataclass(frozen=True)
class ProofOutcome:
    verdict: str  # PROVEN | REFUTED | UNKNOWN
    trace: tuple[RewriteStep, ...] = ()

    @property
    def is_proven(self) -> bool:
        return self.verdict == PROVEN

    @property
    def is_refuted(self) -> bool:
        return self.verdict == REFUTED

    @property
    def is_unknown(self) -> bool:
        return self.verdict == UNKNOWN

    def describe(self) -> str:
        head = self.verdict.capitalize()
        if not self.trace:
            return head
        lines = [head]
        for i, step in enumerate(self.trace):
            lines.append(f"  {i}. {step.describe()}")
        return "\n".join(lines)


@dataclass(frozen=True)
class Theory:
    """A graph, its equations, and (after ``complete``) the oriented rule set."""

    graph: Graph
    equations: tuple[PathEquation, ...]
    rules: tuple[RewriteRule, ...] = ()
    status: str = PARTIAL

    def to_dict(self) -> dict:
        """Deterministic plain-data form, for serialization and golden tests."""
        return {
            "nodes": list(self.graph.nodes),
            "edges": [[e.name, e.src, e.dst] for e in self.graph.edges.values()],
            "equations": [str(eq) for eq in self.equations],
            "status": self.status,
            "rules": [
                {
                    "lhs": str(r.lhs),
                    "rhs": str(r.rhs),
                    "ordering": r.ordering,
                    "derivation": list(r.derivation),
                }
                for r in self.rules
            ],
        }


def make_theory(graph: Graph, equations) -> Theory:
    """Bundle equations over a graph, checking each is well-typed."""
    eqs = []
    for eq in equations:
        le = graph.end(eq.lhs)
        re = graph.end(eq.rhs)
        if eq.lhs.start != eq.rhs.start or le != re:
            raise EndpointMismatch(
                f"ill-typed equation {eq}: {eq.lhs.start} -> {le} vs {eq.rhs.start} -> {re}"
            )
        eqs.append(eq)
    return Theory(graph, tuple(eqs))


def compose(graph: Graph, p: Path, q: Path) -> Path:
    return graph.compose(p, q)


def orient(eq: PathEquation, derivation: tuple[str, ...] = ()) -> RewriteRule:
    """Turn an equation into a rule with the greater side on the left.

    Greater means longer, or on equal length the lexicographically larger
    edge word.  Identical sides have no orientation and raise.
    """
    if eq.lhs == eq.rhs:
        raise Unorientable(f"degenerate equation {eq}")
    a, b = eq.lhs, eq.rhs
    if a.key() < b.key():
        a, b = b, a
    if len(a) != len(b):
        ordering = f"length {len(a)} > {len(b)}"
    else:
        ordering = "equal length, lexicographically greater edge word"
    return RewriteRule(a, b, ordering, derivation)


def _find_redex(word: tuple[str, ...], rules) -> tuple[int, int] | None:
    """Leftmost redex, lowest rule index: (position, rule index) or None."""
    for pos in range(len(word)):
        for ri, rule in enumerate(rules):
            lhs = rule.lhs.edges
            if word[pos : pos + len(lhs)] == lhs:
                return pos, ri
    return None


def _reduce_word(word: tuple[str, ...], rules) -> tuple[str, ...]:
    """Rewrite to an irreducible word.  Terminates: every rule shrinks the
    length-then-lex key."""
    while True:
        hit = _find_redex(word, rules)
        if hit is None:
            return word
        pos, ri = hit
        rule = rules[ri]
        word = word[:pos] + rule.rhs.edges + word[pos + len(rule.lhs.edges) :]


def _critical_pairs(ra: RewriteRule, rb: RewriteRule, ia: int, ib: int):
    """Superpositions of two left-hand sides, as (start, left word, right word, note).

    Edge names are unique, so any word-level overlap of composable words is
    itself composable; no extra typing check is needed.
    """
    a, b = ra.lhs.edges, rb.lhs.edges
    # Proper overlap: a suffix of `a` is a prefix of `b`.
    for o in range(1, min(len(a), len(b))):
        if a[-o:] == b[:o]:
            left = ra.rhs.edges + b[o:]
            right = a[:-o] + rb.rhs.edges
            yield ra.lhs.start, left, right, f"overlap of rules {ia},{ib} sharing {o} edge(s)"
    # Inclusion: `b` occurs inside `a`.
    if len(b) <= len(a):
        for p in range(len(a) - len(b) + 1):
            if a[p : p + len(b)] == b:
                if ia == ib and p == 0 and len(a) == len(b):
                    continue  # a rule sitting on itself is trivial
                left = ra.rhs.edges
                right = a[:p] + rb.rhs.edges + a[p + len(b) :]
                yield ra.lhs.start, left, right, f"rule {ib} inside rule {ia} at offset {p}"


def complete(theory: Theory, budget: Budget = DEFAULT_BUDGET) -> Theory:
    """Knuth-Bendix-style closure of the oriented equations under critical pairs.

    Deterministic: rules keep creation order, pending rule pairs are processed
    first-in first-out, and overlaps within a pair are visited left to right.
    Each examined pair costs one completion iteration; running out of budget
    yields status ``partial`` with every rule found so far.
    """
    rules: list[RewriteRule] = []
    seen: set[tuple[tuple[str, ...], tuple[str, ...]]] = set()

    def add(eq: PathEquation, derivation: tuple[str, ...]) -> bool:
        rule = orient(eq, derivation)
        key = (rule.lhs.edges, rule.rhs.edges)
        if key in seen:
            return False
        seen.add(key)
        rules.append(rule)
        return True

    for i, eq in enumerate(theory.equations):
        if eq.lhs == eq.rhs:
            warnings.warn(f"dropping degenerate equation {eq}", stacklevel=2)
            continue
        add(eq, (f"oriented from equation {i}: {eq}",))

    pending: deque[tuple[int, int]] = deque()

    def enqueue_pairs_for(k: int) -> None:
        for i in range(k + 1):
            pending.append((i, k))
            if i != k:
                pending.append((k, i))

    for k in range(len(rules)):
        enqueue_pairs_for(k)

    iterations = 0
    exhausted = False
    while pending:
        if iterations >= budget.max_completion_iterations:
            exhausted = True
            break
        iterations += 1
        ia, ib = pending.popleft()
        for start, left, right, note in _critical_pairs(rules[ia], rules[ib], ia, ib):
            nl = _reduce_word(left, rules)
            nr = _reduce_word(right, rules)
            if nl == nr:
                continue
            eq = PathEquation(Path(start, nl), Path(start, nr))
            if add(eq, (note, "both sides reduced with the rules present at creation")):
                enqueue_pairs_for(len(rules) - 1)
    status = PARTIAL if (exhausted or pending) else CONVERGENT
    return Theory(theory.graph, theory.equations, tuple(rules), status)


def normalize_with_trace(
    p: Path, theory: Theory, budget: Budget = DEFAULT_BUDGET
) -> tuple[Path, tuple[RewriteStep, ...]]:
    """Rewrite ``p`` to an irreducible path, recording every step.

    Redex selection is leftmost position, then lowest rule index.  Endpoints
    are preserved by every step, and each step strictly decreases the
    length-then-lex key, so this terminates; the step budget is a safety net
    that can only fire on adversarial partial systems.
    """
    theory.graph.end(p)  # typing check
    steps: list[RewriteStep] = []
    cur = p
    while True:
        hit = _find_redex(cur.edges, theory.rules)
        if hit is None:
            return cur, tuple(steps)
        if len(steps) >= budget.max_rewrite_steps:
            raise BudgetExceeded(
                f"normalization of {p} exceeded {budget.max_rewrite_steps} steps"
            )
        pos, ri = hit
        rule = theory.rules[ri]
        after = Path(
            cur.start,
            cur.edges[:pos] + rule.rhs.edges + cur.edges[pos + len(rule.lhs.edges) :],
        )
        steps.append(
            RewriteStep(before=cur, after=after, position=pos, source="rule", index=ri, forward=True)
        )
        cur = after


def normalize(p: Path, theory: Theory, budget: Budget = DEFAULT_BUDGET) -> Path:
    return normalize_with_trace(p, theory, budget)[0]


def _invert(steps: tuple[RewriteStep, ...]) -> tuple[RewriteStep, ...]:
    return tuple(
        RewriteStep(
            before=s.after,
            after=s.before,
            position=s.position,
            source=s.source,
            index=s.index,
            forward=not s.forward,
        )
        for s in reversed(steps)
    )


def _search_conversion(
    theory: Theory, start: Path, goal: Path, budget: Budget
) -> tuple[RewriteStep, ...] | None:
    """Breadth-first bidirectional equation application from ``start`` to ``goal``.

    Equations are applied in both directions at every position; words longer
    than the path-length budget are pruned, and the search gives up once the
    step budget is spent or the reachable class is exhausted.
    """
    graph = theory.graph
    if start == goal:
        return ()
    origin = start.start

    def node_at(word: tuple[str, ...], pos: int) -> str:
        return graph.end(Path(origin, word[:pos]))

    parents: dict[tuple[str, ...], tuple | None] = {start.edges: None}
    frontier: deque[tuple[str, ...]] = deque([start.edges])
    steps_left = budget.max_rewrite_steps
    while frontier and steps_left > 0:
        word = frontier.popleft()
        for ei, eq in enumerate(theory.equations):
            sides = ((eq.lhs, eq.rhs, True), (eq.rhs, eq.lhs, False))
            for frm, to, forward in sides:
                fl = len(frm.edges)
                for pos in range(len(word) - fl + 1):
                    if word[pos : pos + fl] != frm.edges:
                        continue
                    if fl == 0 and node_at(word, pos) != frm.start:
                        continue  # inserting an identity-side must match the node
                    steps_left -= 1
                    new = word[:pos] + to.edges + word[pos + fl :]
                    if len(new) > budget.max_path_length or new in parents:
                        if steps_left <= 0:
                            break
                        continue
                    parents[new] = (word, pos, ei, forward)
                    if new == goal.edges:
                        return _rebuild_steps(parents, new, origin)
                    frontier.append(new)
                    if steps_left <= 0:
                        break
                if steps_left <= 0:
                    break
            if steps_left <= 0:
                break
    return None


def _rebuild_steps(parents, final_word, origin) -> tuple[RewriteStep, ...]:
    chain = []
    word = final_word
    while parents[word] is not None:
        prev, pos, ei, forward = parents[word]
        chain.append(
            RewriteStep(
                before=Path(origin, prev),
                after=Path(origin, word),
                position=pos,
                source="equation",
                index=ei,
                forward=forward,
            )
        )
        word = prev
    return tuple(reversed(chain))


def prove_equal(theory: Theory, p: Path, q: Path, budget: Budget = DEFAULT_BUDGET) -> ProofOutcome:
    """Decide (as far as possible) whether two paths are equal morphisms.

    Equal normal forms prove; distinct normal forms refute only under a
    convergent system, where normal forms are canonical.  Otherwise a bounded
    search over raw equation applications either proves or gives up.
    """
    graph = theory.graph
    pe, qe = graph.end(p), graph.end(q)
    if p.start != q.start or pe != qe:
        raise EndpointMismatch(
            f"{p} is {p.start} -> {pe} but {q} is {q.start} -> {qe}"
        )
    np_, tp = normalize_with_trace(p, theory, budget)
    nq_, tq = normalize_with_trace(q, theory, budget)
    if np_ == nq_:
        return ProofOutcome(PROVEN, tp + _invert(tq))
    if theory.status == CONVERGENT:
        return ProofOutcome(REFUTED)
    middle = _search_conversion(theory, np_, nq_, budget)
    if middle is None:
        return ProofOutcome(UNKNOWN)
    return ProofOutcome(PROVEN, tp + middle + _invert(tq))


def verify_trace(theory: Theory, p: Path, q: Path, trace) -> bool:
    """Independent replay of a proof trace.

    Accepts only if every step applies a stated rule or equation at its
    claimed position (with node agreement for identity-side insertions) and
    the chain leads exactly from ``p`` to ``q``.
    """
    graph = theory.graph
    cur = p
    for step in trace:
        if step.before != cur:
            return False
        if step.source == "rule":
            if not 0 <= step.index < len(theory.rules):
                return False
            pair = theory.rules[step.index]
        elif step.source == "equation":
            if not 0 <= step.index < len(theory.equations):
                return False
            pair = theory.equations[step.index]
        else:
            return False
        frm, to = (pair.lhs, pair.rhs) if step.forward else (pair.rhs, pair.lhs)
        pos = step.position
        if pos < 0 or pos + len(frm.edges) > len(cur.edges):
            return False
        if cur.edges[pos : pos + len(frm.edges)] != frm.edges:
            return False
        if not frm.edges and graph.node_at(cur, pos) != frm.start:
            return False
        rebuilt = Path(cur.start, cur.edges[:pos] + to.edges + cur.edges[pos + len(frm.edges) :])
        if rebuilt != step.after:
            return False
        cur = rebuilt
    return cur == q


@dataclass(frozen=True)
class PathSet:
    """Result of a hom-set enumeration: the paths found plus a completeness flag."""

    paths: tuple[Path, ...]
    complete: bool


def enumerate_paths(theory: Theory, a: str, b: str, budget: Budget = DEFAULT_BUDGET) -> PathSet:
    """All irreducible paths ``a -> b`` up to the length budget.

    The set is complete exactly when no irreducible path of the maximal
    length leaves ``a`` at all: any longer path would contain one of those as
    a prefix, hence a redex, so saturation at the horizon is witnessed.
    """
    graph = theory.graph
    for n in (a, b):
        if not graph.has_node(n):
            raise CatmigError(f"unknown node {n!r}")
    rules = theory.rules

    def extension_irreducible(word: tuple[str, ...]) -> bool:
        # The prefix is already irreducible; only suffixes ending at the new
        # final edge can form a redex.
        for rule in rules:
            lhs = rule.lhs.edges
            if len(lhs) <= len(word) and word[len(word) - len(lhs) :] == lhs:
                return False
        return True

    results: list[Path] = []
    frontier: list[tuple[Path, str]] = [(Path(a), a)]
    complete = True
    for length in range(budget.max_path_length + 1):
        results.extend(p for p, end in frontier if end == b)
        if not frontier:
            complete = True
            break
        if length == budget.max_path_length:
            complete = False
            break
        nxt: list[tuple[Path, str]] = []
        for p, end in frontier:
            for e in graph.edges_from[end]:
                word = p.edges + (e.name,)
                if extension_irreducible(word):
                    nxt.append((Path(a, word), e.dst))
        frontier = nxt
    return PathSet(tuple(sorted(results, key=Path.key)), complete)
