"""AMR graph data model plus a PENMAN reader/writer with validation.

An AMR is stored as a rooted, directed, labeled graph: one instance triple
per variable, relation triples between variables, and attribute triples from
a variable to a constant.  Inverse roles (``:ARG0-of``) are kept exactly as
written; they are only canonicalized inside :func:`validate` (cycle check)
and inside Smatch triple extraction.
"""

import re
from collections import Counter
from dataclasses import dataclass, field


class AmrError(Exception):
    """Base class for AMR graph errors."""


class PenmanSyntaxError(AmrError):
    """Malformed PENMAN text.  Carries 1-based line and column."""

    def __init__(self, message, line, column):
        super().__init__(f"{message} (line {line}, column {column})")
        self.line = line
        self.column = column


class GraphInvariantError(AmrError):
    """A graph violates an invariant required by the requested operation."""


# Alignment markup sometimes attached to tokens in annotated banks
# (``concept~e.3`` or ``concept~3,4``); stripped on input.
_ALIGNMENT_RE = re.compile(r"~(?:[a-zA-Z]+\.)?\d+(?:,\d+)*$")

_NUMBER_RE = re.compile(r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?$")


@dataclass(frozen=True)
class AmrGraph:
    """Rooted directed labeled graph.

    instances: ``(variable, concept)`` pairs, one per variable, in document
    order; the root variable appears among them.  relations: ``(source,
    role, target-variable)``.  attributes: ``(source, role, constant)`` where
    constants keep their surface form verbatim (quoted strings keep their
    quotes, numbers stay strings, ``-``/``+`` as-is).
    """

    root: str
    instances: tuple = ()
    relations: tuple = ()
    attributes: tuple = ()
    # parser-recorded document order of edges as ("rel"|"attr", index) pairs;
    # graphs built by hand may omit it (relations then attributes per node)
    edge_positions: tuple = field(default=(), compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "instances", tuple(tuple(t) for t in self.instances))
        object.__setattr__(self, "relations", tuple(tuple(t) for t in self.relations))
        object.__setattr__(self, "attributes", tuple(tuple(t) for t in self.attributes))
        object.__setattr__(self, "edge_positions", tuple(self.edge_positions))
        if self.edge_positions:
            expected = [("rel", i) for i in range(len(self.relations))]
            expected += [("attr", i) for i in range(len(self.attributes))]
            if sorted(self.edge_positions) != sorted(expected):
                raise ValueError("edge_positions must cover relations and attributes exactly")

    def variables(self):
        return {var for var, _ in self.instances}

    def concept(self, var):
        for v, concept in self.instances:
            if v == var:
                return concept
        raise KeyError(var)

    def var_to_concept(self):
        return {var: concept for var, concept in self.instances}

    def ordered_edges(self):
        """All edges in document order when known, yielding
        ``(source, role, target, is_attribute)``."""
        if self.edge_positions:
            for kind, i in self.edge_positions:
                if kind == "rel":
                    src, role, tgt = self.relations[i]
                    yield src, role, tgt, False
                else:
                    src, role, const = self.attributes[i]
                    yield src, role, const, True
        else:
            for src, role, tgt in self.relations:
                yield src, role, tgt, False
            for src, role, const in self.attributes:
                yield src, role, const, True

    def edges_from(self, var):
        """Outgoing edges of ``var`` in stored order; ``(role, target,
        is_attribute)`` tuples."""
        for src, role, target, is_attr in self.ordered_edges():
            if src == var:
                yield role, target, is_attr


def graph_equal(g1, g2):
    """Exact equality: same root, instance set, relation/attribute multisets.

    Variable names are compared literally; alpha-renamed copies are unequal
    here (Smatch scores those 1.0).
    """
    return (
        g1.root == g2.root
        and set(g1.instances) == set(g2.instances)
        and len(g1.instances) == len(g2.instances)
        and Counter(g1.relations) == Counter(g2.relations)
        and Counter(g1.attributes) == Counter(g2.attributes)
    )


# ---------------------------------------------------------------------------
# PENMAN parsing


@dataclass
class _Token:
    kind: str  # "(" ")" "/" "role" "string" "atom"
    text: str
    line: int
    column: int


def _tokenize(text):
    tokens = []
    line, col = 1, 1
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch.isspace():
            col += 1
            i += 1
            continue
        if ch in "()/":
            tokens.append(_Token(ch, ch, line, col))
            col += 1
            i += 1
            continue
        if ch == '"':
            start_line, start_col = line, col
            j = i + 1
            while j < n and text[j] != '"':
                if text[j] == "\n":
                    raise PenmanSyntaxError("unterminated string", start_line, start_col)
                j += 1
            if j >= n:
                raise PenmanSyntaxError("unterminated string", start_line, start_col)
            raw = text[i : j + 1]
            tokens.append(_Token("string", raw, start_line, start_col))
            col += j + 1 - i
            i = j + 1
            continue
        # role or atom: runs to whitespace, paren, slash or quote
        start_line, start_col = line, col
        j = i
        while j < n and not text[j].isspace() and text[j] not in '()/"':
            j += 1
        word = text[i:j]
        kind = "role" if word.startswith(":") else "atom"
        tokens.append(_Token(kind, word, start_line, start_col))
        col += j - i
        i = j
    return tokens


class _Parser:
    def __init__(self, tokens):
        self.tokens = tokens
        self.pos = 0

    def _peek(self):
        return self.tokens[self.pos] if self.pos < len(self.tokens) else None

    def _next(self, expected=None):
        tok = self._peek()
        if tok is None:
            last = self.tokens[-1] if self.tokens else _Token("", "", 1, 1)
            raise PenmanSyntaxError(
                f"unexpected end of input (expected {expected})", last.line, last.column
            )
        if expected is not None and tok.kind != expected:
            raise PenmanSyntaxError(
                f"expected {expected!r}, found {tok.text!r}", tok.line, tok.column
            )
        self.pos += 1
        return tok

    def parse(self):
        root, instances, edges = self._node({}, [], [])
        trailing = self._peek()
        if trailing is not None:
            raise PenmanSyntaxError(
                f"trailing content {trailing.text!r}", trailing.line, trailing.column
            )
        return root, instances, edges

    def _node(self, seen, instances, edges):
        self._next("(")
        var_tok = self._next("atom")
        var = _strip_alignment(var_tok.text)
        if var in seen:
            raise PenmanSyntaxError(
                f"duplicate variable definition {var!r}", var_tok.line, var_tok.column
            )
        seen[var] = True
        self._next("/")
        concept_tok = self._next("atom")
        concept = _strip_alignment(concept_tok.text)
        instances.append((var, concept))
        while True:
            tok = self._peek()
            if tok is None:
                raise PenmanSyntaxError(
                    "unexpected end of input (expected ')')",
                    concept_tok.line,
                    concept_tok.column,
                )
            if tok.kind == ")":
                self._next(")")
                return var, instances, edges
            role_tok = self._next("role")
            role = _strip_alignment(role_tok.text)
            tgt = self._peek()
            if tgt is None:
                raise PenmanSyntaxError(
                    "role without a target", role_tok.line, role_tok.column
                )
            if tgt.kind == "(":
                # reserve the slot first so edges come out in document order
                slot = len(edges)
                edges.append(None)
                child, _, _ = self._node(seen, instances, edges)
                edges[slot] = (var, role, child, "node")
            elif tgt.kind == "string":
                self._next()
                edges.append((var, role, _strip_alignment_quoted(tgt.text), "const"))
            elif tgt.kind == "atom":
                self._next()
                edges.append((var, role, _strip_alignment(tgt.text), "maybe_var"))
            else:
                raise PenmanSyntaxError(
                    f"invalid role target {tgt.text!r}", tgt.line, tgt.column
                )


def _strip_alignment(token):
    return _ALIGNMENT_RE.sub("", token)


def _strip_alignment_quoted(token):
    # alignment sits outside the closing quote: "str"~e.4 arrives as two
    # tokens here, so quoted values pass through untouched
    return token


def parse_penman(text):
    """Parse one PENMAN expression into an :class:`AmrGraph`.

    The root is the first variable.  A bare token in role-target position is
    a re-entrant reference when it names a variable defined anywhere in the
    expression, otherwise it is a constant; quoted strings, numbers and
    ``-``/``+`` are always constants.  Inverse roles are kept as written.
    """
    if not text or not text.strip():
        raise PenmanSyntaxError("empty input", 1, 1)
    tokens = _tokenize(text)
    if not tokens:
        raise PenmanSyntaxError("empty input", 1, 1)
    if tokens[0].kind != "(":
        raise PenmanSyntaxError(
            f"expected '(', found {tokens[0].text!r}", tokens[0].line, tokens[0].column
        )
    root, instances, raw_edges = _Parser(tokens).parse()
    defined = {var for var, _ in instances}
    relations = []
    attributes = []
    positions = []
    for src, role, target, kind in raw_edges:
        # bare tokens are variable references when defined anywhere, else constants
        is_relation = kind == "node" or (kind == "maybe_var" and target in defined)
        if is_relation:
            positions.append(("rel", len(relations)))
            relations.append((src, role, target))
        else:
            positions.append(("attr", len(attributes)))
            attributes.append((src, role, target))
    return AmrGraph(
        root=root,
        instances=tuple(instances),
        relations=tuple(relations),
        attributes=tuple(attributes),
        edge_positions=tuple(positions),
    )


# ---------------------------------------------------------------------------
# Serialization


def _strict_check(g):
    seen = set()
    for var, _ in g.instances:
        if var in seen:
            raise GraphInvariantError(f"duplicate instance for variable {var!r}")
        seen.add(var)
    if g.root not in seen:
        raise GraphInvariantError(f"root {g.root!r} has no instance")
    for src, role, tgt in g.relations:
        if src not in seen:
            raise GraphInvariantError(f"relation source {src!r} has no instance")
        if tgt not in seen:
            raise GraphInvariantError(f"relation target {tgt!r} has no instance")
    for src, role, _ in g.attributes:
        if src not in seen:
            raise GraphInvariantError(f"attribute source {src!r} has no instance")


def serialize_penman(g):
    """Serialize to a single-line PENMAN string.

    Depth-first from the root, children in stored triple order (relations
    before attributes per node); the second and later visits to a variable
    emit a bare reference.  Deterministic, and ``parse_penman`` of the output
    equals ``g`` under :func:`graph_equal`.
    """
    _strict_check(g)
    concepts = g.var_to_concept()
    emitted = set()

    def emit(var):
        emitted.add(var)
        parts = [f"({var} / {concepts[var]}"]
        for role, target, is_attr in g.edges_from(var):
            if is_attr:
                parts.append(f" {role} {target}")
            elif target in emitted:
                parts.append(f" {role} {target}")
            else:
                parts.append(f" {role} {emit(target)}")
        parts.append(")")
        return "".join(parts)

    out = emit(g.root)
    unvisited = sorted(g.variables() - emitted)
    if unvisited:
        raise GraphInvariantError(
            f"variables not reachable from root: {', '.join(unvisited)}"
        )
    return out


# ---------------------------------------------------------------------------
# Validation


@dataclass(frozen=True)
class Finding:
    kind: str  # "cycle" | "unreachable" | "duplicate_instance" | "undefined_variable"
    variables: tuple
    message: str


@dataclass
class ValidationReport:
    findings: list = field(default_factory=list)

    @property
    def ok(self):
        return not self.findings

    def kinds(self):
        return {f.kind for f in self.findings}


def canonicalize_role(role, source, target):
    """Rewrite ``x :R-of y`` as ``y :R x``; other roles pass through."""
    if role.endswith("-of") and len(role) > 3:
        return role[:-3], target, source
    return role, source, target


def validate(g):
    """Check a graph and report findings instead of raising.

    Reports duplicate instances, variables with no instance, variables not
    reachable from the root (edges traversed as written), and directed
    cycles after canonicalizing ``-of`` inversions.
    """
    report = ValidationReport()
    counts = Counter(var for var, _ in g.instances)
    for var, k in sorted(counts.items()):
        if k > 1:
            report.findings.append(
                Finding("duplicate_instance", (var,), f"{k} instances for {var!r}")
            )
    defined = set(counts)
    if g.root not in defined:
        report.findings.append(
            Finding("undefined_variable", (g.root,), f"root {g.root!r} has no instance")
        )
    for src, role, tgt in g.relations:
        for var in (src, tgt):
            if var not in defined:
                report.findings.append(
                    Finding(
                        "undefined_variable",
                        (var,),
                        f"variable {var!r} in relation {role} has no instance",
                    )
                )
    for src, role, _ in g.attributes:
        if src not in defined:
            report.findings.append(
                Finding(
                    "undefined_variable",
                    (src,),
                    f"variable {src!r} in attribute {role} has no instance",
                )
            )

    # reachability over edges as written
    succ = {}
    for src, _, tgt in g.relations:
        succ.setdefault(src, []).append(tgt)
    reached = set()
    stack = [g.root] if g.root in defined else []
    while stack:
        var = stack.pop()
        if var in reached:
            continue
        reached.add(var)
        stack.extend(t for t in succ.get(var, ()) if t in defined)
    unreachable = sorted(defined - reached)
    if unreachable and g.root in defined:
        report.findings.append(
            Finding(
                "unreachable",
                tuple(unreachable),
                f"not reachable from root: {', '.join(unreachable)}",
            )
        )

    # directed cycles after -of canonicalization
    canon = {}
    for src, role, tgt in g.relations:
        _, s, t = canonicalize_role(role, src, tgt)
        if s in defined and t in defined:
            canon.setdefault(s, set()).add(t)
    for comp in _cyclic_components(defined, canon):
        report.findings.append(
            Finding("cycle", comp, f"directed cycle through: {', '.join(comp)}")
        )
    return report


def _cyclic_components(nodes, succ):
    """Strongly connected components that contain a cycle, sorted."""
    index = {}
    lowlink = {}
    on_stack = set()
    stack = []
    counter = [0]
    components = []

    def strongconnect(v):
        # iterative Tarjan; recursion depth is unbounded on deep graphs
        work = [(v, iter(sorted(succ.get(v, ()))))]
        index[v] = lowlink[v] = counter[0]
        counter[0] += 1
        stack.append(v)
        on_stack.add(v)
        while work:
            node, it = work[-1]
            advanced = False
            for w in it:
                if w not in index:
                    index[w] = lowlink[w] = counter[0]
                    counter[0] += 1
                    stack.append(w)
                    on_stack.add(w)
                    work.append((w, iter(sorted(succ.get(w, ())))))
                    advanced = True
                    break
                if w in on_stack:
                    lowlink[node] = min(lowlink[node], index[w])
            if advanced:
                continue
            work.pop()
            if work:
                parent = work[-1][0]
                lowlink[parent] = min(lowlink[parent], lowlink[node])
            if lowlink[node] == index[node]:
                comp = []
                while True:
                    w = stack.pop()
                    on_stack.discard(w)
                    comp.append(w)
                    if w == node:
                        break
                if len(comp) > 1 or node in succ.get(node, ()):
                    components.append(tuple(sorted(comp)))

    for v in sorted(nodes):
        if v not in index:
            strongconnect(v)
    return sorted(components)


def is_number(token):
    """True for integer/decimal constants (kept as strings in the graph)."""
    return bool(_NUMBER_RE.match(token))
