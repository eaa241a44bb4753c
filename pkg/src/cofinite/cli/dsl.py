"""Text format for graphs, partitions, maps, presentations and systems.

Grammar::

    document     := definition*
    definition   := graph | partition | map | presentation | system
    graph        := "graph" NAME "{" stmt* "}"
        vertices: ID, ... ;   edges: (ID, SRC, TGT) | (ID, INV, SRC, TGT), ... ;   orient: ID, ... ;
    partition    := "partition" NAME "on" NAME "{" ("block" "{" QID, ... "}" ;)* "}"
    map          := "map" NAME ":" NAME "->" NAME "{" (QID "->" QID ;)* "}"
    presentation := "presentation" NAME "{" "graph" NAME ; "base" NAME, ... ; "}"
    system       := "system" NAME "{" ("builtin" ":" ID ; | "levels" ":" NAMES ; "bonds" ":" NAMES ; ["stable" ;]) "}"

Vertex and edge names inside a graph are bare; everywhere else elements are
written with their kind, ``v:u`` or ``e:a``.  A three-element edge gets the
inverse ``~a``.  Unlisted partition elements are singletons; an edge whose
map entry is missing follows its inverse.  The last ``;`` of a block may be
omitted.  ``#`` starts a comment.

:func:`parse` checks syntax, names and element membership; the mathematical
conditions (graph axioms, compatibility, bonds) are left to the commands.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field

from ..invsys import ChainSystem
from ..presented import BUILTINS
from ..relations import ContractViolation, Partition
from ..topograph import FinGraph, GraphMap, bare, inverse_name
from ..uniformity import CofinitePresentation


@dataclass(frozen=True)
class Diagnostic:
    line: int
    col: int
    message: str
    expected: tuple = ()

    def __str__(self):
        exp = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"{self.line}:{self.col}: {self.message}{exp}"


class DSLError(Exception):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(map(str, self.diagnostics)))


# ---------------------------------------------------------------- lexer

_ID = r"(?:[A-Za-z0-9_~'.+]|-(?!>))+"
_TOKEN = re.compile(
    rf"(?P<ws>[ \t\r\f\v]+)|(?P<nl>\n)|(?P<comment>#[^\n]*)"
    rf"|(?P<qid>[ve]:{_ID})|(?P<arrow>->)|(?P<id>{_ID})|(?P<punct>[{{}}(),;:=])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # id, qid, punct, eof
    text: str
    line: int
    col: int

    def show(self):
        return "end of input" if self.kind == "eof" else repr(self.text)


def tokenize(text: str) -> list[Token]:
    out, line, start, pos = [], 1, 0, 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise DSLError([Diagnostic(line, pos - start + 1, f"unexpected character {text[pos]!r}")])
        kind = m.lastgroup
        if kind == "nl":
            line, start = line + 1, m.end()
        elif kind in ("qid", "id"):
            out.append(Token(kind, m.group(), line, pos - start + 1))
        elif kind in ("arrow", "punct"):
            out.append(Token("punct", m.group(), line, pos - start + 1))
        pos = m.end()
    out.append(Token("eof", "", line, pos - start + 1))
    return out


# ---------------------------------------------------------------- document


@dataclass(frozen=True)
class GraphDef:
    name: str
    graph: FinGraph
    pos: tuple = field(default=(0, 0), compare=False)
    kind = "graph"


@dataclass(frozen=True)
class PartitionDef:
    name: str
    graph: str
    partition: Partition
    pos: tuple = field(default=(0, 0), compare=False)
    kind = "partition"


@dataclass(frozen=True)
class MapDef:
    name: str
    source: str
    target: str
    map: GraphMap
    pos: tuple = field(default=(0, 0), compare=False)
    kind = "map"


@dataclass(frozen=True)
class PresentationDef:
    name: str
    graph: str
    base: tuple
    pos: tuple = field(default=(0, 0), compare=False)
    kind = "presentation"


@dataclass(frozen=True)
class SystemDef:
    name: str
    builtin: str | None = None
    levels: tuple = ()
    bonds: tuple = ()
    stable: bool = False
    pos: tuple = field(default=(0, 0), compare=False)
    kind = "system"


class Document:
    """Named definitions in source order."""

    def __init__(self, definitions=()):
        self.definitions = {}
        for d in definitions:
            if d.name in self.definitions:
                raise ValueError(f"duplicate definition {d.name!r}")
            self.definitions[d.name] = d

    def __eq__(self, other):
        return isinstance(other, Document) and list(self.definitions.values()) == list(other.definitions.values())

    def __len__(self):
        return len(self.definitions)

    def __contains__(self, name):
        return name in self.definitions

    def __getitem__(self, name):
        return self.definitions[name]

    def names(self, kind: str) -> list[str]:
        return [n for n, d in self.definitions.items() if d.kind == kind]

    def _get(self, name, kind):
        d = self.definitions.get(name)
        if d is None or d.kind != kind:
            raise ContractViolation(f"no {kind} named {name!r}", witness=name)
        return d

    def graph(self, name: str) -> FinGraph:
        return self._get(name, "graph").graph

    def partition(self, name: str) -> Partition:
        return self._get(name, "partition").partition

    def map(self, name: str) -> GraphMap:
        return self._get(name, "map").map

    def presentation(self, name: str) -> CofinitePresentation:
        d = self._get(name, "presentation")
        g = self.graph(d.graph)
        base = [Partition.discrete(g.carrier) if b == "discrete" else self.partition(b) for b in d.base]
        return CofinitePresentation(g, base)

    def system(self, name: str) -> ChainSystem:
        d = self._get(name, "system")
        if d.builtin is not None:
            return BUILTINS[d.builtin]()
        return ChainSystem.explicit([self.graph(n) for n in d.levels], [self.map(n) for n in d.bonds],
                                    stable=d.stable, name=name)


# ---------------------------------------------------------------- parser


class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0
        self.defs: dict[str, object] = {}

    # token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def fail(self, message, expected=(), tok=None):
        tok = tok or self.tok
        raise DSLError([Diagnostic(tok.line, tok.col, message, tuple(expected))])

    def at(self, text):
        return self.tok.kind == "punct" and self.tok.text == text

    def at_word(self, word):
        return self.tok.kind == "id" and self.tok.text == word

    def punct(self, text):
        if not self.at(text):
            self.fail(f"unexpected {self.tok.show()}", [repr(text)])
        self.i += 1

    def word(self, word):
        if not self.at_word(word):
            self.fail(f"unexpected {self.tok.show()}", [repr(word)])
        self.i += 1

    def ident(self, what="identifier") -> Token:
        if self.tok.kind != "id":
            self.fail(f"unexpected {self.tok.show()}", [what])
        t = self.tok
        self.i += 1
        return t

    def qident(self) -> Token:
        if self.tok.kind != "qid":
            self.fail(f"unexpected {self.tok.show()}", ["element (v:name or e:name)"])
        t = self.tok
        self.i += 1
        return t

    def end_stmt(self) -> bool:
        """Consume ';' after a statement; True when the block closes."""
        if self.at(";"):
            self.i += 1
            if self.at("}"):
                self.i += 1
                return True
            return False
        if self.at("}"):
            self.i += 1
            return True
        self.fail(f"unexpected {self.tok.show()}", ["';'", "'}'"])

    def id_list(self, what="identifier") -> list[Token]:
        out = [self.ident(what)]
        while self.at(","):
            self.i += 1
            out.append(self.ident(what))
        return out

    def ref(self, kind) -> Token:
        t = self.ident(f"{kind} name")
        d = self.defs.get(t.text)
        if d is None:
            self.fail(f"unknown {kind} {t.text!r}", tok=t)
        if d.kind != kind:
            self.fail(f"{t.text!r} is a {d.kind}, not a {kind}", tok=t)
        return t

    # definitions

    def document(self) -> Document:
        while self.tok.kind != "eof":
            t = self.tok
            handler = {"graph": self.graph, "partition": self.partition, "map": self.map,
                       "presentation": self.presentation, "system": self.system}.get(t.text if t.kind == "id" else None)
            if handler is None:
                self.fail(f"unexpected {t.show()}", ["'graph'", "'map'", "'partition'", "'presentation'", "'system'"])
            self.i += 1
            name = self.ident("name")
            if name.text in self.defs:
                self.fail(f"duplicate definition {name.text!r}", tok=name)
            if name.text == "discrete":
                self.fail("'discrete' is reserved for the discrete partition", tok=name)
            d = handler(name)
            self.defs[d.name] = d
        return Document(self.defs.values())

    def graph(self, name: Token) -> GraphDef:
        self.punct("{")
        seen, vertices, edges, orient = set(), [], [], None
        if self.at("}"):
            self.i += 1
        else:
            while True:
                key = self.ident("'vertices', 'edges' or 'orient'")
                if key.text not in ("vertices", "edges", "orient"):
                    self.fail(f"unexpected {key.show()}", ["'vertices'", "'edges'", "'orient'"], tok=key)
                if key.text in seen:
                    self.fail(f"repeated {key.text!r} section", tok=key)
                seen.add(key.text)
                self.punct(":")
                if key.text == "vertices":
                    vertices = self.id_list("vertex name")
                elif key.text == "orient":
                    orient = self.id_list("edge name")
                else:
                    edges = [self.edge()]
                    while self.at(","):
                        self.i += 1
                        edges.append(self.edge())
                if self.end_stmt():
                    break
        return GraphDef(name.text, self._build_graph(vertices, edges, orient), (name.line, name.col))

    def edge(self):
        self.punct("(")
        parts = self.id_list("edge field")
        if len(parts) not in (3, 4):
            self.fail(f"an edge has 3 or 4 fields, got {len(parts)}", tok=parts[0])
        self.punct(")")
        return parts

    def _build_graph(self, vertices, edges, orient) -> FinGraph:
        vs = {}
        for t in vertices:
            if t.text in vs:
                self.fail(f"duplicate vertex {t.text!r}", tok=t)
            vs[t.text] = t
        es, spec = {}, []
        for parts in edges:
            name = parts[0]
            inv = parts[1].text if len(parts) == 4 else inverse_name(name.text)
            if inv == name.text:
                self.fail(f"edge {name.text!r} cannot be its own inverse", tok=name)
            for e in (name.text, inv):
                if e in es:
                    self.fail(f"duplicate edge {e!r}", tok=name)
                es[e] = name
            for t in parts[-2:]:
                if t.text not in vs:
                    self.fail(f"unknown vertex {t.text!r}", tok=t)
            spec.append((name.text, inv, parts[-2].text, parts[-1].text))
        if orient is not None:
            for t in orient:
                if t.text not in es:
                    self.fail(f"unknown edge {t.text!r}", tok=t)
        return FinGraph.build(list(vs), spec, None if orient is None else [t.text for t in orient])

    def partition(self, name: Token) -> PartitionDef:
        self.word("on")
        gname = self.ref("graph")
        g = self.defs[gname.text].graph
        self.punct("{")
        blocks = []
        if self.at("}"):
            self.i += 1
        else:
            while True:
                self.word("block")
                self.punct("{")
                block = [self.element(g)]
                while self.at(","):
                    self.i += 1
                    block.append(self.element(g))
                self.punct("}")
                blocks.append(block)
                if self.end_stmt():
                    break
        seen = set()
        for block in blocks:
            for t in block:
                if t.text in seen:
                    self.fail(f"element {t.text!r} is in two blocks", tok=t)
                seen.add(t.text)
        p = Partition.from_blocks(g.carrier, [[t.text for t in b] for b in blocks], complete=True)
        return PartitionDef(name.text, gname.text, p, (name.line, name.col))

    def element(self, g: FinGraph) -> Token:
        t = self.qident()
        if t.text not in g.carrier.index:
            self.fail(f"{t.text!r} is not in the graph", tok=t)
        return t

    def map(self, name: Token) -> MapDef:
        self.punct(":")
        s = self.ref("graph")
        self.punct("->")
        t = self.ref("graph")
        src, tgt = self.defs[s.text].graph, self.defs[t.text].graph
        self.punct("{")
        mapping = {}
        if self.at("}"):
            self.i += 1
        else:
            while True:
                a = self.element(src)
                self.punct("->")
                b = self.element(tgt)
                if a.text in mapping:
                    self.fail(f"{a.text!r} is mapped twice", tok=a)
                mapping[a.text] = b.text
                if self.end_stmt():
                    break
        for e in src.edges:
            ie = src.inv.get(e)
            if e not in mapping and ie in mapping and mapping[ie] in tgt.inv:
                mapping[e] = tgt.inv[mapping[ie]]
        return MapDef(name.text, s.text, t.text, GraphMap(src, tgt, mapping), (name.line, name.col))

    def presentation(self, name: Token) -> PresentationDef:
        self.punct("{")
        self.word("graph")
        g = self.ref("graph")
        self.punct(";")
        self.word("base")
        base = []
        for t in self.id_list("partition name"):
            if t.text == "discrete":
                base.append(t.text)
                continue
            d = self.defs.get(t.text)
            if d is None or d.kind != "partition":
                self.fail(f"unknown partition {t.text!r}", tok=t)
            if d.graph != g.text:
                self.fail(f"partition {t.text!r} is on graph {d.graph!r}, not {g.text!r}", tok=t)
            base.append(t.text)
        self.end_stmt() or self.punct("}")
        return PresentationDef(name.text, g.text, tuple(base), (name.line, name.col))

    def ref_list(self, kind) -> list[Token]:
        out = [self.ref(kind)]
        while self.at(","):
            self.i += 1
            out.append(self.ref(kind))
        return out

    def system(self, name: Token) -> SystemDef:
        self.punct("{")
        keys = ("builtin", "levels", "bonds", "stable")
        fields = {}
        while True:
            key = self.ident("'builtin', 'levels', 'bonds' or 'stable'")
            if key.text not in keys:
                self.fail(f"unexpected {key.show()}", [repr(k) for k in keys], tok=key)
            if key.text in fields:
                self.fail(f"repeated {key.text!r} entry", tok=key)
            if key.text == "stable":
                fields["stable"] = key
            else:
                self.punct(":")
                if key.text == "builtin":
                    b = self.ident("builtin name")
                    if b.text not in ("phi1", "phi2"):
                        self.fail(f"unknown builtin system {b.text!r}", ["'phi1'", "'phi2'"], tok=b)
                    fields["builtin"] = b
                else:
                    fields[key.text] = self.ref_list("graph" if key.text == "levels" else "map")
            if self.end_stmt():
                break
        pos = (name.line, name.col)
        if "builtin" in fields:
            if len(fields) > 1:
                self.fail("a builtin system takes no other entries", tok=name)
            return SystemDef(name.text, builtin=fields["builtin"].text, pos=pos)
        if "levels" not in fields:
            self.fail("system needs 'builtin' or 'levels'", ["'builtin'", "'levels'"], tok=name)
        levels, bonds = fields["levels"], fields.get("bonds", [])
        if len(bonds) != len(levels) - 1:
            self.fail(f"{len(levels)} levels need {len(levels) - 1} bonds, got {len(bonds)}", tok=name)
        for k, b in enumerate(bonds):
            d = self.defs[b.text]
            if d.source != levels[k + 1].text or d.target != levels[k].text:
                self.fail(f"bond {b.text!r} must run from {levels[k + 1].text!r} to {levels[k].text!r}", tok=b)
        return SystemDef(name.text, None, tuple(t.text for t in levels), tuple(t.text for t in bonds),
                         "stable" in fields, pos)


def parse(text) -> Document:
    """Parse a document; raises :class:`DSLError` carrying diagnostics."""
    if isinstance(text, (bytes, bytearray)):
        try:
            text = bytes(text).decode("utf-8")
        except UnicodeDecodeError as exc:
            raise DSLError([Diagnostic(1, exc.start + 1, "input is not valid UTF-8")]) from None
    p = _Parser(text)
    try:
        return p.document()
    except ContractViolation as exc:
        t = p.tok
        raise DSLError([Diagnostic(t.line, t.col, str(exc))]) from None


def try_parse(text) -> tuple[Document | None, list[Diagnostic]]:
    try:
        return parse(text), []
    except DSLError as exc:
        return None, exc.diagnostics


# ---------------------------------------------------------------- printer


def _edge_pairs(g: FinGraph):
    # one line per inverse pair, led by its positive edge (or the smaller id)
    out, done = [], set()
    for e in g.edges:
        if e in done:
            continue
        i = g.inv.get(e, e)
        if g.orientation is not None and i in g.orientation and e not in g.orientation:
            e, i = i, e
        out.append((e, i))
        done |= {e, i}
    return out


def print_graph(name: str, g: FinGraph) -> str:
    lines = [f"graph {name} {{"]
    if g.vertices:
        lines.append("  vertices: " + ", ".join(bare(v) for v in g.vertices) + ";")
    pairs = _edge_pairs(g)
    if pairs:
        items = [f"({bare(e)}, {bare(i)}, {bare(g.src[e])}, {bare(g.tgt[e])})" for e, i in pairs]
        lines.append("  edges: " + ", ".join(items) + ";")
    if g.orientation:
        lines.append("  orient: " + ", ".join(bare(e) for e in sorted(g.orientation)) + ";")
    lines.append("}")
    return "\n".join(lines)


def print_partition(name: str, graph: str, p: Partition) -> str:
    blocks = [b for b in p.blocks if len(b) > 1]
    if not blocks:
        return f"partition {name} on {graph} {{ }}"
    body = "".join(f"  block {{ {', '.join(b)} }};\n" for b in blocks)
    return f"partition {name} on {graph} {{\n{body}}}"


def print_map(name: str, source: str, target: str, f: GraphMap) -> str:
    body = "".join(f"  {x} -> {f.mapping[x]};\n" for x in sorted(f.mapping))
    return f"map {name} : {source} -> {target} {{\n{body}}}" if body else f"map {name} : {source} -> {target} {{ }}"


def print_definition(d) -> str:
    if d.kind == "graph":
        return print_graph(d.name, d.graph)
    if d.kind == "partition":
        return print_partition(d.name, d.graph, d.partition)
    if d.kind == "map":
        return print_map(d.name, d.source, d.target, d.map)
    if d.kind == "presentation":
        return f"presentation {d.name} {{\n  graph {d.graph};\n  base {', '.join(d.base)};\n}}"
    if d.builtin is not None:
        return f"system {d.name} {{ builtin: {d.builtin}; }}"
    lines = [f"system {d.name} {{", f"  levels: {', '.join(d.levels)};"]
    if d.bonds:
        lines.append(f"  bonds: {', '.join(d.bonds)};")
    if d.stable:
        lines.append("  stable;")
    return "\n".join(lines + ["}"])


def print_document(doc: Document) -> str:
    return "".join(print_definition(d) + "\n\n" for d in doc.definitions.values()).rstrip("\n") + ("\n" if len(doc) else "")


def graph_document(name: str, g: FinGraph) -> Document:
    return Document([GraphDef(name, g)])
