"""Finite graphs with edge involution, graph maps and compatible partitions.

Vertex identifiers carry the prefix ``v:`` and edge identifiers ``e:``, so the
vertices and edges of a graph together form one :class:`Carrier` and a
partition of the whole graph is an ordinary :class:`Partition`.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from .relations import (
    Carrier,
    ContractViolation,
    Partition,
    SetMap,
    Verdict,
    kernel,
    meet,
    pullback,
)
from . import kernels

V, E = "v:", "e:"


def vid(name) -> str:
    return V + str(name)


def eid(name) -> str:
    return E + str(name)


def bare(x: str) -> str:
    return x[2:]


def inverse_name(name: str) -> str:
    return name[1:] if name.startswith("~") else "~" + name


@dataclass(frozen=True)
class Violation:
    code: str
    subject: object
    message: str

    def __str__(self):
        return self.message


class FinGraph:
    """A finite graph: source, target and a fixed-point-free edge involution.

    The constructor only checks namespaces; use :func:`validate_graph` for the
    graph axioms.  ``orientation``, when given, is a set of edge ids holding one
    edge of each inverse pair.  An edgeless graph always carries the empty
    orientation.
    """

    __slots__ = ("vertices", "edges", "src", "tgt", "inv", "orientation", "_carrier", "_tables")

    def __init__(self, vertices: Iterable[str], edges: Iterable[str], src: Mapping[str, str],
                 tgt: Mapping[str, str], inv: Mapping[str, str], orientation: Iterable[str] | None = None):
        self.vertices = Carrier(vertices)
        self.edges = Carrier(edges)
        for x in self.vertices:
            if not x.startswith(V):
                raise ContractViolation(f"vertex id {x!r} must start with {V!r}", witness=x)
        for x in self.edges:
            if not x.startswith(E):
                raise ContractViolation(f"edge id {x!r} must start with {E!r}", witness=x)
        self.src = dict(src)
        self.tgt = dict(tgt)
        self.inv = dict(inv)
        if orientation is None and not self.edges:
            orientation = ()
        self.orientation = None if orientation is None else frozenset(orientation)
        self._carrier = None
        self._tables = None

    @classmethod
    def build(cls, vertices: Iterable = (), edges: Iterable[tuple] = (), orient: Iterable | None = None) -> FinGraph:
        """Build from bare names.  Each edge is ``(name, src, tgt)`` or
        ``(name, inverse_name, src, tgt)``; the inverse edge is added."""
        vs = [vid(v) for v in vertices]
        src, tgt, inv = {}, {}, {}
        for spec in edges:
            if len(spec) == 3:
                name, s, t = spec
                iname = inverse_name(str(name))
            else:
                name, iname, s, t = spec
            a, b = eid(name), eid(iname)
            src[a], tgt[a], inv[a] = vid(s), vid(t), b
            src[b], tgt[b], inv[b] = vid(t), vid(s), a
        orientation = None if orient is None else [eid(x) for x in orient]
        return cls(vs, list(src), src, tgt, inv, orientation)

    @property
    def carrier(self) -> Carrier:
        if self._carrier is None:
            self._carrier = Carrier(self.vertices.ids + self.edges.ids)
        return self._carrier

    def is_vertex(self, x: str) -> bool:
        return x in self.vertices.index

    def is_edge(self, x: str) -> bool:
        return x in self.edges.index

    def tables(self):
        """Index tables (s, t, inv, is_vertex) on the carrier, with s, t and
        inv extended to vertices as the identity."""
        if self._tables is None:
            c = self.carrier
            n = len(c)
            s, t, i = np.arange(n), np.arange(n), np.arange(n)
            try:
                for e in self.edges:
                    k = c.index[e]
                    s[k] = c.index[self.src[e]]
                    t[k] = c.index[self.tgt[e]]
                    i[k] = c.index[self.inv[e]]
            except KeyError as exc:
                raise ContractViolation(f"graph structure is incomplete at {exc.args[0]!r}", witness=exc.args[0]) from None
            is_v = np.array([x.startswith(V) for x in c.ids], dtype=bool)
            self._tables = (s, t, i, is_v)
        return self._tables

    def with_orientation(self, orientation: Iterable[str] | None) -> FinGraph:
        return FinGraph(self.vertices, self.edges, self.src, self.tgt, self.inv, orientation)

    def positive(self, e: str) -> bool:
        return e in self.orientation

    def pairs(self) -> list[tuple[str, str]]:
        """Inverse pairs (e, inv e) with e the smaller id, in sorted order."""
        return sorted({tuple(sorted((e, self.inv[e]))) for e in self.edges})

    def n_edge_pairs(self) -> int:
        return len(self.edges) // 2

    def _key(self):
        return (self.vertices.ids, self.edges.ids, tuple(sorted(self.src.items())), tuple(sorted(self.tgt.items())),
                tuple(sorted(self.inv.items())), None if self.orientation is None else tuple(sorted(self.orientation)))

    def __eq__(self, other):
        return isinstance(other, FinGraph) and self._key() == other._key()

    def __hash__(self):
        return hash(self._key())

    def __repr__(self):
        return f"FinGraph({len(self.vertices)} vertices, {self.n_edge_pairs()} edge pairs)"


def discrete_graph(ids: Iterable[str]) -> FinGraph:
    """An edgeless graph; turns a plain set into a graph."""
    return FinGraph([vid(x) for x in ids], [], {}, {}, {})


def induced_subgraph(g: FinGraph, vertices: Iterable[str]) -> FinGraph:
    """The subgraph on ``vertices`` with every edge between them."""
    keep = set(vertices)
    es = [e for e in g.edges if g.src[e] in keep and g.tgt[e] in keep]
    orientation = None if g.orientation is None else [e for e in es if e in g.orientation]
    return FinGraph(keep, es, {e: g.src[e] for e in es}, {e: g.tgt[e] for e in es},
                    {e: g.inv[e] for e in es}, orientation)


def disjoint_union(graphs: list[FinGraph], tags: list[str] | None = None):
    """Disjoint union with ids ``v:<tag>.<name>``; returns the graph and the inclusions."""
    tags = tags or [str(i) for i in range(len(graphs))]

    def lift(tag, x):
        return x[:2] + tag + "." + x[2:]

    vs, es, src, tgt, inv, orient = [], [], {}, {}, {}, []
    oriented = all(g.orientation is not None for g in graphs)
    for tag, g in zip(tags, graphs):
        vs += [lift(tag, v) for v in g.vertices]
        for e in g.edges:
            le = lift(tag, e)
            es.append(le)
            src[le], tgt[le], inv[le] = lift(tag, g.src[e]), lift(tag, g.tgt[e]), lift(tag, g.inv[e])
            if oriented and e in g.orientation:
                orient.append(le)
    total = FinGraph(vs, es, src, tgt, inv, orient if oriented else None)
    inclusions = [GraphMap(g, total, {x: lift(tag, x) for x in g.carrier}) for tag, g in zip(tags, graphs)]
    return total, inclusions


# ---------------------------------------------------------------- validation


def validate_graph(g: FinGraph) -> list[Violation]:
    """All violated graph axioms, each with its witness."""
    out = []
    for e in g.edges:
        for name, table, pool in (("src", g.src, g.vertices), ("tgt", g.tgt, g.vertices), ("inv", g.inv, g.edges)):
            if e not in table:
                out.append(Violation(f"{name}-missing", e, f"edge {e} has no {name}"))
            elif table[e] not in pool:
                out.append(Violation(f"{name}-range", e, f"{name}({e}) = {table[e]} is not a valid target"))
    if out:
        return out
    for e in g.edges:
        ie = g.inv[e]
        if ie == e:
            out.append(Violation("involution-fixed", e, f"involution has fixed edge {e}"))
            continue
        if g.inv[ie] != e:
            out.append(Violation("involution", e, f"inv(inv({e})) = {g.inv[ie]} != {e}"))
        if g.tgt[ie] != g.src[e]:
            out.append(Violation("tgt-inv", e, f"tgt(inv({e})) = {g.tgt[ie]} != src({e}) = {g.src[e]}"))
        if g.src[ie] != g.tgt[e]:
            out.append(Violation("src-inv", e, f"src(inv({e})) = {g.src[ie]} != tgt({e}) = {g.tgt[e]}"))
    if g.orientation is not None:
        stray = sorted(g.orientation - set(g.edges.ids))
        for e in stray:
            out.append(Violation("orientation-range", e, f"orientation contains non-edge {e}"))
        for a, b in g.pairs():
            n = (a in g.orientation) + (b in g.orientation)
            if n != 1:
                out.append(Violation("orientation", (a, b), f"orientation holds {n} edges of the pair {{{a}, {b}}}"))
    return out


def choose_orientation(g: FinGraph) -> FinGraph:
    """Keep an existing orientation; otherwise take the smaller id of each pair."""
    if g.orientation is not None:
        return g
    return g.with_orientation(a for a, _ in g.pairs())


# ---------------------------------------------------------------- graph maps


class GraphMap:
    """A map of graphs given by one assignment on vertices and edges."""

    __slots__ = ("source", "target", "mapping", "_setmap")

    def __init__(self, source: FinGraph, target: FinGraph, mapping: Mapping[str, str]):
        self.source = source
        self.target = target
        self.mapping = dict(mapping)
        self._setmap = None

    @classmethod
    def from_function(cls, source: FinGraph, target: FinGraph, fn) -> GraphMap:
        return cls(source, target, {x: fn(x) for x in source.carrier})

    @classmethod
    def identity(cls, g: FinGraph) -> GraphMap:
        return cls(g, g, {x: x for x in g.carrier})

    @property
    def vmap(self) -> dict[str, str]:
        return {x: y for x, y in self.mapping.items() if self.source.is_vertex(x)}

    @property
    def emap(self) -> dict[str, str]:
        return {x: y for x, y in self.mapping.items() if self.source.is_edge(x)}

    def __call__(self, x: str) -> str:
        return self.mapping[x]

    def as_setmap(self) -> SetMap:
        if self._setmap is None:
            self._setmap = SetMap(self.source.carrier, self.target.carrier, self.mapping)
        return self._setmap

    def then(self, other: GraphMap) -> GraphMap:
        """``other`` after ``self``."""
        return GraphMap(self.source, other.target, {x: other.mapping[y] for x, y in self.mapping.items()})

    def is_surjective(self) -> bool:
        return set(self.mapping.values()) >= set(self.target.carrier)

    def is_bijective(self) -> bool:
        return self.is_surjective() and len(set(self.mapping.values())) == len(self.source.carrier)

    def __eq__(self, other):
        return (isinstance(other, GraphMap) and self.source == other.source and self.target == other.target
                and self.mapping == other.mapping)

    def __hash__(self):
        return hash(tuple(sorted(self.mapping.items())))

    def __repr__(self):
        return f"GraphMap({self.source!r} -> {self.target!r})"


def graph_map_validate(f: GraphMap) -> list[Violation]:
    """Every failed preservation condition, with the edge or pair responsible."""
    src, tgt = f.source, f.target
    out = []
    for x in src.carrier:
        if x not in f.mapping:
            out.append(Violation("missing", x, f"{x} has no image"))
        elif f.mapping[x] not in tgt.carrier:
            out.append(Violation("range", x, f"image of {x} is {f.mapping[x]}, not in the target"))
        elif src.is_vertex(x) != tgt.is_vertex(f.mapping[x]):
            kind = "vertex" if src.is_vertex(x) else "edge"
            out.append(Violation("kind", x, f"{kind} {x} maps to {f.mapping[x]}"))
    if out:
        return out
    m = f.mapping
    for e in src.edges:
        fe = m[e]
        if m[src.src[e]] != tgt.src[fe]:
            out.append(Violation("src", e, f"f(src({e})) = {m[src.src[e]]} but src(f({e})) = {tgt.src[fe]}"))
        if m[src.tgt[e]] != tgt.tgt[fe]:
            out.append(Violation("tgt", e, f"f(tgt({e})) = {m[src.tgt[e]]} but tgt(f({e})) = {tgt.tgt[fe]}"))
    for a, b in src.pairs():
        if m[b] != tgt.inv[m[a]]:
            out.append(Violation("inv", (a, b), f"f({b}) = {m[b]} but inv(f({a})) = {tgt.inv[m[a]]}"))
    return out


def is_isomorphism(f: GraphMap) -> bool:
    return not graph_map_validate(f) and f.is_bijective()


# ---------------------------------------------------------------- compatibility


def _unwrap(p) -> Partition:
    return p.partition if isinstance(p, CompatiblePartition) else p


def is_compatible(g: FinGraph, p: Partition) -> Verdict:
    """Check the three conditions for a compatible equivalence relation.

    On failure ``reason`` names the condition ("1", "2" or "3") and
    ``witness`` is a pair of related elements.
    """
    p = _unwrap(p)
    if p.carrier != g.carrier:
        raise ContractViolation("partition is not on the vertices and edges of the graph")
    ids = g.carrier.ids
    s, t, inv, is_v = g.tables()
    j, i = kernels.refines_witness(p.labels, is_v.astype(np.int64))
    if j >= 0:
        return Verdict(False, (ids[j], ids[i]), "1")
    for table in (s, t, inv):
        j, i = kernels.refines_witness(p.labels, p.labels[table])
        if j >= 0:
            return Verdict(False, (ids[j], ids[i]), "2")
    bad = np.flatnonzero(p.labels == p.labels[inv])
    bad = bad[~is_v[bad]]
    if bad.size:
        k = bad[0]
        return Verdict(False, (ids[k], ids[inv[k]]), "3")
    return Verdict(True)


def is_orientation_preserving(g: FinGraph, p: Partition) -> Verdict:
    p = _unwrap(p)
    if g.orientation is None:
        raise ContractViolation("graph has no orientation")
    sign = np.array([x in g.orientation for x in g.carrier.ids], dtype=np.int64)
    j, i = kernels.refines_witness(p.labels, sign)
    if j >= 0:
        return Verdict(False, (g.carrier.ids[j], g.carrier.ids[i]), "mixes E+ and E-")
    return Verdict(True)


@dataclass(frozen=True)
class CompatiblePartition:
    """A partition of a graph's vertices and edges satisfying the compatibility conditions."""

    graph: FinGraph
    partition: Partition

    def __post_init__(self):
        v = is_compatible(self.graph, self.partition)
        if not v:
            raise ContractViolation(f"partition violates compatibility condition ({v.reason})", witness=v.witness)


def orientation_split(g: FinGraph) -> Partition:
    """The partition V | E+ | E- (empty parts dropped)."""
    if g.orientation is None:
        raise ContractViolation("graph has no orientation")
    lab = [0 if g.is_vertex(x) else (1 if x in g.orientation else 2) for x in g.carrier.ids]
    return Partition(g.carrier, lab)


def compatible_refinement(g: FinGraph, p: Partition) -> CompatiblePartition:
    """The compatible, orientation-preserving partition built from ``p``.

    With s, t and inv extended to vertices as the identity, intersect ``p``
    with its pullbacks along s, t and inv, then split the result into its
    parts on V, E+ and E-.
    """
    p = _unwrap(p)
    if g.orientation is None:
        raise ContractViolation("compatible_refinement needs an oriented graph")
    if p.carrier != g.carrier:
        raise ContractViolation("partition is not on the vertices and edges of the graph")
    s, t, inv, _ = g.tables()
    c = g.carrier
    s1 = pullback(SetMap(c, c, table=s), p)
    s2 = pullback(SetMap(c, c, table=t), p)
    s3 = pullback(SetMap(c, c, table=inv), p)
    s4 = meet(p, s1, s2, s3)
    return CompatiblePartition(g, meet(s4, orientation_split(g)))


def quotient_graph(g: FinGraph, k) -> tuple[FinGraph, GraphMap]:
    """The graph g/k and the projection.  Each class is named by its least member."""
    k = _unwrap(k)
    v = is_compatible(g, k)
    if not v:
        raise ContractViolation(f"partition violates compatibility condition ({v.reason})", witness=v.witness)
    ids = g.carrier.ids
    reps = [ids[int(np.argmax(k.labels == lab))] for lab in range(k.n_blocks)]
    proj = {x: reps[lab] for x, lab in zip(ids, k.labels)}
    qv = [r for r in reps if g.is_vertex(r)]
    qe = [r for r in reps if g.is_edge(r)]
    src = {r: proj[g.src[r]] for r in qe}
    tgt = {r: proj[g.tgt[r]] for r in qe}
    inv = {r: proj[g.inv[r]] for r in qe}
    orientation = None
    if g.orientation is not None and is_orientation_preserving(g, k):
        orientation = [r for r in qe if r in g.orientation]
    q = FinGraph(qv, qe, src, tgt, inv, orientation)
    return q, GraphMap(g, q, proj)


def graph_kernel(f: GraphMap) -> Partition:
    return kernel(f.as_setmap())
