"""Cofinite graphs presented by a finite filter base of compatible partitions.

A :class:`CofinitePresentation` pairs a finite graph with a list of
compatible partitions (entourages).  On a finite carrier the uniform topology
they generate has basis ``{R[x]}`` and is always a partition topology; the
:class:`FiniteTopology` helper computes it directly from that basis so the
closure formulas can be checked against it.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .relations import (
    Carrier,
    ContractViolation,
    Partition,
    SetMap,
    Verdict,
    meet,
    pullback,
    pushforward,
)
from .topograph import (
    FinGraph,
    GraphMap,
    choose_orientation,
    compatible_refinement,
    disjoint_union,
    is_compatible,
    quotient_graph,
)


def _check_member(graph: FinGraph, p: Partition):
    if p.carrier != graph.carrier:
        raise ContractViolation("base member is not a partition of the graph")
    v = is_compatible(graph, p)
    if not v:
        raise ContractViolation(f"base member violates compatibility condition ({v.reason})", witness=v.witness)


class CofinitePresentation:
    """A finite graph with a filter base of compatible partitions."""

    __slots__ = ("graph", "base")

    def __init__(self, graph: FinGraph, base: Iterable[Partition]):
        base = tuple(p.partition if hasattr(p, "partition") else p for p in base)
        if not base:
            raise ContractViolation("a filter base needs at least one member")
        for p in base:
            _check_member(graph, p)
        self.graph = graph
        self.base = base

    @property
    def carrier(self) -> Carrier:
        return self.graph.carrier

    def finest(self) -> Partition:
        """The meet of all members; on a normalized base it is itself a member."""
        return meet(*self.base)

    def is_filter_base(self) -> bool:
        members = set(self.base)
        return all(any(m.refines(a) and m.refines(b) for m in members) for a, b in itertools.combinations(self.base, 2))

    def __eq__(self, other):
        return isinstance(other, CofinitePresentation) and self.graph == other.graph and self.base == other.base

    def __hash__(self):
        return hash((self.graph, self.base))

    def __repr__(self):
        return f"CofinitePresentation({self.graph!r}, {len(self.base)} members)"


@dataclass(frozen=True)
class ClosureReport:
    input: frozenset
    closure: frozenset
    images: tuple  # R[A] for each base member, in base order


@dataclass(frozen=True)
class UniformQuotient:
    presentation: CofinitePresentation
    projection: GraphMap
    improper: bool  # no base member contained k


def normalize_base(pres: CofinitePresentation) -> CofinitePresentation:
    """Close the base under pairwise meets, drop duplicates, sort canonically."""
    members = set(pres.base)
    frontier = list(members)
    while frontier:
        fresh = []
        for a in frontier:
            for b in list(members):
                m = meet(a, b)
                if m not in members:
                    members.add(m)
                    fresh.append(m)
        frontier = fresh
    return CofinitePresentation(pres.graph, sorted(members, key=Partition.sort_key))


def is_separating(pres: CofinitePresentation) -> Verdict:
    m = pres.finest()
    if m.is_discrete():
        return Verdict(True)
    for block in m.blocks:
        if len(block) > 1:
            return Verdict(False, (block[0], block[1]), "intersection of the base is not the diagonal")
    raise AssertionError("unreachable")


def closure(pres: CofinitePresentation, a: Iterable[str]) -> ClosureReport:
    """Closure of ``a`` as the intersection of R[a] over the base.

    The formula needs a filter base, so a base that is not one is normalized
    first and the images refer to the normalized members.
    """
    a = frozenset(a)
    if not pres.is_filter_base():
        pres = normalize_base(pres)
    images = tuple(p.image(a) for p in pres.base)
    out = frozenset(pres.carrier.ids)
    for img in images:
        out &= img
    return ClosureReport(a, out, images)


class FiniteTopology:
    """The topology on a finite carrier generated by a basis of subsets.

    Sets are bitmasks over carrier indices.
    """

    def __init__(self, carrier: Carrier, basis: Iterable[Iterable[str]]):
        self.carrier = carrier
        self.basis = sorted({self.to_mask(b) for b in basis})
        n = len(carrier)
        # smallest basic neighbourhood of each point; the basis is assumed to be a basis
        self._nbhd = []
        full = (1 << n) - 1
        for i in range(n):
            m = full
            for b in self.basis:
                if b >> i & 1:
                    m &= b
            self._nbhd.append(m)

    @classmethod
    def from_presentation(cls, pres: CofinitePresentation) -> FiniteTopology:
        return cls(pres.carrier, (p.image([x]) for p in pres.base for x in pres.carrier.ids))

    def to_mask(self, elements: Iterable[str]) -> int:
        m = 0
        for x in elements:
            m |= 1 << self.carrier.index[x]
        return m

    def to_set(self, mask: int) -> frozenset:
        return frozenset(x for i, x in enumerate(self.carrier.ids) if mask >> i & 1)

    def closure_mask(self, mask: int) -> int:
        out = 0
        for i, nb in enumerate(self._nbhd):
            if nb & mask:
                out |= 1 << i
        return out

    def closure(self, elements: Iterable[str]) -> frozenset:
        return self.to_set(self.closure_mask(self.to_mask(elements)))

    def is_open(self, elements: Iterable[str]) -> bool:
        m = self.to_mask(elements)
        return all(self._nbhd[i] & ~m == 0 for i in range(len(self._nbhd)) if m >> i & 1)

    def is_closed(self, elements: Iterable[str]) -> bool:
        m = self.to_mask(elements)
        return self.closure_mask(m) == m

    def all_opens(self, limit: int = 12) -> list[int]:
        """Every open set as a bitmask; exponential, so capped at ``limit`` points."""
        if len(self.carrier) > limit:
            raise ContractViolation(f"refusing to list the opens of a {len(self.carrier)}-point space")
        opens = {0}
        for b in self.basis:
            opens |= {o | b for o in opens}
        return sorted(opens)


def initial_base(source: FinGraph, maps: Sequence[tuple]) -> CofinitePresentation:
    """Coarsest uniformity on ``source`` making every map uniformly continuous.

    ``maps`` holds ``(map, target_presentation)`` pairs, the map being a
    :class:`GraphMap` or a :class:`SetMap` on the graph carriers.  A pullback
    that is not compatible (possible only for set maps) is replaced by its
    compatible refinement.
    """
    if not maps:
        raise ContractViolation("initial_base needs at least one map")
    oriented = choose_orientation(source)
    pulled = []
    for f, target in maps:
        sm = f.as_setmap() if isinstance(f, GraphMap) else f
        if sm.domain != source.carrier or sm.codomain != target.carrier:
            raise ContractViolation("map does not run from the source into the target presentation")
        for r in target.base:
            p = pullback(sm, r)
            if not is_compatible(source, p):
                p = compatible_refinement(oriented, p).partition
            pulled.append(p)
    return normalize_base(CofinitePresentation(source, pulled))


def uniform_sum(presentations: Sequence[CofinitePresentation]):
    """Finite uniform sum.  Returns the presentation and the summand inclusions."""
    if not presentations:
        raise ContractViolation("uniform_sum needs a nonempty list")
    normal = [normalize_base(p) for p in presentations]
    graph, inclusions = disjoint_union([p.graph for p in normal])
    c = graph.carrier
    members = []
    for choice in itertools.product(*(p.base for p in normal)):
        lab = np.empty(len(c), dtype=np.int64)
        offset = 0
        for inc, p in zip(inclusions, choice):
            idx = c.indices(inc.mapping[x] for x in p.carrier.ids)
            lab[idx] = p.labels + offset
            offset += p.n_blocks
        members.append(Partition(c, lab))
    return normalize_base(CofinitePresentation(graph, members)), inclusions


def _improper(g: FinGraph) -> Partition:
    # coarsest compatible partition: V | E+ | E- (one block on an edgeless graph)
    return compatible_refinement(choose_orientation(g), Partition.indiscrete(g.carrier)).partition


def members_containing(pres: CofinitePresentation, k: Partition) -> tuple[list[Partition], bool]:
    """Base members that contain ``k``.  When there are none, the pullback of
    the improper member of the quotient stands in and the flag is True."""
    k = k.partition if hasattr(k, "partition") else k
    found = [r for r in pres.base if k.refines(r)]
    if found:
        return found, False
    qg, proj = quotient_graph(pres.graph, k)
    return [pullback(proj.as_setmap(), _improper(qg))], True


def uniform_quotient(pres: CofinitePresentation, k) -> UniformQuotient:
    """The uniform quotient graph modulo a compatible partition ``k``.

    Its base is the pushforward of every base member containing ``k``.
    """
    k = k.partition if hasattr(k, "partition") else k
    qg, proj = quotient_graph(pres.graph, k)
    found, improper = members_containing(pres, k)
    q = proj.as_setmap()
    base = [pushforward(q, r) for r in found]
    return UniformQuotient(normalize_base(CofinitePresentation(qg, base)), proj, improper)


def hausdorff_quotient_check(pres: CofinitePresentation, k) -> Verdict:
    """Whether the base members containing ``k`` intersect exactly in ``k``."""
    k = k.partition if hasattr(k, "partition") else k
    v = is_compatible(pres.graph, k)
    if not v:
        raise ContractViolation(f"partition violates compatibility condition ({v.reason})", witness=v.witness)
    found, _ = members_containing(pres, k)
    inter = meet(*found)
    if inter == k:
        return Verdict(True)
    # inter contains k, so some inter-block splits into several k-blocks
    for block in inter.blocks:
        labs = {int(k.labels[k.carrier.index[x]]): x for x in reversed(block)}
        if len(labs) > 1:
            a, b = sorted(labs.values())[:2]
            return Verdict(False, (a, b), "intersection of the members containing k is larger than k")
    raise AssertionError("unreachable")


def saturated_closure(top: FiniteTopology, k: Partition, elements: Iterable[str]) -> frozenset:
    """Smallest closed, k-saturated set containing ``elements``."""
    m = top.to_mask(elements)
    while True:
        nxt = top.to_mask(k.image(top.to_set(top.closure_mask(m))))
        if nxt == m:
            return top.to_set(m)
        m = nxt


def quotient_topology_agreement(pres: CofinitePresentation, k, *, exhaustive_limit: int = 10,
                                samples: int = 2000, seed: int = 0) -> Verdict:
    """Compare the k-saturated closure with the intersection of R[A] over the
    members containing ``k``, for every subset A (sampled on big carriers).

    A failure carries the first disagreeing A in (size, lexicographic) order.
    """
    k = k.partition if hasattr(k, "partition") else k
    pres = normalize_base(pres)
    top = FiniteTopology.from_presentation(pres)
    found, _ = members_containing(pres, k)
    ids = pres.carrier.ids

    def agrees(a):
        rhs = frozenset(ids)
        for r in found:
            rhs &= r.image(a)
        return saturated_closure(top, k, a) == rhs

    if len(ids) <= exhaustive_limit:
        candidates = (c for size in range(len(ids) + 1) for c in itertools.combinations(ids, size))
    else:
        rng = np.random.default_rng(seed)
        draws = {tuple(x for x, keep in zip(ids, rng.random(len(ids)) < 0.5) if keep) for _ in range(samples)}
        candidates = iter(sorted(draws, key=lambda c: (len(c), c)))
    for a in candidates:
        if not agrees(a):
            return Verdict(False, frozenset(a), "saturated closure differs from the entourage formula")
    return Verdict(True)


def restrict_presentation(pres: CofinitePresentation, sub: FinGraph) -> CofinitePresentation:
    """The uniform subgraph: every member intersected with sub x sub."""
    inc = SetMap(sub.carrier, pres.carrier, {x: x for x in sub.carrier})
    return normalize_base(CofinitePresentation(sub, [pullback(inc, r) for r in pres.base]))
