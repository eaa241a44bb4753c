"""Chain inverse systems of finite graphs and their truncated inverse limits.

Conventions
-----------
Levels are numbered 0, 1, 2, ...; ``bond(n)`` maps level ``n + 1`` onto
level ``n``.  The two-step map from level ``n + 2`` to level ``n`` is
``bond(n) ∘ bond(n + 1)`` in function-application order.

A point of the limit is a thread: one element per level, each the bond image
of the next.  A thread truncated at level ``n`` is fixed by its level-``n``
coordinate, so a truncation is the set of level-``n`` elements that lift to
every materialized level above (all of them when the bonds are onto).
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .relations import ContractViolation, Partition, SetMap
from .topograph import (
    FinGraph,
    GraphMap,
    Violation,
    graph_map_validate,
    is_compatible,
    quotient_graph,
    validate_graph,
)
from .uniformity import CofinitePresentation, is_separating, normalize_base


class ChainSystem:
    """An N-indexed inverse system of finite graphs, materialized lazily.

    ``level_fn(n)`` builds level ``n`` and ``bond_fn(n)`` the bond from level
    ``n + 1`` to level ``n``.  ``top`` marks the last distinct level of a
    finite system; with ``stable`` the levels past it repeat the top level
    under identity bonds, otherwise asking for them is an error.

    ``direct_bond(i, j)``, when given, builds the bond from level ``j`` to
    level ``i`` in one step; validation compares it with the composite.
    ``quotient(n, x)`` is the map from a presented graph into level ``n``.
    """

    def __init__(self, level_fn: Callable[[int], FinGraph], bond_fn: Callable[[int], GraphMap], *,
                 top: int | None = None, stable: bool = True, surjective: bool = False, name: str = "",
                 direct_bond: Callable[[int, int], GraphMap] | None = None,
                 quotient: Callable[[int, str], str] | None = None):
        self._level_fn = level_fn
        self._bond_fn = bond_fn
        self.top = top
        self.stable = stable
        self.surjective = surjective
        self.name = name
        self.direct_bond = direct_bond
        self.quotient = quotient
        self._levels: dict[int, FinGraph] = {}
        self._bonds: dict[int, GraphMap] = {}
        self._tables: dict[tuple[int, int], np.ndarray] = {}
        self._lock = threading.RLock()

    @classmethod
    def explicit(cls, levels: Sequence[FinGraph], bonds: Sequence[GraphMap], *, stable: bool = False,
                 surjective: bool = False, name: str = "", quotient=None) -> ChainSystem:
        if len(bonds) != max(len(levels) - 1, 0):
            raise ContractViolation("a chain of k levels needs k - 1 bonds")
        levels, bonds = list(levels), list(bonds)
        return cls(levels.__getitem__, bonds.__getitem__, top=len(levels) - 1, stable=stable,
                   surjective=surjective, name=name, quotient=quotient)

    @classmethod
    def constant(cls, g: FinGraph, name: str = "constant") -> ChainSystem:
        return cls(lambda n: g, lambda n: GraphMap.identity(g), top=0, stable=True, surjective=True, name=name,
                   quotient=lambda n, x: x)

    @property
    def bounded(self) -> bool:
        return self.top is not None and not self.stable

    def _check(self, n):
        if n < 0:
            raise ContractViolation(f"no level {n}")
        if self.bounded and n > self.top:
            raise ContractViolation(f"level {n} is beyond the last level {self.top}", witness=n)

    def level(self, n: int) -> FinGraph:
        self._check(n)
        if self.top is not None and n > self.top:
            n = self.top
        g = self._levels.get(n)
        if g is None:
            with self._lock:
                g = self._levels.get(n)
                if g is None:
                    g = self._levels[n] = self._level_fn(n)
        return g

    def bond(self, n: int) -> GraphMap:
        """The bond from level n + 1 to level n."""
        self._check(n + 1)
        if self.top is not None and n >= self.top:
            return GraphMap.identity(self.level(self.top))
        f = self._bonds.get(n)
        if f is None:
            with self._lock:
                f = self._bonds.get(n)
                if f is None:
                    f = self._bonds[n] = self._bond_fn(n)
        return f

    def table(self, i: int, j: int) -> np.ndarray:
        """Index table of the composite bond from level j down to level i."""
        if j < i:
            raise ContractViolation("bonds run downward: need i <= j")
        key = (i, j)
        t = self._tables.get(key)
        if t is not None:
            return t
        if i == j:
            t = np.arange(len(self.level(i).carrier))
        else:
            t = self.table(i, j - 1)[self.bond(j - 1).as_setmap().table]
        with self._lock:
            self._tables[key] = t
        return t

    def composite(self, i: int, j: int) -> SetMap:
        return SetMap(self.level(j).carrier, self.level(i).carrier, table=self.table(i, j))

    def __repr__(self):
        return f"ChainSystem({self.name or 'anonymous'})"


def validate_system(sys: ChainSystem, horizon: int) -> list[Violation]:
    """Check levels 0..horizon, the bonds between them and bond coherence.

    Each violation's subject is ``(level, witness)``.
    """
    out = []
    for n in range(horizon + 1):
        out += [Violation(v.code, (n, v.subject), f"level {n}: {v.message}") for v in validate_graph(sys.level(n))]
    if out:
        return out
    for n in range(horizon):
        f = sys.bond(n)
        if f.source != sys.level(n + 1) or f.target != sys.level(n):
            out.append(Violation("bond-ends", (n, None), f"bond {n} does not run from level {n + 1} to level {n}"))
            continue
        out += [Violation(v.code, (n, v.subject), f"bond {n}: {v.message}") for v in graph_map_validate(f)]
        if sys.surjective and not f.is_surjective():
            miss = sorted(set(f.target.carrier) - set(f.mapping.values()))[0]
            out.append(Violation("surjective", (n, miss), f"bond {n} misses {miss}"))
    if out or sys.direct_bond is None:
        return out
    for i in range(horizon + 1):
        for j in range(i, horizon + 1):
            direct = sys.direct_bond(i, j)
            comp = sys.composite(i, j).assignment
            for x in sys.level(j).carrier:
                if direct.mapping.get(x) != comp[x]:
                    out.append(Violation("coherence", ((i, j), x),
                                         f"bond {i}<-{j} sends {x} to {direct.mapping.get(x)}, composite gives {comp[x]}"))
                    break
    return out


# ---------------------------------------------------------------- threads


@dataclass(frozen=True)
class Thread:
    coords: tuple[str, ...]

    @property
    def horizon(self) -> int:
        return len(self.coords) - 1

    @property
    def kind(self) -> str:
        return self.coords[-1][:2]

    @property
    def id(self) -> str:
        return self.kind + "(" + "|".join(c[2:] for c in self.coords) + ")"


@dataclass
class Truncation:
    level: int
    graph: FinGraph
    threads: dict  # thread id -> Thread
    projections: list  # GraphMap to each level 0..level
    by_last: dict = field(default_factory=dict)  # level-n element -> thread id


def _thread_of(sys: ChainSystem, n: int, x: str) -> Thread:
    coords = [x]
    for k in range(n - 1, -1, -1):
        coords.append(sys.bond(k).mapping[coords[-1]])
    return Thread(tuple(reversed(coords)))


def limit_truncation(sys: ChainSystem, n: int, extend_to: int | None = None) -> Truncation:
    """Threads through levels 0..n that lift to level ``extend_to``.

    ``extend_to`` defaults to the top level of a finite system and to ``n``
    otherwise.
    """
    if extend_to is None:
        extend_to = max(n, sys.top) if sys.top is not None else n
    if extend_to < n:
        raise ContractViolation("extend_to must be at least n")
    top_g = sys.level(n)
    alive = np.zeros(len(top_g.carrier), dtype=bool)
    alive[sys.table(n, extend_to)] = True
    ids = top_g.carrier.ids
    threads, by_last = {}, {}
    for i in np.flatnonzero(alive):
        t = _thread_of(sys, n, ids[i])
        threads[t.id] = t
        by_last[ids[i]] = t.id
    vs = [tid for tid, t in threads.items() if t.kind == "v:"]
    es = [tid for tid, t in threads.items() if t.kind == "e:"]
    src = {tid: by_last[top_g.src[threads[tid].coords[-1]]] for tid in es}
    tgt = {tid: by_last[top_g.tgt[threads[tid].coords[-1]]] for tid in es}
    inv = {tid: by_last[top_g.inv[threads[tid].coords[-1]]] for tid in es}
    orientation = None
    if top_g.orientation is not None:
        orientation = [tid for tid in es if threads[tid].coords[-1] in top_g.orientation]
    graph = FinGraph(vs, es, src, tgt, inv, orientation)
    projections = [GraphMap(graph, sys.level(k), {tid: t.coords[k] for tid, t in threads.items()}) for k in range(n + 1)]
    if alive.all():
        # onto bonds: the last coordinate is an isomorphism onto level n
        assert projections[n].is_bijective() and not graph_map_validate(projections[n])
    return Truncation(n, graph, threads, projections, by_last)


# ---------------------------------------------------------------- completion


def system_from_base(pres: CofinitePresentation, order: Sequence[int] | None = None) -> ChainSystem:
    """Chain of quotient graphs Γ/C_0 → ... from a separating base.

    Members are taken coarsest first (or in ``order``, indices into the
    normalized base); C_j is the meet of the first j + 1 of them, repeats are
    dropped, and the bond sends C_{j+1}[x] to C_j[x].  The system is stable
    past its last level, which is the meet of the whole base.
    """
    pres = normalize_base(pres)
    sep = is_separating(pres)
    if not sep:
        raise ContractViolation("base is not separating", witness=sep.witness)
    members = list(pres.base) if order is None else [pres.base[i] for i in order]
    chain = []
    for m in members:
        c = m if not chain else chain[-1] & m
        if not chain or c != chain[-1]:
            chain.append(c)
    levels, etas = [], []
    for c in chain:
        g, eta = quotient_graph(pres.graph, c)
        levels.append(g)
        etas.append(eta)
    bonds = []
    for j in range(len(chain) - 1):
        up, down = etas[j + 1], etas[j]
        bonds.append(GraphMap(levels[j + 1], levels[j], {up.mapping[x]: down.mapping[x] for x in pres.carrier}))
    top = len(chain) - 1
    sys = ChainSystem.explicit(levels, bonds, stable=True, surjective=True, name="from-base",
                               quotient=lambda n, x: etas[min(n, top)].mapping[x])
    sys.chain = chain
    sys.etas = etas
    sys.presentation = pres
    return sys


@dataclass
class Completion:
    system: ChainSystem
    horizon: int
    truncation: Truncation
    domain: FinGraph
    theta: GraphMap  # domain -> truncation.graph
    base: tuple = ()

    @property
    def graph(self) -> FinGraph:
        return self.truncation.graph


def complete(source, horizon: int | None = None, *, system: ChainSystem | None = None, window: int | None = None,
             order: Sequence[int] | None = None) -> Completion:
    """Truncated completion and the embedding θ(x) = (q_0(x), ..., q_H(x)).

    ``source`` is a :class:`CofinitePresentation` (its chain system is built
    from the base) or a window-presented graph with an attached system, in
    which case θ is defined on ``source.window(window)``.
    """
    if isinstance(source, CofinitePresentation):
        pres = normalize_base(source)
        sep = is_separating(pres)
        if not sep:
            raise ContractViolation("presentation is not separating", witness=sep.witness)
        sys = system_from_base(pres, order)
        horizon = sys.top if horizon is None else horizon
        domain, base, q = pres.graph, pres.base, sys.quotient
    else:
        sys = system or source.system
        q = getattr(source, "quotient", None) or (sys.quotient if sys is not None else None)
        if q is None:
            raise ContractViolation("window completion needs a system with quotient maps")
        if horizon is None:
            raise ContractViolation("window completion needs a horizon")
        domain = source.window(horizon + 2 if window is None else window)
        base = ()
    trunc = limit_truncation(sys, horizon)
    theta = {}
    for x in domain.carrier:
        last = q(horizon, x)
        if last not in trunc.by_last:
            raise ContractViolation(f"{x} has no thread at horizon {horizon}", witness=x)
        theta[x] = trunc.by_last[last]
    return Completion(sys, horizon, trunc, domain, GraphMap(domain, trunc.graph, theta), base)


# ---------------------------------------------------------------- ends


@dataclass(frozen=True)
class CensusReport:
    horizon: int
    lookahead: int
    rigid: int
    vertex_ends: int
    edge_ends: int  # inverse pairs
    edge_end_elements: int
    stabilized: bool
    strictly_growing: bool
    history: tuple  # (horizon, vertex_ends, edge_ends) for the last horizons
    boundary: tuple  # thread ids at the horizon

    @property
    def total_ends(self) -> int:
        """Ends with each geometric edge counted once."""
        return self.vertex_ends + self.edge_ends

    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "lookahead": self.lookahead,
            "rigid": self.rigid,
            "vertex_ends": self.vertex_ends,
            "edge_ends": self.edge_ends,
            "edge_end_elements": self.edge_end_elements,
            "ends": self.total_ends,
            "stabilized": self.stabilized,
            "strictly_growing": self.strictly_growing,
            "history": [list(h) for h in self.history],
            "boundary": list(self.boundary),
        }


def fiber_sizes(sys: ChainSystem, n: int, lookahead: int) -> np.ndarray:
    """sizes[j, x]: number of level-(n + j) elements over x, for j = 0..lookahead."""
    size = len(sys.level(n).carrier)
    return np.stack([np.bincount(sys.table(n, n + j), minlength=size) for j in range(lookahead + 1)])


def classify(sys: ChainSystem, n: int, lookahead: int) -> dict[str, str]:
    """Label each level-n element 'rigid' (every fiber a singleton), 'dead'
    (no lift) or 'boundary'."""
    sizes = fiber_sizes(sys, n, lookahead)
    out = {}
    for x, col in zip(sys.level(n).carrier.ids, sizes.T):
        out[x] = "dead" if (col == 0).any() else ("rigid" if (col == 1).all() else "boundary")
    return out


def _census_at(sys, h, lookahead):
    kinds = classify(sys, h, lookahead)
    g = sys.level(h)
    bv = sorted(x for x, k in kinds.items() if k == "boundary" and g.is_vertex(x))
    be = sorted(x for x, k in kinds.items() if k == "boundary" and g.is_edge(x))
    pairs = {tuple(sorted((e, g.inv[e]))) for e in be}
    rigid = sum(k == "rigid" for k in kinds.values())
    return bv, be, len(pairs), rigid


def boundary_census(sys: ChainSystem, horizon: int, lookahead: int = 5, window: int = 5) -> CensusReport:
    """Count the boundary threads (candidate ends) at ``horizon``.

    An element is rigid when each of its bond fibers over the next
    ``lookahead`` levels is a single element.  The report is stabilized when
    the counts agree on the last ``window`` horizons.
    """
    if lookahead < 1:
        raise ContractViolation("lookahead must be at least 1")
    if sys.bounded and horizon + lookahead > sys.top:
        raise ContractViolation(f"need levels up to {horizon + lookahead}, system stops at {sys.top}",
                                witness=horizon + lookahead)
    for n in range(horizon + lookahead):
        if not sys.bond(n).is_surjective():
            raise ContractViolation(f"census needs onto bonds; bond {n} is not", witness=n)
    history = []
    for h in range(max(0, horizon - window + 1), horizon + 1):
        bv, be, pairs, rigid = _census_at(sys, h, lookahead)
        history.append((h, len(bv), pairs))
    bv, be, pairs, rigid = _census_at(sys, horizon, lookahead)
    stabilized = len(history) == window and len({(v, e) for _, v, e in history}) == 1
    growing = True
    for x in bv + be:
        t = _thread_of(sys, horizon, x)
        for k, c in enumerate(t.coords):
            col = fiber_sizes(sys, k, lookahead)[:, sys.level(k).carrier.index[c]]
            if not (np.diff(col) > 0).all():
                growing = False
    boundary = tuple(_thread_of(sys, horizon, x).id for x in bv + be)
    return CensusReport(horizon, lookahead, rigid, len(bv), pairs, len(be), stabilized, growing,
                        tuple(history), boundary)


# ---------------------------------------------------------------- maps into the limit


@dataclass
class Extension:
    map: GraphMap  # domain -> truncation.graph
    truncation: Truncation

    def __call__(self, x: str) -> Thread:
        return self.truncation.threads[self.map.mapping[x]]


def extend_map(sys: ChainSystem, family, horizon: int, domain: FinGraph) -> Extension:
    """Extend a compatible family g_N: domain -> level N to the truncation.

    ``family(N)`` returns a :class:`GraphMap` (or a mapping) into level N; it
    must satisfy bond(N) ∘ g_{N+1} = g_N on the domain.
    """
    maps = []
    for n in range(horizon + 1):
        g = family(n)
        maps.append(g.mapping if isinstance(g, GraphMap) else dict(g))
    for n in range(horizon):
        b = sys.bond(n).mapping
        for x in domain.carrier:
            if b[maps[n + 1][x]] != maps[n][x]:
                raise ContractViolation(f"family does not commute with bond {n} at {x}", witness=(n, x))
    trunc = limit_truncation(sys, horizon)
    out = {}
    for x in domain.carrier:
        last = maps[horizon][x]
        if last not in trunc.by_last:
            raise ContractViolation(f"{x} maps outside the truncation", witness=(horizon, x))
        out[x] = trunc.by_last[last]
    return Extension(GraphMap(domain, trunc.graph, out), trunc)


def closed_entourage(completion: Completion, r) -> Partition:
    """Closure of a base entourage in the truncated completion.

    Two threads are related when the extended projection to Γ/R agrees on
    them.  ``r`` is a member of the presentation's base, or for window
    completions an integer level N (the kernel of q_N).
    """
    trunc = completion.truncation
    ids = trunc.graph.carrier.ids
    if isinstance(r, int):
        if not 0 <= r <= completion.horizon:
            raise ContractViolation(f"level {r} is outside the horizon", witness=r)
        lev = completion.system.level(r).carrier
        labels = [lev.index[trunc.threads[t].coords[r]] for t in ids]
    else:
        r = r.partition if hasattr(r, "partition") else r
        if r not in completion.base:
            raise ContractViolation("entourage is not in the base")
        chain = completion.system.chain
        j = next(k for k, c in enumerate(chain) if c.refines(r))
        if j > completion.horizon:
            raise ContractViolation("entourage is not resolved at this horizon")
        dom = completion.domain.carrier
        labels = [int(r.labels[dom.index[trunc.threads[t].coords[j]]]) for t in ids]
    p = Partition(trunc.graph.carrier, labels)
    assert is_compatible(trunc.graph, p)
    return p
