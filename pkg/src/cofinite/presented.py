"""Window presentations of infinite graphs, and the integer line with its two
inverse systems.

The integer line has a vertex for each integer and an edge e_x for each
nonzero x, running from x - 1 to x when x > 0 and from x + 1 to x when x < 0.
Its windows are the finite subgraphs on [-n, n].

Two chains of finite quotients present two different uniformities on it.

* ``phi1``: level N keeps [-(N + 1), N + 1], clamping everything beyond; the
  edges past either end collapse onto two loops, e at N + 1 and e' at
  -(N + 1).  Completion adds two vertex-ends and two edge-ends.
* ``phi2``: level N keeps [-N, N] and sends every |x| > N to one vertex N + 1
  carrying a single loop e.  Completion adds one vertex-end and one edge-end.

Edges come in inverse pairs: ``e:e3`` and ``e:~e3``, loops ``e:e``/``e:~e``
and ``e:e'``/``e:~e'``.  Every map acts on the pair equivariantly.
"""

from __future__ import annotations

import threading
from typing import Callable

from .invsys import ChainSystem
from .relations import ContractViolation
from .topograph import FinGraph, GraphMap, Violation, graph_kernel, graph_map_validate


class WindowGraph:
    """An infinite graph given by its finite windows window(0) ⊂ window(1) ⊂ ...

    ``quotient(N, x)``, when attached, sends a window element to level N of
    ``system``; it must be defined on window(m) for every m >= m0(N).
    """

    def __init__(self, window_fn: Callable[[int], FinGraph], *, quotient=None, system: ChainSystem | None = None,
                 m0: Callable[[int], int] | None = None, name: str = ""):
        self._window_fn = window_fn
        self.quotient = quotient
        self.system = system
        self.m0 = m0 or (lambda n: n + 2)
        self.name = name
        self._windows: dict[int, FinGraph] = {}
        self._lock = threading.RLock()

    def window(self, n: int) -> FinGraph:
        if n < 0:
            raise ContractViolation(f"no window {n}")
        g = self._windows.get(n)
        if g is None:
            with self._lock:
                g = self._windows.get(n)
                if g is None:
                    g = self._windows[n] = self._window_fn(n)
        return g

    def inclusion(self, n: int) -> GraphMap:
        small = self.window(n)
        return GraphMap(small, self.window(n + 1), {x: x for x in small.carrier})

    def with_system(self, system: ChainSystem) -> WindowGraph:
        return WindowGraph(self._window_fn, quotient=system.quotient, system=system, m0=self.m0, name=self.name)

    def q_map(self, level: int, n: int, system: ChainSystem | None = None) -> GraphMap:
        """q_N on window(n) as a GraphMap into level N."""
        system = system or self.system
        q = self.quotient or system.quotient
        w = self.window(n)
        return GraphMap(w, system.level(level), {x: q(level, x) for x in w.carrier})

    def kernel(self, level: int, n: int, system: ChainSystem | None = None):
        """The entourage ker q_N restricted to window(n)."""
        return graph_kernel(self.q_map(level, n, system))

    def __repr__(self):
        return f"WindowGraph({self.name or 'anonymous'})"


# ---------------------------------------------------------------- element names


def _vertex(x: int) -> str:
    return f"v:{x}"


def _edge(x, inverted: bool) -> str:
    name = x if isinstance(x, str) else f"e{x}"
    return "e:" + ("~" if inverted else "") + name


def _parse(x: str):
    """('v', int) or ('e', inverted, int | 'e' | "e'")."""
    if x.startswith("v:"):
        return "v", int(x[2:])
    name = x[2:]
    inverted = name.startswith("~")
    core = name.lstrip("~")
    if core in ("e", "e'"):
        return "e", inverted, core
    return "e", inverted, int(core[1:])


def _line_edge(x: int) -> tuple[int, int]:
    return (x - 1, x) if x > 0 else (x + 1, x)


def _graph(vertices, edges, loops=()) -> FinGraph:
    spec = [(f"e{x}", s, t) for x, s, t in edges] + [(name, v, v) for name, v in loops]
    positive = [name for name, *_ in spec]
    return FinGraph.build([str(v) for v in vertices], [(n, str(s), str(t)) for n, s, t in spec], orient=positive)


def _integer_window(n: int) -> FinGraph:
    return _graph(range(-n, n + 1), [(x, *_line_edge(x)) for x in range(-n, n + 1) if x])


def integer_line() -> WindowGraph:
    return WindowGraph(_integer_window, name="integer_line")


# ---------------------------------------------------------------- phi1


def _gamma(n: int) -> FinGraph:
    r = n + 1
    return _graph(range(-r, r + 1), [(x, *_line_edge(x)) for x in range(-r, r + 1) if x], [("e", r), ("e'", -r)])


def _phi1(n: int, x: str) -> str:
    """The level-n image of a window element or of a higher-level element."""
    r = n + 1
    p = _parse(x)
    if p[0] == "v":
        return _vertex(max(-r, min(r, p[1])))
    _, inverted, k = p
    if isinstance(k, str) or abs(k) <= r:
        return _edge(k, inverted)
    return _edge("e" if k > 0 else "e'", inverted)


# ---------------------------------------------------------------- phi2


def _sigma(n: int) -> FinGraph:
    r = n + 1
    edges = []
    for x in range(-r, r + 1):
        if x:
            s, t = _line_edge(x)
            edges.append((x, s, r if x == -r else t))
    return _graph(range(-n, r + 1), edges, [("e", r)])


def _phi2(n: int, x: str) -> str:
    r = n + 1
    p = _parse(x)
    if p[0] == "v":
        return _vertex(p[1] if abs(p[1]) <= n else r)
    _, inverted, k = p
    if isinstance(k, str) or abs(k) <= r:
        return _edge(k, inverted)
    return _edge("e", inverted)


def _chain(level_fn, fold, name) -> ChainSystem:
    def direct(i, j):
        src = sys.level(j)
        return GraphMap(src, sys.level(i), {x: fold(i, x) for x in src.carrier})

    sys = ChainSystem(level_fn, lambda n: direct(n, n + 1), surjective=True, name=name,
                      direct_bond=direct, quotient=fold)
    sys.presented = integer_line().with_system(sys)
    return sys


def phi1_system() -> ChainSystem:
    """Levels Γ_N: vertices -(N+1)..N+1, loops e at N+1 and e' at -(N+1)."""
    return _chain(_gamma, _phi1, "phi1")


def phi2_system() -> ChainSystem:
    """Levels Σ_N: vertices -N..N+1, e_{-(N+1)} ending at N+1, loop e at N+1."""
    return _chain(_sigma, _phi2, "phi2")


BUILTINS = {"integer_line": integer_line, "phi1": phi1_system, "phi2": phi2_system}


def quotient_maps_check(wg: WindowGraph, sys: ChainSystem, horizon: int, window: int | None = None) -> list[Violation]:
    """Check that each q_N (N <= horizon) is a graph map onto level N and
    that bond(N) ∘ q_{N+1} = q_N, on window(max(window, horizon + 2))."""
    q = wg.quotient or sys.quotient
    if q is None:
        raise ContractViolation("no quotient maps to check")
    m = max(window or 0, wg.m0(horizon))
    w = wg.window(m)
    out = []
    images = []
    for n in range(horizon + 1):
        level = sys.level(n)
        img = {x: q(n, x) for x in w.carrier}
        images.append(img)
        stray = [x for x in w.carrier if img[x] not in level.carrier.index]
        if stray:
            out.append(Violation("range", (n, stray[0]), f"q_{n} sends {stray[0]} to {img[stray[0]]}, not in level {n}"))
            continue
        f = GraphMap(w, level, img)
        out += [Violation(v.code, (n, v.subject), f"q_{n}: {v.message}") for v in graph_map_validate(f)]
        if not f.is_surjective():
            miss = sorted(set(level.carrier) - set(img.values()))[0]
            out.append(Violation("surjective", (n, miss), f"q_{n} misses {miss} on window {m}"))
    for n in range(horizon):
        b = sys.bond(n).mapping
        for x in w.carrier:
            if b.get(images[n + 1][x]) != images[n][x]:
                out.append(Violation("coherence", (n, x),
                                     f"bond {n} after q_{n + 1} sends {x} to {b.get(images[n + 1][x])}, q_{n} gives {images[n][x]}"))
                break
    return out
