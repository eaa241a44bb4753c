"""JSON and DOT renderings.  JSON documents carry ``"format": 1``."""

from __future__ import annotations

import json

from ..relations import Partition, Verdict
from ..topograph import FinGraph, bare

FORMAT = 1


def dumps(obj) -> str:
    return json.dumps({"format": FORMAT, **obj}, indent=2, sort_keys=True, ensure_ascii=False) + "\n"


def _jsonable(x):
    if isinstance(x, (tuple, list, frozenset, set)):
        items = [_jsonable(y) for y in x]
        return sorted(items, key=repr) if isinstance(x, (set, frozenset)) else items
    if isinstance(x, dict):
        return {str(k): _jsonable(v) for k, v in x.items()}
    if hasattr(x, "item"):
        return x.item()
    return x


def graph_json(g: FinGraph) -> dict:
    return {
        "vertices": list(g.vertices.ids),
        "edges": [{"id": e, "src": g.src.get(e), "tgt": g.tgt.get(e), "inverse": g.inv.get(e)} for e in g.edges],
        "orientation": None if g.orientation is None else sorted(g.orientation),
    }


def partition_json(p: Partition) -> dict:
    return p.to_json()


def presentation_json(pres) -> dict:
    return {"graph": graph_json(pres.graph), "base": [p.to_json()["blocks"] for p in pres.base]}


def verdict_json(v: Verdict) -> dict:
    return {"ok": bool(v), "witness": _jsonable(v.witness), "reason": v.reason}


def violations_json(vs) -> list:
    return [{"code": v.code, "subject": _jsonable(v.subject), "message": v.message} for v in vs]


def _q(x: str) -> str:
    return json.dumps(x, ensure_ascii=False)


def graph_dot(g: FinGraph, name: str = "G", highlight=(), labels=None) -> str:
    """One arrow per inverse pair, drawn src -> tgt of its positive edge.
    Highlighted elements are drawn in red."""
    highlight = set(highlight)
    labels = labels or {}
    lines = [f"digraph {_q(name)} {{", "  node [shape=circle];"]
    for v in g.vertices:
        attrs = [f"label={_q(labels.get(v, bare(v)))}"]
        if v in highlight:
            attrs.append('color="red"')
        lines.append(f"  {_q(v)} [{', '.join(attrs)}];")
    done = set()
    for e in g.edges:
        if e in done:
            continue
        i = g.inv.get(e, e)
        if g.orientation is not None and i in g.orientation and e not in g.orientation:
            e, i = i, e
        done |= {e, i}
        attrs = [f"label={_q(labels.get(e, bare(e)))}"]
        if e in highlight or i in highlight:
            attrs.append('color="red"')
        lines.append(f"  {_q(g.src.get(e, '?'))} -> {_q(g.tgt.get(e, '?'))} [{', '.join(attrs)}];")
    lines.append("}")
    return "\n".join(lines) + "\n"
