"""Command-line front end.

``cofinite COMMAND SOURCE [options]`` where SOURCE is a document path, ``-``
for standard input, or ``builtin:phi1``, ``builtin:phi2``,
``builtin:integer_line``.  Exit status: 0 success, 1 domain error, 2 parse or
usage error.
"""

from __future__ import annotations

import argparse
import io
import sys
from contextlib import redirect_stderr

from .. import invsys, relations, topograph, uniformity
from ..presented import integer_line
from . import export
from .dsl import (
    Document,
    DSLError,
    GraphDef,
    MapDef,
    PartitionDef,
    PresentationDef,
    SystemDef,
    parse,
    print_definition,
    print_document,
    try_parse,
)

__all__ = ["main", "run", "parse", "print_document", "try_parse", "Document", "DSLError"]

COMMANDS = ("validate", "refine", "quotient", "uquotient", "sum", "closure", "separate", "complete", "census",
            "extend", "export")


class UsageError(Exception):
    pass


def load(source: str, window: int = 3, stdin: bytes | None = None) -> Document:
    if source.startswith("builtin:"):
        name = source[len("builtin:"):]
        if name in ("phi1", "phi2"):
            return Document([SystemDef(name, builtin=name)])
        if name == "integer_line":
            return Document([GraphDef("integer_line", integer_line().window(window))])
        raise UsageError(f"unknown builtin {name!r} (expected phi1, phi2 or integer_line)")
    if source == "-":
        data = sys.stdin.buffer.read() if stdin is None else stdin
    else:
        try:
            with open(source, "rb") as fh:
                data = fh.read()
        except OSError as exc:
            raise UsageError(f"cannot read {source}: {exc.strerror}") from None
    return parse(data)


def _pick(doc: Document, kind: str, name: str | None) -> str:
    if name is not None:
        if name not in doc or doc[name].kind != kind:
            raise UsageError(f"no {kind} named {name!r}")
        return name
    names = doc.names(kind)
    if len(names) != 1:
        raise UsageError(f"document has {len(names)} {kind} definitions; choose one with --{kind}")
    return names[0]


def _elements(text: str) -> list[str]:
    return [x.strip() for x in text.split(",") if x.strip()]


# ---------------------------------------------------------------- commands


def cmd_validate(doc, a):
    report, bad = [], False
    for name, d in doc.definitions.items():
        if d.kind == "graph":
            vs = topograph.validate_graph(d.graph)
        elif d.kind == "map":
            vs = topograph.graph_map_validate(d.map)
        elif d.kind == "partition":
            g = doc.graph(d.graph)
            vs = []
            if not topograph.validate_graph(g):
                v = topograph.is_compatible(g, d.partition)
                if not v:
                    vs = [topograph.Violation("compatible", v.witness, f"violates compatibility condition ({v.reason})")]
        elif d.kind == "presentation":
            try:
                doc.presentation(name)
                vs = []
            except relations.ContractViolation as exc:
                vs = [topograph.Violation("presentation", exc.witness, str(exc))]
        else:
            s = doc.system(name)
            horizon = a.horizon if a.horizon is not None else (5 if s.top is None else s.top)
            vs = invsys.validate_system(s, horizon)
        bad |= bool(vs)
        report.append((name, d.kind, vs))
    if a.format == "json":
        out = export.dumps({"ok": not bad, "definitions": [
            {"name": n, "kind": k, "violations": export.violations_json(vs)} for n, k, vs in report]})
    else:
        lines = []
        for n, k, vs in report:
            lines.append(f"{k} {n}: " + ("ok" if not vs else f"{len(vs)} violation(s)"))
            lines += [f"  {v.code}: {v.message}" for v in vs]
        out = "\n".join(lines) + "\n" if lines else "empty document\n"
    return (1 if bad else 0), out


def cmd_refine(doc, a):
    pname = _pick(doc, "partition", a.partition)
    gname = doc[pname].graph
    g = doc.graph(gname)
    if g.orientation is None:
        g = topograph.choose_orientation(g)
    s = topograph.compatible_refinement(g, doc.partition(pname)).partition
    if a.format == "json":
        return 0, export.dumps({"graph": gname, "partition": s.to_json()})
    return 0, print_definition(PartitionDef(f"{pname}_refined", gname, s)) + "\n"


def cmd_quotient(doc, a):
    pname = _pick(doc, "partition", a.partition)
    gname = doc[pname].graph
    q, proj = topograph.quotient_graph(doc.graph(gname), doc.partition(pname))
    qname = f"{gname}_mod_{pname}"
    if a.format == "json":
        return 0, export.dumps({"graph": export.graph_json(q), "projection": dict(sorted(proj.mapping.items()))})
    if a.format == "dot":
        return 0, export.graph_dot(q, qname)
    defs = [GraphDef(gname, doc.graph(gname)), GraphDef(qname, q), MapDef(f"{qname}_proj", gname, qname, proj)]
    return 0, print_document(Document(defs))


def _presentation_doc(pres, name):
    gname = f"{name}_graph"
    defs = [GraphDef(gname, pres.graph)]
    members = []
    for i, p in enumerate(pres.base):
        members.append(f"{name}_R{i}")
        defs.append(PartitionDef(members[-1], gname, p))
    defs.append(PresentationDef(name, gname, tuple(members)))
    return print_document(Document(defs))


def cmd_uquotient(doc, a):
    xname = _pick(doc, "presentation", a.presentation)
    pres = doc.presentation(xname)
    kname = _pick(doc, "partition", a.partition)
    uq = uniformity.uniform_quotient(pres, doc.partition(kname))
    if a.format == "json":
        return 0, export.dumps({"presentation": export.presentation_json(uq.presentation), "improper": uq.improper,
                                "projection": dict(sorted(uq.projection.mapping.items()))})
    head = "# no base member contains the partition; the improper member stands in\n" if uq.improper else ""
    return 0, head + _presentation_doc(uq.presentation, f"{xname}_mod_{kname}")


def cmd_sum(doc, a):
    names = a.presentation_list or doc.names("presentation")
    if not names:
        raise UsageError("sum needs at least one presentation")
    for n in names:
        _pick(doc, "presentation", n)
    total, _ = uniformity.uniform_sum([doc.presentation(n) for n in names])
    if a.format == "json":
        return 0, export.dumps({"summands": names, "presentation": export.presentation_json(total)})
    return 0, _presentation_doc(total, "sum")


def cmd_closure(doc, a):
    xname = _pick(doc, "presentation", a.presentation)
    pres = uniformity.normalize_base(doc.presentation(xname))
    elements = _elements(a.set or "")
    for x in elements:
        if x not in pres.carrier.index:
            raise relations.ContractViolation(f"{x!r} is not in the graph", witness=x)
    rep = uniformity.closure(pres, elements)
    if a.format == "json":
        return 0, export.dumps({"input": sorted(rep.input), "closure": sorted(rep.closure),
                                "images": [sorted(i) for i in rep.images]})
    lines = [f"closure: {', '.join(sorted(rep.closure))}"]
    lines += [f"  R{i}[A]: {', '.join(sorted(img))}" for i, img in enumerate(rep.images)]
    return 0, "\n".join(lines) + "\n"


def cmd_separate(doc, a):
    xname = _pick(doc, "presentation", a.presentation)
    v = uniformity.is_separating(uniformity.normalize_base(doc.presentation(xname)))
    if a.format == "json":
        return 0, export.dumps(export.verdict_json(v))
    return 0, ("separating: yes\n" if v else f"separating: no (witness {v.witness[0]}, {v.witness[1]})\n")


def _system_name(doc, a):
    return _pick(doc, "system", a.system)


def cmd_complete(doc, a):
    if doc.names("presentation") or a.presentation:
        xname = _pick(doc, "presentation", a.presentation)
        c = invsys.complete(doc.presentation(xname), a.horizon)
    else:
        s = doc.system(_system_name(doc, a))
        if s.quotient is None:
            raise relations.ContractViolation("this system has no presented graph to complete")
        if a.horizon is None:
            raise UsageError("complete on a system needs --horizon")
        c = invsys.complete(s.presented, a.horizon, window=a.window)
    threads = c.truncation.threads
    image = set(c.theta.mapping.values())
    ends = sorted(t for t in threads if t not in image)
    if a.format == "json":
        return 0, export.dumps({
            "horizon": c.horizon,
            "graph": export.graph_json(c.graph),
            "threads": {t: list(th.coords) for t, th in sorted(threads.items())},
            "theta": dict(sorted(c.theta.mapping.items())),
            "outside_image": ends,
        })
    if a.format == "dot":
        return 0, export.graph_dot(c.graph, "completion", highlight=ends)
    lines = [f"horizon: {c.horizon}", f"threads: {len(threads)}", f"outside image: {len(ends)}"]
    lines += [f"  {t}" for t in ends]
    lines += [f"theta {x} -> {t}" for x, t in sorted(c.theta.mapping.items())]
    return 0, "\n".join(lines) + "\n"


def cmd_census(doc, a):
    s = doc.system(_system_name(doc, a))
    if a.horizon is None:
        raise UsageError("census needs --horizon")
    rep = invsys.boundary_census(s, a.horizon, a.lookahead)
    if a.format == "json":
        return 0, export.dumps(rep.to_json())
    if a.format == "dot":
        trunc = invsys.limit_truncation(s, a.horizon)
        return 0, export.graph_dot(trunc.graph, "census", highlight=rep.boundary)
    lines = [
        f"horizon: {rep.horizon}",
        f"lookahead: {rep.lookahead}",
        f"rigid: {rep.rigid}",
        f"vertex ends: {rep.vertex_ends}",
        f"edge ends: {rep.edge_ends} pairs",
        f"ends: {rep.total_ends}",
        f"stabilized: {'yes' if rep.stabilized else 'no'}",
    ]
    lines += [f"boundary: {t}" for t in rep.boundary]
    return 0, "\n".join(lines) + "\n"


def cmd_extend(doc, a):
    s = doc.system(_system_name(doc, a))
    maps = _elements(a.maps or "")
    if not maps:
        raise UsageError("extend needs --maps m0,m1,...")
    for m in maps:
        _pick(doc, "map", m)
    domain = doc.map(maps[0]).source
    for n, m in enumerate(maps):
        f = doc.map(m)
        if f.source != domain or f.target != s.level(n):
            raise relations.ContractViolation(f"map {m!r} must run from the domain to level {n}", witness=(n, m))
    ext = invsys.extend_map(s, lambda n: doc.map(maps[n]), len(maps) - 1, domain)
    if a.format == "json":
        return 0, export.dumps({"horizon": len(maps) - 1, "map": dict(sorted(ext.map.mapping.items())),
                                "threads": {t: list(th.coords) for t, th in sorted(ext.truncation.threads.items())}})
    return 0, "".join(f"{x} -> {t}\n" for x, t in sorted(ext.map.mapping.items()))


def cmd_export(doc, a):
    name = a.name
    if name is None:
        if len(doc) != 1:
            raise UsageError(f"document has {len(doc)} definitions; choose one with --name")
        name = next(iter(doc.definitions))
    if name not in doc:
        raise UsageError(f"no definition named {name!r}")
    d = doc[name]
    if a.format == "text":
        return 0, print_definition(d) + "\n"
    if d.kind == "system":
        s = doc.system(name)
        horizon = a.horizon if a.horizon is not None else (3 if s.top is None else s.top)
        if a.format == "dot":
            return 0, "".join(export.graph_dot(s.level(n), f"{name}_{n}") for n in range(horizon + 1))
        return 0, export.dumps({"kind": "system", "name": name, "levels": [
            export.graph_json(s.level(n)) for n in range(horizon + 1)], "bonds": [
            dict(sorted(s.bond(n).mapping.items())) for n in range(horizon)]})
    if d.kind == "graph":
        g = d.graph
        if a.format == "dot":
            return 0, export.graph_dot(g, name)
        return 0, export.dumps({"kind": "graph", "name": name, **export.graph_json(g)})
    if a.format == "dot":
        raise UsageError(f"a {d.kind} has no DOT form")
    if d.kind == "partition":
        body = {"graph": d.graph, **d.partition.to_json()}
    elif d.kind == "map":
        body = {"source": d.source, "target": d.target, "mapping": dict(sorted(d.map.mapping.items()))}
    else:
        body = {"graph": d.graph, "base": list(d.base)}
    return 0, export.dumps({"kind": d.kind, "name": name, **body})


HANDLERS = {name: globals()[f"cmd_{name}"] for name in COMMANDS}


# ---------------------------------------------------------------- argument parsing


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="cofinite", description="Cofinite graphs, quotients and completions.")
    sub = ap.add_subparsers(dest="command", metavar="COMMAND", required=True)
    helps = {
        "validate": "check graph axioms, maps, compatibility and systems",
        "refine": "compatible orientation-preserving refinement of a partition",
        "quotient": "quotient graph by a compatible partition",
        "uquotient": "uniform quotient of a presentation",
        "sum": "uniform sum of presentations",
        "closure": "closure of a set of elements",
        "separate": "whether a presentation is separating",
        "complete": "truncated completion and its embedding",
        "census": "count boundary threads (ends) of a system",
        "extend": "extend a compatible family of maps to the limit",
        "export": "print one definition as text, JSON or DOT",
    }
    for name in COMMANDS:
        p = sub.add_parser(name, help=helps[name])
        p.add_argument("source", help="document path, '-' or builtin:<name>")
        p.add_argument("--format", choices=("text", "json", "dot"), default="text")
        p.add_argument("--window", type=int, default=None, help="window size for builtin graphs")
        if name in ("validate", "complete", "census", "export"):
            p.add_argument("--horizon", type=int, default=None)
        if name == "census":
            p.add_argument("--lookahead", type=int, default=5)
        if name in ("refine", "quotient", "uquotient"):
            p.add_argument("--partition")
        if name in ("uquotient", "closure", "separate", "complete"):
            p.add_argument("--presentation")
        if name == "sum":
            p.add_argument("--presentation", dest="presentation_list", action="append")
        if name in ("complete", "census", "extend"):
            p.add_argument("--system")
        if name == "closure":
            p.add_argument("--set", help="comma-separated elements, e.g. v:u,e:a")
        if name == "extend":
            p.add_argument("--maps", help="comma-separated maps g_0, g_1, ... into levels 0, 1, ...")
        if name == "export":
            p.add_argument("--name")
    return ap


def run(argv, stdin: bytes | None = None) -> tuple[int, str, str]:
    """Run one command; returns (status, stdout, stderr).  ``stdin`` stands
    in for standard input when the source is ``-``."""
    err = io.StringIO()
    ap = build_parser()
    try:
        with redirect_stderr(err):
            a = ap.parse_args(list(argv))
    except SystemExit as exc:
        return (exc.code if isinstance(exc.code, int) else 2), "", err.getvalue()
    if a.format == "dot" and a.command not in ("quotient", "complete", "census", "export"):
        return 2, "", f"cofinite {a.command}: --format dot is not available\n"
    try:
        doc = load(a.source, 3 if a.window is None else a.window, stdin)
        status, out = HANDLERS[a.command](doc, a)
        return status, out, ""
    except DSLError as exc:
        return 2, "", "".join(f"{a.source}:{d}\n" for d in exc.diagnostics)
    except UsageError as exc:
        return 2, "", f"cofinite {a.command}: {exc}\n"
    except relations.ContractViolation as exc:
        w = f" (witness: {exc.witness})" if exc.witness is not None else ""
        return 1, "", f"error: {exc}{w}\n"


def main(argv=None) -> int:
    status, out, err = run(sys.argv[1:] if argv is None else argv)
    sys.stdout.write(out)
    sys.stderr.write(err)
    return status
