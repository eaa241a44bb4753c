import itertools
import random

import pytest

from cofinite.relations import ContractViolation, Partition, pullback
from cofinite.topograph import FinGraph, graph_kernel, is_compatible, quotient_graph
from cofinite.uniformity import (
    CofinitePresentation,
    FiniteTopology,
    closure,
    hausdorff_quotient_check,
    initial_base,
    is_separating,
    members_containing,
    normalize_base,
    quotient_topology_agreement,
    restrict_presentation,
    uniform_quotient,
    uniform_sum,
)
from oracles import (
    closure_from_opens,
    minimal_opens,
    opens_from_basis,
    partition_basis_masks,
    random_compatible,
    random_graph,
    random_presentation_parts,
)


def path():
    return FinGraph.build("abcd", [("x", "a", "b"), ("y", "b", "c"), ("z", "c", "d")])


def random_pres(rng, **kw):
    g, base = random_presentation_parts(rng, **kw)
    return CofinitePresentation(g, base)


def test_rejects_bad_members():
    g = path()
    with pytest.raises(ContractViolation):
        CofinitePresentation(g, [])
    with pytest.raises(ContractViolation, match="compatibility"):
        CofinitePresentation(g, [Partition.indiscrete(g.carrier)])


def test_normalize_is_meet_closed_filter_base():
    rng = random.Random(0)
    for _ in range(100):
        pres = normalize_base(random_pres(rng, separating=False))
        assert pres.is_filter_base()
        assert pres.finest() in pres.base
        assert normalize_base(pres) == pres
        for a, b in itertools.combinations(pres.base, 2):
            assert (a & b) in pres.base


def test_separating():
    g = path()
    assert is_separating(CofinitePresentation(g, [Partition.discrete(g.carrier)]))
    v = is_separating(CofinitePresentation(g, [random_compatible(random.Random(1), g, vertex_blocks=1)]))
    assert not v and v.witness[0] != v.witness[1]


def test_closure_against_topology_oracle():
    rng = random.Random(2)
    for _ in range(60):
        pres = random_pres(rng, max_elements=9, separating=False)
        c = pres.carrier
        n = len(c)
        minimal = minimal_opens(n, opens_from_basis(n, partition_basis_masks(c, pres.base)))
        top = FiniteTopology.from_presentation(pres)
        for mask in range(1 << n):
            a = top.to_set(mask)
            expect = top.to_set(closure_from_opens(n, minimal, mask))
            assert closure(pres, a).closure == expect
            assert top.closure(a) == expect


def test_closure_report_images():
    g = path()
    p = random_compatible(random.Random(3), g)
    rep = closure(CofinitePresentation(g, [p]), ["v:a"])
    assert rep.images == (p.image(["v:a"]),) and rep.closure == p.image(["v:a"])


def test_topology_opens_and_closed():
    g = path()
    pres = CofinitePresentation(g, [random_compatible(random.Random(4), g)])
    top = FiniteTopology.from_presentation(pres)
    for m in top.all_opens():
        s = top.to_set(m)
        assert top.is_open(s)
        # partition topologies: open iff closed
        assert top.is_closed(s)
    big = FiniteTopology(FinGraph.build([str(i) for i in range(13)], []).carrier, [])
    with pytest.raises(ContractViolation):
        big.all_opens()


def test_initial_base_makes_maps_continuous():
    rng = random.Random(5)
    for _ in range(100):
        target = random_pres(rng, max_elements=8)
        k = random_compatible(rng, target.graph)
        # a graph map into the target: the projection from the target onto a quotient, reversed roles
        qg, proj = quotient_graph(target.graph, k)
        q_pres = normalize_base(CofinitePresentation(qg, [Partition.discrete(qg.carrier)]))
        init = initial_base(target.graph, [(proj, q_pres)])
        assert init.is_filter_base()
        assert any(r.refines(k) and k.refines(r) for r in init.base)


def test_initial_base_with_set_map_refines():
    g = path()
    target = FinGraph.build(["p"], [])
    tp = CofinitePresentation(target, [Partition.discrete(target.carrier)])
    from cofinite.relations import SetMap
    f = SetMap(g.carrier, target.carrier, {x: "v:p" for x in g.carrier})
    init = initial_base(g, [(f, tp)])
    for r in init.base:
        assert is_compatible(g, r)


def test_uniform_sum_blocks_stay_inside_summands():
    rng = random.Random(6)
    for _ in range(50):
        a, b = random_pres(rng, max_elements=6), random_pres(rng, max_elements=6)
        s, incs = uniform_sum([a, b])
        assert is_separating(s)
        for r in s.base:
            for block in r.blocks:
                tags = {x.split(":", 1)[1].split(".", 1)[0] for x in block}
                assert len(tags) == 1
        for inc, p in zip(incs, [a, b]):
            back = restrict_presentation(s, FinGraph(
                [inc.mapping[v] for v in p.graph.vertices],
                [inc.mapping[e] for e in p.graph.edges],
                {inc.mapping[e]: inc.mapping[p.graph.src[e]] for e in p.graph.edges},
                {inc.mapping[e]: inc.mapping[p.graph.tgt[e]] for e in p.graph.edges},
                {inc.mapping[e]: inc.mapping[p.graph.inv[e]] for e in p.graph.edges},
            ))
            # restricted blocks correspond to the summand's normalized base
            expect = {frozenset(frozenset(inc.mapping[x] for x in blk) for blk in r.blocks)
                      for r in normalize_base(p).base}
            got = {frozenset(frozenset(blk) for blk in r.blocks) for r in back.base}
            assert got == expect


def test_uniform_quotient_by_member():
    rng = random.Random(7)
    for _ in range(100):
        pres = normalize_base(random_pres(rng, max_elements=10))
        k = rng.choice(pres.base)
        uq = uniform_quotient(pres, k)
        assert not uq.improper
        assert graph_kernel(uq.projection) == k
        assert is_separating(uq.presentation)
        assert hausdorff_quotient_check(pres, k)
        assert quotient_topology_agreement(pres, k)


def test_improper_member_used_when_nothing_contains_k():
    g = path()
    k = Partition.discrete(g.carrier)
    pres = CofinitePresentation(g, [Partition.discrete(g.carrier)])
    # a coarse k that the diagonal does not contain
    coarse = random_compatible(random.Random(8), g, vertex_blocks=1)
    found, improper = members_containing(pres, coarse)
    assert improper and len(found) == 1
    assert coarse.refines(found[0]) and is_compatible(g, found[0])
    assert not members_containing(pres, k)[1]
    uq = uniform_quotient(pres, coarse)
    assert uq.improper


def test_hausdorff_check_matches_quotient_separation():
    rng = random.Random(9)
    for _ in range(200):
        pres = normalize_base(random_pres(rng, max_elements=10, separating=False))
        k = random_compatible(rng, pres.graph)
        assert bool(hausdorff_quotient_check(pres, k)) == bool(is_separating(uniform_quotient(pres, k).presentation))


def test_hausdorff_witness():
    g = path()
    k = Partition.discrete(g.carrier)
    pres = CofinitePresentation(g, [random_compatible(random.Random(10), g, vertex_blocks=1)])
    v = hausdorff_quotient_check(pres, k)
    assert not v
    a, b = v.witness
    assert a != b and b in pres.base[0].image([a])


def test_restrict_to_subgraph_pulls_back():
    rng = random.Random(11)
    for _ in range(50):
        pres = random_pres(rng, max_elements=10)
        g = pres.graph
        sub = FinGraph(g.vertices, [], {}, {}, {})
        res = restrict_presentation(pres, sub)
        for r in res.base:
            assert all(len({x for x in b}) >= 1 for b in r.blocks)
        assert is_separating(res)
        from cofinite.relations import SetMap
        inc = SetMap(sub.carrier, g.carrier, {x: x for x in sub.carrier})
        assert set(res.base) <= {pullback(inc, r) for r in normalize_base(pres).base}


def test_quotient_base_uses_only_members_containing_k():
    g = path()
    ends = Partition.from_blocks(g.carrier, [["v:a", "v:b", "v:c", "v:d"], ["e:x", "e:y", "e:z"],
                                             ["e:~x", "e:~y", "e:~z"]])
    pres = CofinitePresentation(g, [ends, Partition.discrete(g.carrier)])
    k = Partition.from_blocks(g.carrier, [["v:b", "v:c"]], complete=True)
    uq = uniform_quotient(pres, k)
    from cofinite.relations import pushforward
    q = uq.projection.as_setmap()
    # the image of the diagonal is the quotient diagonal; pushforward refuses it
    with pytest.raises(ContractViolation):
        pushforward(q, Partition.discrete(g.carrier))
    full = Partition.discrete(uq.presentation.carrier)
    (only,) = uq.presentation.base
    assert only == pushforward(q, ends)
    assert full.refines(only) and full != only
    assert not uq.improper and not is_separating(uq.presentation)
