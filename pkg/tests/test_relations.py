import itertools
import random

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cofinite.relations import (
    Carrier,
    ContractViolation,
    NotCommuting,
    Partition,
    Relation,
    SetMap,
    all_partitions,
    commuting_product,
    compose,
    equivalence_closure,
    image,
    inverse,
    is_equivalence,
    join,
    kernel,
    meet,
    pullback,
    pushforward,
    restrict,
)
from oracles import compose_pairs, equivalence_fixpoint, inverse_pairs, pairs_of, partition_pairs

X = Carrier("xyz")


def rel(carrier, pairs):
    return Relation(carrier, carrier, pairs)


def random_relation(rng, dom, cod, density=None):
    d = rng.random() if density is None else density
    return Relation(dom, cod, [(x, y) for x in dom for y in cod if rng.random() < d])


@st.composite
def relations(draw, max_size=6):
    n = draw(st.integers(0, max_size))
    c = Carrier(f"p{i}" for i in range(n))
    bits = draw(st.lists(st.booleans(), min_size=n * n, max_size=n * n))
    return Relation(c, c, matrix=np.array(bits, dtype=bool).reshape(n, n))


@st.composite
def partitions(draw, max_size=7):
    n = draw(st.integers(0, max_size))
    c = Carrier(f"p{i}" for i in range(n))
    labels = draw(st.lists(st.integers(0, 3), min_size=n, max_size=n))
    return Partition(c, labels)


# ---------------------------------------------------------------- carriers and basics


def test_carrier_sorted_and_distinct():
    assert Carrier(["b", "a"]).ids == ("a", "b")
    with pytest.raises(ContractViolation):
        Carrier(["a", "a"])


def test_empty_carrier_is_total():
    e = Carrier()
    r = Relation(e, e)
    assert compose(r, r) == r
    assert equivalence_closure(r).n_blocks == 0
    p = Partition(e, [])
    assert meet(p, p) == p and p.is_discrete()
    assert kernel(SetMap(e, e, {})) == p
    assert list(all_partitions(e)) == [p]


def test_relation_rejects_foreign_pairs():
    with pytest.raises(ContractViolation) as exc:
        rel(X, [("x", "w")])
    assert exc.value.witness == ("x", "w")


# ---------------------------------------------------------------- compose, inverse, image


def test_compose_with_diagonal():
    rng = random.Random(0)
    for _ in range(20):
        r = random_relation(rng, X, X)
        assert compose(r, Relation.diagonal(X)) == r
        assert compose(Relation.diagonal(X), r) == r


def test_compose_single_pairs():
    c = Carrier("uvw")
    assert compose(rel(c, [("u", "v")]), rel(c, [("v", "w")])).pairs == (("u", "w"),)


def test_compose_carrier_mismatch():
    with pytest.raises(ContractViolation):
        compose(Relation(X, Carrier("ab")), Relation(X, X))


def test_compose_matches_triple_loop():
    rng = random.Random(1)
    a, b, c = (Carrier(f"{t}{i}" for i in range(6)) for t in "abc")
    for _ in range(200):
        r, s = random_relation(rng, a, b), random_relation(rng, b, c)
        out = compose(r, s)
        assert pairs_of(out) == compose_pairs(pairs_of(r), pairs_of(s))
        assert list(out.pairs) == sorted(out.pairs)


def test_inverse_law_random():
    rng = random.Random(2)
    c = Carrier(f"p{i}" for i in range(6))
    for _ in range(200):
        r, s = random_relation(rng, c, c), random_relation(rng, c, c)
        assert inverse(compose(r, s)) == compose(inverse(s), inverse(r))
        assert pairs_of(inverse(r)) == inverse_pairs(pairs_of(r))
        assert inverse(inverse(r)) == r
    assert inverse(Relation.diagonal(c)) == Relation.diagonal(c)


def test_image_law_and_scan():
    rng = random.Random(3)
    c = Carrier(f"p{i}" for i in range(6))
    for _ in range(200):
        r, s = random_relation(rng, c, c), random_relation(rng, c, c)
        a = {x for x in c if rng.random() < 0.4}
        assert image(compose(r, s), a) == image(s, image(r, a))
        assert image(r, a) == {y for x, y in r.pairs if x in a}
    assert image(Relation.diagonal(c), {"p1"}) == {"p1"}


def test_image_foreign_element():
    with pytest.raises(ContractViolation):
        image(Relation.diagonal(X), {"w"})


@given(relations(), relations())
def test_compose_hypothesis(r, s):
    if r.domain != s.domain:
        return
    assert pairs_of(compose(r, s)) == compose_pairs(pairs_of(r), pairs_of(s))


# ---------------------------------------------------------------- equivalences


def test_closure_examples():
    p = equivalence_closure(rel(X, [("x", "y")]))
    assert p.blocks == (("x", "y"), ("z",))


@given(relations())
def test_closure_matches_fixpoint(r):
    p = equivalence_closure(r)
    assert pairs_of(p.relation()) == equivalence_fixpoint(r.domain.ids, pairs_of(r))


def test_is_equivalence_witnesses():
    assert is_equivalence(Relation.diagonal(X))
    v = is_equivalence(rel(X, [("x", "x"), ("y", "y"), ("z", "z"), ("x", "y")]))
    assert not v and v.witness == ("x", "y") and v.reason == "not symmetric"
    v = is_equivalence(rel(X, [("x", "y")]))
    assert not v and v.reason == "not reflexive"
    d = [(a, a) for a in "xyz"]
    v = is_equivalence(rel(X, d + [("x", "y"), ("y", "x"), ("y", "z"), ("z", "y")]))
    assert not v and v.reason == "not transitive" and v.witness in {("x", "z"), ("z", "x")}


@given(partitions())
def test_partition_relations_are_equivalences(p):
    assert is_equivalence(p.relation())
    m = p.relation()
    assert compose(m, m) == m  # idempotence
    assert compose(compose(m, m), m) == m  # R = R^3


def test_commuting_product_identity_case():
    rng = random.Random(4)
    c = Carrier(f"p{i}" for i in range(6))
    for _ in range(50):
        p = Partition(c, [rng.randrange(3) for _ in c])
        assert commuting_product(p, Partition.discrete(c)) == p


def test_commuting_product_witness():
    c = Carrier("abc")
    p1 = Partition.from_blocks(c, [["a", "b"], ["c"]])
    p2 = Partition.from_blocks(c, [["a"], ["b", "c"]])
    out = commuting_product(p1, p2)
    assert isinstance(out, NotCommuting) and not out
    x, y = out.witness
    r1, r2 = partition_pairs(p1.blocks), partition_pairs(p2.blocks)
    assert ((x, y) in compose_pairs(r1, r2)) != ((x, y) in compose_pairs(r2, r1))


def test_commuting_product_exhaustive_on_four():
    c = Carrier("abcd")
    parts = list(all_partitions(c))
    assert len(parts) == 15
    for p1, p2 in itertools.product(parts, repeat=2):
        r1, r2 = partition_pairs(p1.blocks), partition_pairs(p2.blocks)
        prod = compose_pairs(r1, r2)
        out = commuting_product(p1, p2)
        if prod == compose_pairs(r2, r1):
            assert pairs_of(out.relation()) == prod
            assert out == equivalence_closure(p1.relation() | p2.relation())
        else:
            assert isinstance(out, NotCommuting)


# ---------------------------------------------------------------- maps and partitions


def random_map(rng, dom, cod, onto=False):
    ids = list(cod.ids)
    while True:
        table = {x: rng.choice(ids) for x in dom}
        if not onto or set(table.values()) == set(ids):
            return SetMap(dom, cod, table)


def test_pullback_examples_and_oracle():
    rng = random.Random(5)
    a, b = Carrier(f"a{i}" for i in range(7)), Carrier(f"b{i}" for i in range(4))
    for _ in range(200):
        f = random_map(rng, a, b)
        p = Partition(b, [rng.randrange(3) for _ in b])
        q = pullback(f, p)
        rp = partition_pairs(p.blocks)
        assert pairs_of(q.relation()) == {(x, y) for x in a for y in a if (f(x), f(y)) in rp}
        assert q.n_blocks <= p.n_blocks
        assert pullback(f, Partition.discrete(b)) == kernel(f)
    p = Partition(b, [0, 1, 0, 1])
    assert pullback(SetMap.identity(b), p) == p


def test_pushforward_and_correspondence():
    rng = random.Random(6)
    a, b = Carrier(f"a{i}" for i in range(7)), Carrier(f"b{i}" for i in range(4))
    for _ in range(100):
        f = random_map(rng, a, b, onto=True)
        target = Partition(b, [rng.randrange(3) for _ in b])
        p = pullback(f, target)
        q = pushforward(f, p)
        assert q == target  # pushforward undoes pullback
        assert pullback(f, q) == p
        blocks = {frozenset(f(x) for x in blk) for blk in p.blocks}
        assert set(map(frozenset, q.blocks)) == blocks
        assert pushforward(f, kernel(f)).is_discrete()
    p = Partition(a, [i % 3 for i in range(7)])
    assert pushforward(SetMap.identity(a), p) == p


def test_pushforward_contract():
    a, b = Carrier("ab"), Carrier("xyz")
    f = SetMap(a, b, {"a": "x", "b": "y"})
    with pytest.raises(ContractViolation) as exc:
        pushforward(f, Partition.discrete(a))
    assert exc.value.witness == "z"
    g = SetMap(Carrier("abc"), Carrier("xy"), {"a": "x", "b": "x", "c": "y"})
    with pytest.raises(ContractViolation) as exc:
        pushforward(g, Partition.discrete(Carrier("abc")))
    assert exc.value.witness == ("a", "b")


def test_correspondence_bijection_exhaustive():
    a, b = Carrier("abcde"), Carrier("xyz")
    f = SetMap(a, b, {"a": "x", "b": "x", "c": "y", "d": "z", "e": "z"})
    k = kernel(f)
    above = [p for p in all_partitions(a) if k.refines(p)]
    below = list(all_partitions(b))
    assert len(above) == len(below) == 5
    assert {pushforward(f, p) for p in above} == set(below)
    assert {pullback(f, q) for q in below} == set(above)


def test_kernel_examples():
    rng = random.Random(7)
    a, b = Carrier(f"a{i}" for i in range(6)), Carrier("xyz")
    assert kernel(SetMap.identity(a)).is_discrete()
    assert kernel(SetMap.constant(a, b, "x")).n_blocks == 1
    for _ in range(100):
        f = random_map(rng, a, b)
        fibers = {frozenset(x for x in a if f(x) == y) for y in b} - {frozenset()}
        assert set(map(frozenset, kernel(f).blocks)) == fibers


def test_map_relation_composite_inside_diagonal():
    rng = random.Random(8)
    a, b = Carrier(f"a{i}" for i in range(5)), Carrier("xyz")
    for _ in range(50):
        f = random_map(rng, a, b).as_relation()
        assert compose(inverse(f), f) <= Relation.diagonal(b)


@given(partitions(), st.data())
def test_meet_matches_intersection(p, data):
    labels = data.draw(st.lists(st.integers(0, 3), min_size=len(p.carrier), max_size=len(p.carrier)))
    q = Partition(p.carrier, labels)
    assert meet(p, q).relation() == (p.relation() & q.relation())
    assert meet(p, p) == p
    assert meet(p, Partition.discrete(p.carrier)).is_discrete()


@given(partitions(), st.data())
def test_join_is_least_upper_bound(p, data):
    labels = data.draw(st.lists(st.integers(0, 3), min_size=len(p.carrier), max_size=len(p.carrier)))
    q = Partition(p.carrier, labels)
    j = join(p, q)
    assert p.refines(j) and q.refines(j)
    assert j == equivalence_closure(p.relation() | q.relation())


def test_partition_json_round_trip():
    p = Partition.from_blocks(X, [["x", "z"], ["y"]])
    assert p.to_json() == {"carrier": ["x", "y", "z"], "blocks": [["x", "z"], ["y"]]}
    assert Partition.from_json(p.to_json()) == p


def test_from_blocks_contract():
    with pytest.raises(ContractViolation):
        Partition.from_blocks(X, [["x", "y"], ["y", "z"]])
    with pytest.raises(ContractViolation):
        Partition.from_blocks(X, [["x"]])
    assert Partition.from_blocks(X, [["x"]], complete=True).is_discrete()


def test_restrict():
    p = Partition.from_blocks(Carrier("abcd"), [["a", "b", "c"], ["d"]])
    assert restrict(p, Carrier("abd")).blocks == (("a", "b"), ("d",))


def test_rectangle_identity():
    rng = random.Random(9)
    c = Carrier(f"p{i}" for i in range(6))
    for _ in range(50):
        p = Partition(c, [rng.randrange(3) for _ in c])
        pairs = set(p.relation().pairs)
        rect = set()
        for a, b in pairs:
            rect |= {(x, y) for x in p.block_of(a) for y in p.block_of(b)}
        assert rect == pairs
