"""Binary relations, set maps and partitions on finite carriers.

Relations are boolean adjacency matrices between two carriers; partitions are
canonical label arrays (see :mod:`cofinite.kernels`).  Everything here is
immutable, and every operation accepts empty carriers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Iterable, Mapping

import numpy as np

from . import kernels


class ContractViolation(ValueError):
    """A precondition failed.  ``witness`` carries the offending data, if any."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class Verdict:
    """Boolean outcome of a check, with a witness when it fails."""

    ok: bool
    witness: object = None
    reason: str = ""

    def __bool__(self):
        return self.ok


def _frozen(arr):
    arr = np.ascontiguousarray(arr)
    arr.setflags(write=False)
    return arr


class Carrier:
    """A finite set of string identifiers in sorted order."""

    __slots__ = ("ids", "index")

    def __init__(self, elements: Iterable[str] = ()):
        ids = tuple(sorted(elements))
        for a, b in zip(ids, ids[1:]):
            if a == b:
                raise ContractViolation(f"duplicate element {a!r}", witness=a)
        self.ids = ids
        self.index = {x: i for i, x in enumerate(ids)}

    def __len__(self):
        return len(self.ids)

    def __iter__(self):
        return iter(self.ids)

    def __contains__(self, x):
        return x in self.index

    def __eq__(self, other):
        return isinstance(other, Carrier) and self.ids == other.ids

    def __hash__(self):
        return hash(self.ids)

    def __repr__(self):
        return f"Carrier({list(self.ids)!r})"

    def indices(self, elements: Iterable[str]) -> np.ndarray:
        try:
            return np.fromiter((self.index[x] for x in elements), dtype=np.int64)
        except KeyError as exc:
            raise ContractViolation(f"{exc.args[0]!r} is not in the carrier", witness=exc.args[0]) from None

    def subset(self, mask) -> frozenset:
        return frozenset(self.ids[i] for i in np.flatnonzero(mask))

    def mask(self, elements: Iterable[str]) -> np.ndarray:
        m = np.zeros(len(self.ids), dtype=bool)
        m[self.indices(elements)] = True
        return m


def _same_carrier(a: Carrier, b: Carrier, what="carriers"):
    if a != b:
        raise ContractViolation(f"{what} differ")


class Relation:
    """A binary relation from ``domain`` to ``codomain``."""

    __slots__ = ("domain", "codomain", "matrix")

    def __init__(self, domain: Carrier, codomain: Carrier, pairs: Iterable[tuple[str, str]] = (), *, matrix=None):
        self.domain = domain
        self.codomain = codomain
        if matrix is None:
            m = np.zeros((len(domain), len(codomain)), dtype=bool)
            for x, y in pairs:
                if x not in domain.index:
                    raise ContractViolation(f"{x!r} is not in the domain", witness=(x, y))
                if y not in codomain.index:
                    raise ContractViolation(f"{y!r} is not in the codomain", witness=(x, y))
                m[domain.index[x], codomain.index[y]] = True
        else:
            m = np.asarray(matrix, dtype=bool)
            if m.shape != (len(domain), len(codomain)):
                raise ContractViolation("matrix shape does not match the carriers")
        self.matrix = _frozen(m)

    @classmethod
    def diagonal(cls, carrier: Carrier) -> Relation:
        return cls(carrier, carrier, matrix=np.eye(len(carrier), dtype=bool))

    @property
    def pairs(self) -> tuple[tuple[str, str], ...]:
        xs, ys = np.nonzero(self.matrix)
        return tuple((self.domain.ids[i], self.codomain.ids[j]) for i, j in zip(xs, ys))

    def __contains__(self, pair):
        x, y = pair
        return bool(self.matrix[self.domain.index[x], self.codomain.index[y]])

    def __len__(self):
        return int(self.matrix.sum())

    def __eq__(self, other):
        return (
            isinstance(other, Relation)
            and self.domain == other.domain
            and self.codomain == other.codomain
            and np.array_equal(self.matrix, other.matrix)
        )

    def __hash__(self):
        return hash((self.domain, self.codomain, self.matrix.tobytes()))

    def __le__(self, other: Relation):
        return bool(np.all(other.matrix[self.matrix]))

    def __and__(self, other: Relation) -> Relation:
        return Relation(self.domain, self.codomain, matrix=self.matrix & other.matrix)

    def __or__(self, other: Relation) -> Relation:
        return Relation(self.domain, self.codomain, matrix=self.matrix | other.matrix)

    def __repr__(self):
        return f"Relation({list(self.pairs)!r})"


class SetMap:
    """A total function between carriers, stored as an index table."""

    __slots__ = ("domain", "codomain", "table")

    def __init__(self, domain: Carrier, codomain: Carrier, assignment: Mapping[str, str] | None = None, *, table=None):
        self.domain = domain
        self.codomain = codomain
        if table is None:
            missing = [x for x in domain if x not in assignment]
            if missing:
                raise ContractViolation(f"map is not total: {missing[0]!r} has no image", witness=missing[0])
            table = codomain.indices(assignment[x] for x in domain.ids)
        self.table = _frozen(np.asarray(table, dtype=np.int64))
        if self.table.shape != (len(domain),):
            raise ContractViolation("table length does not match the domain")

    @classmethod
    def identity(cls, carrier: Carrier) -> SetMap:
        return cls(carrier, carrier, table=np.arange(len(carrier)))

    @classmethod
    def constant(cls, domain: Carrier, codomain: Carrier, value: str) -> SetMap:
        return cls(domain, codomain, table=np.full(len(domain), codomain.index[value]))

    def __call__(self, x: str) -> str:
        return self.codomain.ids[self.table[self.domain.index[x]]]

    @property
    def assignment(self) -> dict[str, str]:
        return {x: self.codomain.ids[j] for x, j in zip(self.domain.ids, self.table)}

    def is_surjective(self) -> bool:
        hit = np.zeros(len(self.codomain), dtype=bool)
        hit[self.table] = True
        return bool(hit.all())

    def then(self, other: SetMap) -> SetMap:
        """``other`` after ``self``."""
        _same_carrier(self.codomain, other.domain)
        return SetMap(self.domain, other.codomain, table=other.table[self.table])

    def as_relation(self) -> Relation:
        m = np.zeros((len(self.domain), len(self.codomain)), dtype=bool)
        m[np.arange(len(self.domain)), self.table] = True
        return Relation(self.domain, self.codomain, matrix=m)

    def __eq__(self, other):
        return (
            isinstance(other, SetMap)
            and self.domain == other.domain
            and self.codomain == other.codomain
            and np.array_equal(self.table, other.table)
        )

    def __hash__(self):
        return hash((self.domain, self.codomain, self.table.tobytes()))

    def __repr__(self):
        return f"SetMap({self.assignment!r})"


class Partition:
    """An equivalence relation on a finite carrier, kept as canonical labels.

    Block ``i`` is the set of elements labelled ``i``; blocks are numbered by
    their least element, which is the block's representative.
    """

    __slots__ = ("carrier", "labels")

    def __init__(self, carrier: Carrier, labels):
        labels = np.asarray(labels, dtype=np.int64)
        if labels.shape != (len(carrier),):
            raise ContractViolation("label array length does not match the carrier")
        self.carrier = carrier
        self.labels = _frozen(kernels.canonical_labels(labels))

    @classmethod
    def from_blocks(cls, carrier: Carrier, blocks: Iterable[Iterable[str]], *, complete=False) -> Partition:
        """Build from blocks.  With ``complete``, unlisted elements become singletons."""
        labels = np.full(len(carrier), -1, dtype=np.int64)
        n = 0
        for block in blocks:
            idx = carrier.indices(block)
            if idx.size == 0:
                raise ContractViolation("empty block")
            if (labels[idx] >= 0).any() or np.unique(idx).size != idx.size:
                dup = carrier.ids[idx[labels[idx] >= 0][0]] if (labels[idx] >= 0).any() else carrier.ids[idx[0]]
                raise ContractViolation(f"blocks overlap at {dup!r}", witness=dup)
            labels[idx] = n
            n += 1
        rest = np.flatnonzero(labels < 0)
        if rest.size:
            if not complete:
                raise ContractViolation(f"blocks do not cover {carrier.ids[rest[0]]!r}", witness=carrier.ids[rest[0]])
            labels[rest] = n + np.arange(rest.size)
        return cls(carrier, labels)

    @classmethod
    def discrete(cls, carrier: Carrier) -> Partition:
        return cls(carrier, np.arange(len(carrier)))

    @classmethod
    def indiscrete(cls, carrier: Carrier) -> Partition:
        return cls(carrier, np.zeros(len(carrier), dtype=np.int64))

    @classmethod
    def from_json(cls, data) -> Partition:
        if isinstance(data, str):
            data = json.loads(data)
        return cls.from_blocks(Carrier(data["carrier"]), data["blocks"])

    @property
    def n_blocks(self) -> int:
        return int(self.labels.max()) + 1 if self.labels.size else 0

    @property
    def blocks(self) -> tuple[tuple[str, ...], ...]:
        out = [[] for _ in range(self.n_blocks)]
        for x, lab in zip(self.carrier.ids, self.labels):
            out[lab].append(x)
        return tuple(tuple(b) for b in out)

    def block_of(self, x: str) -> frozenset:
        lab = self.labels[self.carrier.index[x]]
        return self.carrier.subset(self.labels == lab)

    def representative(self, x: str) -> str:
        lab = self.labels[self.carrier.index[x]]
        return self.carrier.ids[int(np.argmax(self.labels == lab))]

    def image(self, elements: Iterable[str]) -> frozenset:
        """R[A]: the union of the blocks meeting ``elements``."""
        idx = self.carrier.indices(elements)
        return self.carrier.subset(np.isin(self.labels, self.labels[idx]))

    def relation(self) -> Relation:
        return Relation(self.carrier, self.carrier, matrix=self.labels[:, None] == self.labels[None, :])

    def refines(self, other: Partition) -> bool:
        """True iff self is contained in other as relations."""
        _same_carrier(self.carrier, other.carrier)
        return kernels.refines_witness(self.labels, other.labels)[0] < 0

    def is_discrete(self) -> bool:
        return self.n_blocks == len(self.carrier)

    def __le__(self, other: Partition):
        return self.refines(other)

    def __and__(self, other: Partition) -> Partition:
        return meet(self, other)

    def __eq__(self, other):
        return isinstance(other, Partition) and self.carrier == other.carrier and np.array_equal(self.labels, other.labels)

    def __hash__(self):
        return hash((self.carrier, self.labels.tobytes()))

    def sort_key(self):
        return (self.n_blocks, tuple(self.labels.tolist()))

    def to_json(self) -> dict:
        return {"carrier": list(self.carrier.ids), "blocks": [list(b) for b in self.blocks]}

    def __repr__(self):
        return "Partition(" + " | ".join(" ".join(b) for b in self.blocks) + ")"


@dataclass(frozen=True)
class NotCommuting:
    """Outcome of :func:`commuting_product` when R1R2 != R2R1."""

    witness: tuple[str, str]

    def __bool__(self):
        return False


# ---------------------------------------------------------------- relations


def compose(r: Relation, s: Relation) -> Relation:
    """SR: pairs (x, z) with (x, y) in r and (y, z) in s for some y."""
    if r.codomain != s.domain:
        raise ContractViolation("cannot compose: codomain of r is not the domain of s")
    return Relation(r.domain, s.codomain, matrix=kernels.compose_bool(r.matrix, s.matrix))


def inverse(r: Relation) -> Relation:
    return Relation(r.codomain, r.domain, matrix=r.matrix.T)


def image(r: Relation, a: Iterable[str]) -> frozenset:
    idx = r.domain.indices(a)
    return r.codomain.subset(r.matrix[idx].any(axis=0))


def equivalence_closure(r: Relation) -> Partition:
    if r.domain != r.codomain:
        raise ContractViolation("equivalence closure needs a relation on one carrier")
    u, v = np.nonzero(r.matrix)
    return Partition(r.domain, kernels.closure_labels(len(r.domain), u, v))


def is_equivalence(r: Relation) -> Verdict:
    if r.domain != r.codomain:
        return Verdict(False, None, "not a relation on one carrier")
    m = r.matrix
    ids = r.domain.ids
    missing = np.flatnonzero(~np.diag(m))
    if missing.size:
        x = ids[missing[0]]
        return Verdict(False, (x, x), "not reflexive")
    asym = np.argwhere(m & ~m.T)
    if asym.size:
        i, j = asym[0]
        return Verdict(False, (ids[i], ids[j]), "not symmetric")
    extra = np.argwhere(kernels.compose_bool(m, m) & ~m)
    if extra.size:
        i, j = extra[0]
        return Verdict(False, (ids[i], ids[j]), "not transitive")
    return Verdict(True)


def commuting_product(p1: Partition, p2: Partition) -> Partition | NotCommuting:
    """The partition of R1R2 when R1R2 = R2R1, else a witnessing pair."""
    _same_carrier(p1.carrier, p2.carrier)
    r1, r2 = p1.relation(), p2.relation()
    a = compose(r2, r1).matrix
    b = compose(r1, r2).matrix
    diff = np.argwhere(a != b)
    if diff.size:
        i, j = diff[0]
        return NotCommuting((p1.carrier.ids[i], p1.carrier.ids[j]))
    u, v = np.nonzero(a)
    return Partition(p1.carrier, kernels.closure_labels(len(p1.carrier), u, v))


# ---------------------------------------------------------------- partitions


def meet(p1: Partition, *rest: Partition) -> Partition:
    out = p1.labels
    for p in rest:
        _same_carrier(p1.carrier, p.carrier)
        out = kernels.meet_labels(out, p.labels)
    return Partition(p1.carrier, out)


def join(p1: Partition, p2: Partition) -> Partition:
    """The finest partition coarser than both."""
    _same_carrier(p1.carrier, p2.carrier)
    n = len(p1.carrier)
    idx = np.arange(n)
    u = np.concatenate([idx, idx])
    v = np.concatenate([_representatives(p1.labels), _representatives(p2.labels)])
    return Partition(p1.carrier, kernels.closure_labels(n, u, v))


def _representatives(labels):
    """Index of the least element of each element's block."""
    idx = np.arange(labels.size)
    first = np.empty(labels.max() + 1 if labels.size else 0, dtype=np.int64)
    first[labels[::-1]] = idx[::-1]
    return first[labels]


def kernel(f: SetMap) -> Partition:
    """The fibers of ``f``."""
    return Partition(f.domain, f.table)


def pullback(f: SetMap, p: Partition) -> Partition:
    """x ~ y iff f(x) and f(y) lie in one block of ``p``."""
    _same_carrier(f.codomain, p.carrier, "map codomain and partition carrier")
    return Partition(f.domain, p.labels[f.table])


def pushforward(f: SetMap, p: Partition) -> Partition:
    """Blocks f[B] for the blocks B of ``p``; needs f onto and kernel(f) inside p."""
    _same_carrier(f.domain, p.carrier, "map domain and partition carrier")
    hit = np.zeros(len(f.codomain), dtype=bool)
    hit[f.table] = True
    if not hit.all():
        y = f.codomain.ids[int(np.argmin(hit))]
        raise ContractViolation(f"map is not surjective: {y!r} has no preimage", witness=y)
    j, i = kernels.refines_witness(kernels.canonical_labels(f.table), p.labels)
    if j >= 0:
        x, y = f.domain.ids[j], f.domain.ids[i]
        raise ContractViolation(f"kernel of the map is not contained in the partition: {x!r} ~ {y!r}", witness=(x, y))
    out = np.empty(len(f.codomain), dtype=np.int64)
    out[f.table] = p.labels
    return Partition(f.codomain, out)


def restrict(p: Partition, sub: Carrier) -> Partition:
    """R ∩ (A × A) for a sub-carrier A."""
    return Partition(sub, p.labels[p.carrier.indices(sub.ids)])


def all_partitions(carrier: Carrier):
    """Every partition of ``carrier`` (restricted growth strings)."""
    n = len(carrier)
    if n == 0:
        yield Partition(carrier, [])
        return
    labels = [0] * n

    def rec(i, top):
        if i == n:
            yield Partition(carrier, labels)
            return
        for lab in range(top + 2):
            labels[i] = lab
            yield from rec(i + 1, max(top, lab))

    labels[0] = 0
    yield from rec(1, 0)
