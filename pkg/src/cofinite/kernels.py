"""Label-array kernels behind the partition and relation algebra.

A partition of an n-element carrier is an int64 array of block labels.  A
label array is *canonical* when labels are numbered 0, 1, 2, ... in order of
first occurrence, so two canonical arrays are equal iff the partitions are.

Every kernel has a loop version compiled with numba and a vectorized numpy
version.  The module-level names dispatch on ``_accel.USE_NUMBA``; both
families stay importable so tests and benchmarks can compare them.
"""

import numpy as np

from ._accel import USE_NUMBA, jit

# ---------------------------------------------------------------- numba path


@jit
def _canonical_nb(labels):
    n = labels.shape[0]
    out = np.empty(n, dtype=np.int64)
    if n == 0:
        return out
    lo = labels.min()
    span = labels.max() - lo + 1
    if span > 4 * n + 64:
        return _canonical_sparse_nb(labels)
    seen = np.full(span, -1, dtype=np.int64)
    nxt = 0
    for i in range(n):
        k = labels[i] - lo
        if seen[k] < 0:
            seen[k] = nxt
            nxt += 1
        out[i] = seen[k]
    return out


@jit
def _first_seen_ranks(group, n_groups):
    # relabel group ids 0, 1, ... by first occurrence
    rank = np.full(n_groups, -1, dtype=np.int64)
    out = np.empty(group.shape[0], dtype=np.int64)
    nxt = 0
    for i in range(group.shape[0]):
        g = group[i]
        if rank[g] < 0:
            rank[g] = nxt
            nxt += 1
        out[i] = rank[g]
    return out


@jit
def _canonical_sparse_nb(labels):
    # wide label ranges: group by sorting instead of a table
    n = labels.shape[0]
    order = np.argsort(labels, kind="mergesort")
    group = np.empty(n, dtype=np.int64)
    g = -1
    for r in range(n):
        i = order[r]
        if r == 0 or labels[i] != labels[order[r - 1]]:
            g += 1
        group[i] = g
    return _first_seen_ranks(group, g + 1)


@jit
def _counting_order(keys, width, order):
    # stable counting sort of the index list ``order`` by keys[order]
    count = np.zeros(width + 1, dtype=np.int64)
    for i in order:
        count[keys[i] + 1] += 1
    for k in range(width):
        count[k + 1] += count[k]
    out = np.empty(order.shape[0], dtype=np.int64)
    for i in order:
        out[count[keys[i]]] = i
        count[keys[i]] += 1
    return out


@jit
def _meet_nb(a, b):
    n = a.shape[0]
    if n == 0:
        return np.empty(0, dtype=np.int64)
    lo_a = a.min()
    lo_b = b.min()
    wa = a.max() - lo_a + 1
    wb = b.max() - lo_b + 1
    if wa > 4 * n + 64 or wb > 4 * n + 64:
        return _canonical_sparse_nb((a - lo_a) * wb + (b - lo_b))
    if wa * wb <= 4 * n + 64:
        return _canonical_nb((a - lo_a) * wb + (b - lo_b))
    # two stable counting passes (b, then a) bring equal pairs together
    a = a - lo_a
    b = b - lo_b
    order = _counting_order(a, wa, _counting_order(b, wb, np.arange(n)))
    group = np.empty(n, dtype=np.int64)
    g = -1
    for r in range(n):
        i = order[r]
        if r == 0 or a[i] != a[order[r - 1]] or b[i] != b[order[r - 1]]:
            g += 1
        group[i] = g
    return _first_seen_ranks(group, g + 1)


@jit
def _refines_nb(a, b):
    # a must be canonical; returns (j, i) with a[j] == a[i], b[j] != b[i]
    n = a.shape[0]
    if n == 0:
        return -1, -1
    rep = np.full(a.max() + 1, -1, dtype=np.int64)
    for i in range(n):
        r = rep[a[i]]
        if r < 0:
            rep[a[i]] = i
        elif b[r] != b[i]:
            return r, i
    return -1, -1


@jit
def _find(parent, x):
    while parent[x] != x:
        parent[x] = parent[parent[x]]
        x = parent[x]
    return x


@jit
def _closure_nb(n, u, v):
    parent = np.arange(n, dtype=np.int64)
    for k in range(u.shape[0]):
        ru = _find(parent, u[k])
        rv = _find(parent, v[k])
        if ru != rv:
            # keep the smaller index as root so roots are block minima
            if ru < rv:
                parent[rv] = ru
            else:
                parent[ru] = rv
    roots = np.empty(n, dtype=np.int64)
    for i in range(n):
        roots[i] = _find(parent, i)
    return _canonical_nb(roots)


@jit
def _compose_nb(a, b):
    n, m = a.shape
    p = b.shape[1]
    out = np.zeros((n, p), dtype=np.bool_)
    for i in range(n):
        for j in range(m):
            if a[i, j]:
                for k in range(p):
                    if b[j, k]:
                        out[i, k] = True
    return out


# ---------------------------------------------------------------- numpy path


def _canonical_np(labels):
    labels = np.asarray(labels, dtype=np.int64)
    if labels.size == 0:
        return np.empty(0, dtype=np.int64)
    _, first, inverse = np.unique(labels, return_index=True, return_inverse=True)
    rank = np.empty(first.size, dtype=np.int64)
    rank[np.argsort(first, kind="stable")] = np.arange(first.size)
    return rank[inverse.ravel()]


def _meet_np(a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0:
        return np.empty(0, dtype=np.int64)
    b = b - b.min()
    return _canonical_np(a * (b.max() + 1) + b)


def _refines_np(a, b):
    a = np.asarray(a, dtype=np.int64)
    b = np.asarray(b, dtype=np.int64)
    if a.size == 0:
        return -1, -1
    _, first, inverse = np.unique(a, return_index=True, return_inverse=True)
    rep = first[inverse.ravel()]
    bad = np.flatnonzero(b[rep] != b)
    if bad.size == 0:
        return -1, -1
    i = int(bad[0])
    return int(rep[i]), i


def _closure_np(n, u, v):
    lab = np.arange(n, dtype=np.int64)
    u = np.asarray(u, dtype=np.int64)
    v = np.asarray(v, dtype=np.int64)
    if u.size:
        while True:
            low = np.minimum(lab[u], lab[v])
            new = lab.copy()
            np.minimum.at(new, u, low)
            np.minimum.at(new, v, low)
            new = new[new]
            if np.array_equal(new, lab):
                break
            lab = new
    return _canonical_np(lab)


def _compose_np(a, b):
    return (a.astype(np.int64) @ b.astype(np.int64)) > 0


NUMBA_KERNELS = {
    "canonical": _canonical_nb,
    "meet": _meet_nb,
    "refines": _refines_nb,
    "closure": _closure_nb,
    "compose": _compose_nb,
}
NUMPY_KERNELS = {
    "canonical": _canonical_np,
    "meet": _meet_np,
    "refines": _refines_np,
    "closure": _closure_np,
    "compose": _compose_np,
}


def _as_labels(x):
    return np.ascontiguousarray(x, dtype=np.int64)


if USE_NUMBA:

    def canonical_labels(labels):
        return _canonical_nb(_as_labels(labels))

    def meet_labels(a, b):
        return _meet_nb(_as_labels(a), _as_labels(b))

    def refines_witness(a, b):
        j, i = _refines_nb(_as_labels(a), _as_labels(b))
        return int(j), int(i)

    def closure_labels(n, u, v):
        return _closure_nb(int(n), _as_labels(u), _as_labels(v))

    def compose_bool(a, b):
        return _compose_nb(np.ascontiguousarray(a, dtype=np.bool_), np.ascontiguousarray(b, dtype=np.bool_))

else:
    canonical_labels = _canonical_np
    meet_labels = _meet_np
    refines_witness = _refines_np
    closure_labels = _closure_np
    compose_bool = _compose_np

canonical_labels.__doc__ = "Renumber block labels 0, 1, ... by first occurrence."
meet_labels.__doc__ = "Canonical labels of the blockwise intersection of two partitions."
refines_witness.__doc__ = (
    "Return (-1, -1) if every block of canonical ``a`` lies inside a block of ``b``; "
    "otherwise the first pair (j, i), j < i, sharing an a-block but not a b-block."
)
closure_labels.__doc__ = "Canonical labels of the equivalence relation generated by pairs (u[k], v[k])."
compose_bool.__doc__ = "Boolean matrix product: relation composition on adjacency matrices."
