"""Pure-Python coloring kernels.

All kernels work on a *copy hypergraph*: ``n`` vertices (the A-copies of
C, colored ``0..k-1``) and hyperedges (the B-copies, each listed as the
A-copies it contains) flattened into ``members`` with CSR ``offsets``.
"""
from __future__ import annotations

import numpy as np


def first_homogeneous(colors, members, offsets) -> int:
    """Index of the first hyperedge whose members share one color, else -1."""
    nh = len(offsets) - 1
    for h in range(nh):
        lo, hi = offsets[h], offsets[h + 1]
        if lo == hi:
            return h
        c = colors[members[lo]]
        for p in range(lo + 1, hi):
            if colors[members[p]] != c:
                break
        else:
            return h
    return -1


def exhaustive(n, k, members, offsets, lo, hi, want_certs):
    """Enumerate colorings lexicographically with ``colors[0]`` in ``[lo, hi)``.

    Returns ``(bad, certs, count)``; ``bad`` is the first coloring with no
    homogeneous hyperedge (or None) and ``certs`` records, per enumerated
    coloring, the index of its first homogeneous hyperedge.
    """
    members = [int(x) for x in members]
    offsets = [int(x) for x in offsets]
    certs = [] if want_certs else None
    if n == 0:
        h = first_homogeneous([], members, offsets)
        if h < 0:
            return [], None, 1
        if want_certs:
            certs.append(h)
        return None, _arr(certs), 1
    colors = [0] * n
    colors[0] = lo
    count = 0
    while True:
        count += 1
        h = first_homogeneous(colors, members, offsets)
        if h < 0:
            return list(colors), None, count
        if want_certs:
            certs.append(h)
        p = n - 1
        while p >= 0:
            colors[p] += 1
            if p == 0:
                if colors[0] < hi:
                    break
                return None, _arr(certs), count
            if colors[p] < k:
                break
            colors[p] = 0
            p -= 1


def _arr(certs):
    return None if certs is None else np.asarray(certs, dtype=np.int32)


def backtrack(n, k, members, offsets, order, node_limit):
    """Search for a coloring with no homogeneous hyperedge.

    Copies are colored in ``order``; a color is pruned when it would make
    some hyperedge fully monochromatic.  Colors are introduced in increasing
    order of first use (the problem is invariant under color permutation).
    Returns ``(coloring | None, exhausted, nodes)``.
    """
    members = [int(x) for x in members]
    offsets = [int(x) for x in offsets]
    nh = len(offsets) - 1
    size = [offsets[h + 1] - offsets[h] for h in range(nh)]
    if any(s == 0 for s in size):
        return None, True, 0
    inc = [[] for _ in range(n)]
    for h in range(nh):
        for p in range(offsets[h], offsets[h + 1]):
            inc[members[p]].append(h)
    cnt = [[0] * k for _ in range(nh)]
    colors = [-1] * n
    order = [int(x) for x in order]
    nodes = 0
    limit = node_limit if node_limit and node_limit > 0 else None

    # explicit stack: (depth, next color to try, max color used so far)
    depth = 0
    next_c = [0] * (n + 1)
    used_max = [-1] * (n + 1)
    while True:
        if depth == n:
            return list(colors), True, nodes
        i = order[depth]
        c = next_c[depth]
        top = min(k - 1, used_max[depth] + 1)
        placed = False
        while c <= top:
            ok = True
            for h in inc[i]:
                if cnt[h][c] == size[h] - 1:
                    ok = False
                    break
            if ok:
                nodes += 1
                if limit is not None and nodes > limit:
                    return None, False, nodes
                colors[i] = c
                for h in inc[i]:
                    cnt[h][c] += 1
                next_c[depth] = c + 1
                used_max[depth + 1] = max(used_max[depth], c)
                next_c[depth + 1] = 0
                depth += 1
                placed = True
                break
            c += 1
        if placed:
            continue
        # backtrack
        if depth == 0:
            return None, True, nodes
        depth -= 1
        j = order[depth]
        cj = colors[j]
        for h in inc[j]:
            cnt[h][cj] -= 1
        colors[j] = -1
