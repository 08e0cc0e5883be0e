"""Finite levels of the random ordered graph.

A structure is weakly saturated at level ``n`` when it contains an induced
copy of every ordered graph on at most ``n`` vertices.  The construction
concatenates one representative of each ``n``-vertex type and, while the
sum is small, drops vertices greedily as long as every type keeps a witness.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass

from .classes import ordered_graphs
from .structures import (
    ORDERED_GRAPH,
    Embedding,
    FinStructure,
    first_embedding,
    get_size_cap,
    induced_substructure,
    ordered_sum,
    size_cap,
)
from .verdicts import Verdict

__all__ = [
    "LEVEL_CAP",
    "LevelCapExceeded",
    "SaturationCertificate",
    "weakly_saturated_ordered_graph",
    "extension_property_check",
    "embed_into",
    "all_ordered_graphs",
]

LEVEL_CAP = 4
PRUNE_LIMIT = 64


class LevelCapExceeded(ValueError):
    pass


def all_ordered_graphs(max_size: int) -> list[FinStructure]:
    """Every ordered graph on ``1..max_size`` vertices, by size."""
    K = ordered_graphs()
    return [G for m in range(1, max_size + 1) for G in K.members(m)]


@dataclass(frozen=True)
class SaturationCertificate:
    structure: FinStructure
    level: int
    witness_map: dict  # FinStructure -> Embedding

    def verify(self) -> bool:
        expected = set(all_ordered_graphs(self.level))
        if set(self.witness_map) != expected:
            return False
        with size_cap(max(get_size_cap(), self.structure.size)):
            return all(
                e.source == A and e.target == self.structure and e.verify()
                for A, e in self.witness_map.items()
            )


def _cap_for(level: int, allow_large: bool) -> None:
    if level < 1:
        raise ValueError("level must be >= 1")
    if level > LEVEL_CAP and not allow_large:
        raise LevelCapExceeded(
            f"level {level} exceeds the default cap {LEVEL_CAP}; pass allow_large=True"
        )


def _find(T: FinStructure, adj: list[int], alive: int) -> tuple[int, ...] | None:
    """Least increasing embedding of ordered graph ``T`` among ``alive`` vertices."""
    n = T.size
    img = [0] * n
    full = alive

    def rec(v: int, floor: int):
        if v == n:
            return True
        mask = full & ~((1 << floor) - 1)
        for u in range(v):
            mask &= adj[img[u]] if T.holds("R", (u, v)) else ~adj[img[u]]
        while mask:
            low = mask & -mask
            img[v] = low.bit_length() - 1
            if rec(v + 1, img[v] + 1):
                return True
            mask ^= low
        return False

    return tuple(img) if rec(0, 0) else None


def weakly_saturated_ordered_graph(n: int, *, allow_large: bool = False) -> SaturationCertificate:
    _cap_for(n, allow_large)
    types = ordered_graphs().members(n)
    G = ordered_sum(types)
    adj = [0] * G.size
    for a, b in G.table("R"):
        adj[a] |= 1 << b
    alive = (1 << G.size) - 1
    # block i hosts type i until pruning moves its witness; pruning a large
    # sum costs minutes of failing searches, so large sums stay as they are
    wit = {i: range(i * n, (i + 1) * n) for i in range(len(types))}
    for v in range(G.size if G.size <= PRUNE_LIMIT else 0):
        trial = alive & ~(1 << v)
        fresh = {}
        for i, w in wit.items():
            if v in w:
                f = _find(types[i], adj, trial)
                if f is None:
                    break
                fresh[i] = f
        else:
            alive = trial
            wit.update(fresh)
    keep = [v for v in range(G.size) if alive >> v & 1]
    S = induced_substructure(G, keep)
    with size_cap(max(get_size_cap(), S.size)):
        witness_map = {}
        for A in all_ordered_graphs(n):
            e = first_embedding(A, S)
            assert e is not None, "pruning lost a type"
            witness_map[A] = e
    return SaturationCertificate(S, n, witness_map)


def extension_property_check(G: FinStructure, m: int, *, respect_order: bool = True) -> Verdict:
    """One-point extension axioms over every induced ``A`` with ``|A| < m``.

    An extension type of ``A`` is a gap of ``A`` in the order (unless
    ``respect_order`` is false) plus the set of ``A``-vertices the new point
    is adjacent to.  The first missing extension is the certificate.  In a
    finite ordered graph the gap before the least vertex is always empty, so
    with ``respect_order`` the check fails for every ``m >= 2``.
    """
    if G.signature != ORDERED_GRAPH:
        raise ValueError("extension_property_check expects an ordered graph")
    adj = [set() for _ in range(G.size)]
    for a, b in G.table("R"):
        adj[a].add(b)
    for s in range(min(m, G.size + 1)):
        for A in itertools.combinations(range(G.size), s):
            gaps = range(s + 1) if respect_order else [None]
            for gap in gaps:
                lo = A[gap - 1] if gap else -1
                hi = A[gap] if gap is not None and gap < s else G.size
                pool = [v for v in range(lo + 1, hi) if v not in A] if gap is not None else [
                    v for v in range(G.size) if v not in A
                ]
                for r in range(s + 1):
                    for nbrs in itertools.combinations(A, r):
                        want = set(nbrs)
                        if not any(adj[v] & set(A) == want for v in pool):
                            return Verdict.fail(
                                {"A": A, "gap": gap, "adjacent": nbrs},
                                f"no vertex extends {A} in gap {gap} adjacent to {nbrs}",
                            )
    return Verdict.ok(note=f"all one-point extensions of sets below size {m} realized")


def embed_into(A: FinStructure, cert: SaturationCertificate) -> Embedding:
    if A.signature != ORDERED_GRAPH:
        raise ValueError("embed_into expects an ordered graph")
    if A.size > cert.level:
        raise ValueError(f"size {A.size} exceeds certificate level {cert.level}")
    with size_cap(max(get_size_cap(), cert.structure.size)):
        e = cert.witness_map.get(A)
        if e is None:  # empty A, or a map built elsewhere
            e = first_embedding(A, cert.structure)
        if e is None or not e.verify():
            raise ValueError("certificate does not embed the structure")
    return e
