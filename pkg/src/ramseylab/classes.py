"""Classes of finite structures and bounded checks of their closure properties.

A :class:`FiniteClass` is a membership predicate plus a generator of its
members of each size, one per isomorphism type.  The checks below explore
all inputs up to a size bound and return three-valued verdicts.

Amalgams are searched on the union of the two images only.  For a class
closed under induced substructures this loses nothing: any amalgam restricts
to one supported on ``g1(B1) ∪ g2(B2)``.  For other classes a failed search is
reported as inconclusive.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Callable, Iterable, Iterator, Sequence

from .structures import (
    LINEAR_ORDER,
    ORDERED_GRAPH,
    Embedding,
    FinStructure,
    Signature,
    induced_substructure,
    isomorphic,
    iter_embeddings,
)
from .verdicts import Verdict

__all__ = [
    "FiniteClass",
    "AmalgamationBase",
    "Amalgam",
    "ordered_graphs",
    "girth5_ordered",
    "linear_orders",
    "ordered_hypergraphs",
    "from_predicate",
    "forbidden_class",
    "age_up_to",
    "hereditary_check",
    "jep_check",
    "ap_check",
    "strong_ap_check",
    "find_amalgam",
    "amalgamation_bases",
    "hypergraph_check",
    "has_girth_above_4",
]


@dataclass(frozen=True, eq=False)
class FiniteClass:
    name: str
    signature: Signature
    membership: Callable[[FinStructure], bool]
    generator: Callable[[int], Iterable[FinStructure]]
    size_cap: int = 6
    hereditary: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    def members(self, n: int) -> list[FinStructure]:
        """Members of size ``n``, one per isomorphism type, in generator order."""
        if n not in self._cache:
            self._cache[n] = list(self.generator(n))
        return self._cache[n]

    def members_up_to(self, n: int, start: int = 1) -> Iterator[FinStructure]:
        for s in range(start, n + 1):
            yield from self.members(s)

    def __contains__(self, S: FinStructure) -> bool:
        return S.signature == self.signature and bool(self.membership(S))


# -- generators ---------------------------------------------------------------

def _new_orbits(signature: Signature, n: int) -> list[dict[str, list[tuple]]]:
    """Choice bits for adding vertex ``n-1``: tuples mentioning it, grouped by
    the closure of each relation."""
    new = n - 1
    orbits = []
    for sym in signature.proper:
        seen = set()
        for t in itertools.product(range(n), repeat=sym.arity):
            if new not in t or t in seen:
                continue
            if sym.antireflexive and len(set(t)) < len(t):
                continue
            group = sorted(set(itertools.permutations(t))) if sym.symmetric else [t]
            seen.update(group)
            orbits.append({sym.name: group})
    return orbits


def _extend(S: FinStructure, orbits, mask: int) -> FinStructure:
    tables = {name: set(rows) for name, rows in S.tables.items()}
    for b, orb in enumerate(orbits):
        if mask >> b & 1:
            for name, rows in orb.items():
                tables[name].update(rows)
    return FinStructure._trusted(
        S.signature, S.size + 1, {k: frozenset(v) for k, v in tables.items()}
    )


def _all_structures(signature: Signature, n: int) -> Iterator[FinStructure]:
    """Every structure on ``0..n-1`` (natural order), built one vertex at a time."""
    if signature.order is None:
        raise ValueError("structure generators need an ordered signature")
    empty = FinStructure(signature, 0)
    level = [empty]
    for s in range(1, n + 1):
        orbits = _new_orbits(signature, s)
        level = [_extend(S, orbits, mask) for S in level for mask in range(1 << len(orbits))]
    yield from level


def _hereditary_generator(signature: Signature, membership) -> Callable[[int], Iterator]:
    # Members of size n restrict to members of size n-1 on their first n-1
    # vertices, so extending members level by level reaches all of them.
    levels: dict[int, list[FinStructure]] = {0: [FinStructure(signature, 0)]}

    def gen(n: int) -> Iterator[FinStructure]:
        for s in range(max(levels) + 1, n + 1):
            orbits = _new_orbits(signature, s)
            levels[s] = [
                T
                for S in levels[s - 1]
                for mask in range(1 << len(orbits))
                if membership(T := _extend(S, orbits, mask))
            ]
        return iter(levels[n])

    return gen


def has_girth_above_4(G: FinStructure) -> bool:
    """No triangle and no 4-cycle in the symmetric relation ``R``."""
    nb = [set() for _ in range(G.size)]
    for a, b in G.table("R"):
        nb[a].add(b)
    for u, v in itertools.combinations(range(G.size), 2):
        common = len(nb[u] & nb[v])
        if common >= 2 or (common and v in nb[u]):
            return False
    return True


def ordered_graphs(size_cap: int = 6) -> FiniteClass:
    sig = ORDERED_GRAPH
    return FiniteClass(
        "ordered-graphs", sig, lambda S: True,
        _hereditary_generator(sig, lambda S: True), size_cap, hereditary=True,
    )


def girth5_ordered(size_cap: int = 7) -> FiniteClass:
    sig = ORDERED_GRAPH
    return FiniteClass(
        "girth5-ordered", sig, has_girth_above_4,
        _hereditary_generator(sig, has_girth_above_4), size_cap, hereditary=True,
    )


def linear_orders(size_cap: int = 12) -> FiniteClass:
    sig = LINEAR_ORDER
    return FiniteClass(
        "linear-orders", sig, lambda S: True,
        lambda n: iter([FinStructure(sig, n)]), size_cap, hereditary=True,
    )


def ordered_hypergraphs(signature: Signature, size_cap: int = 5) -> FiniteClass:
    """All finite ordered structures whose other relations are symmetric and
    antireflexive."""
    for sym in signature.proper:
        if not (sym.symmetric and sym.antireflexive):
            raise ValueError(f"relation {sym.name} must be flagged symmetric antireflexive")
    return FiniteClass(
        "ordered-hypergraphs", signature, lambda S: True,
        _hereditary_generator(signature, lambda S: True), size_cap, hereditary=True,
    )


def from_predicate(
    name: str,
    signature: Signature,
    predicate: Callable[[FinStructure], bool],
    *,
    hereditary: bool = False,
    size_cap: int = 5,
) -> FiniteClass:
    """User class.  ``hereditary=True`` is a promise the checks rely on."""
    if hereditary:
        gen = _hereditary_generator(signature, predicate)
    else:
        def gen(n):
            return (S for S in _all_structures(signature, n) if predicate(S))
    return FiniteClass(name, signature, predicate, gen, size_cap, hereditary)


def forbidden_class(
    name: str, signature: Signature, forbidden: Sequence[FinStructure], size_cap: int = 5
) -> FiniteClass:
    """Structures omitting every listed structure as an induced substructure."""
    forbidden = tuple(forbidden)

    def member(S):
        return not any(next(iter_embeddings(F, S), None) is not None for F in forbidden)

    return from_predicate(name, signature, member, hereditary=True, size_cap=size_cap)


# -- ages and heredity --------------------------------------------------------

def _dedup(structs: Iterable[FinStructure]) -> list[FinStructure]:
    out: list[FinStructure] = []
    keys = set()
    for S in structs:
        if S.ordered:
            if S.key() in keys:
                continue
            keys.add(S.key())
        elif any(isomorphic(S, T)[0] for T in out):
            continue
        out.append(S)
    return out


def age_up_to(M: FinStructure, n: int) -> list[FinStructure]:
    """Induced substructures of ``M`` of sizes ``1..n`` up to isomorphism."""
    if n > M.size:
        raise ValueError(f"bound {n} exceeds structure size {M.size}")
    subs = (
        induced_substructure(M, S)
        for s in range(1, n + 1)
        for S in itertools.combinations(range(M.size), s)
    )
    return _dedup(subs)


def _check_bound(K: FiniteClass, n: int) -> None:
    if n > K.size_cap:
        raise ValueError(f"bound {n} exceeds the class size cap {K.size_cap}")


def hereditary_check(K: FiniteClass, n: int) -> Verdict:
    _check_bound(K, n)
    for S in K.members_up_to(n):
        for s in range(1, S.size):
            for sub in itertools.combinations(range(S.size), s):
                if induced_substructure(S, sub) not in K:
                    return Verdict.fail((S, sub), f"substructure on {sub} leaves the class")
    return Verdict.ok(note=f"all substructures of members of size <= {n} are members")


# -- amalgamation -------------------------------------------------------------

@dataclass(frozen=True)
class AmalgamationBase:
    A: FinStructure
    B1: FinStructure
    B2: FinStructure
    f1: Embedding
    f2: Embedding

    def __post_init__(self):
        if not (self.f1.verify() and self.f2.verify()):
            raise ValueError("amalgamation base maps must be embeddings")


@dataclass(frozen=True)
class Amalgam:
    C: FinStructure
    g1: Embedding
    g2: Embedding

    def verify(self, base: AmalgamationBase, strong: bool = False) -> bool:
        if not (self.g1.verify() and self.g2.verify()):
            return False
        left = self.g1.compose(base.f1).map
        right = self.g2.compose(base.f2).map
        if left != right:
            return False
        if strong:
            return set(self.g1.map) & set(self.g2.map) == set(left)
        return True


def _identifications(free2, targets1, strong) -> Iterator[dict[int, int]]:
    """Partial injections from the free points of B2 into those of B1,
    the empty one first, then by increasing size."""
    yield {}
    if strong:
        return
    for r in range(1, min(len(free2), len(targets1)) + 1):
        for dom in itertools.combinations(free2, r):
            for img in itertools.permutations(targets1, r):
                yield dict(zip(dom, img))


def _placements(B2size, pinned: dict[int, int], n1: int, ordered: bool) -> Iterator[dict[int, float]]:
    """Positions for the unpinned points of B2 among the ``n1`` points of B1.

    A point placed in slot ``s`` sits right after the first ``s`` points of
    B1.  Slots are non-decreasing along B2 and respect pinned points; the
    latest slots are tried first.
    """
    loose = [x for x in range(B2size) if x not in pinned]
    if not ordered:
        yield {x: n1 for x in loose}
        return
    bounds = []
    for x in loose:
        lo = max((pinned[p] + 1 for p in pinned if p < x), default=0)
        hi = min((pinned[p] for p in pinned if p > x), default=n1)
        bounds.append((lo, hi))
    for x in pinned:  # pinned points must already be increasing
        for y in pinned:
            if x < y and pinned[x] >= pinned[y]:
                return
    slots = [0] * len(loose)

    def rec(i, floor):
        if i == len(loose):
            yield dict(zip(loose, slots))
            return
        lo, hi = bounds[i]
        for s in range(max(lo, floor), hi + 1)[::-1]:
            slots[i] = s
            yield from rec(i + 1, s)

    yield from rec(0, 0)


def _cross_orbits(sig: Signature, N: int, side1: set, side2: set) -> list[list[tuple]]:
    orbits = []
    seen = set()
    for sym in sig.proper:
        for t in itertools.product(range(N), repeat=sym.arity):
            if t in seen or side1.issuperset(t) or side2.issuperset(t):
                continue
            if sym.antireflexive and len(set(t)) < len(t):
                continue
            group = sorted(set(itertools.permutations(t))) if sym.symmetric else [t]
            seen.update(group)
            orbits.append((sym.name, group))
    return orbits


def _candidates(base: AmalgamationBase, strong: bool) -> Iterator[Amalgam]:
    B1, B2, f1, f2 = base.B1, base.B2, base.f1, base.f2
    sig = B1.signature
    ordered = sig.order is not None
    n1 = B1.size
    a_img2 = {f2.map[i]: f1.map[i] for i in range(base.A.size)}
    free2 = [x for x in range(B2.size) if x not in a_img2]
    free1 = [y for y in range(n1) if y not in set(f1.map)]
    for ident in _identifications(free2, free1, strong):
        pinned = {**a_img2, **ident}
        for place in _placements(B2.size, pinned, n1, ordered):
            # lay out: B1 points and loose B2 points sorted by (slot, side, index)
            tokens = [((y, 1, y), ("1", y)) for y in range(n1)]
            tokens += [((place[x], 0, x), ("2", x)) for x in place]
            tokens.sort()
            pos1 = [0] * n1
            pos2 = [0] * B2.size
            for p, (_, (side, v)) in enumerate(tokens):
                if side == "1":
                    pos1[v] = p
                else:
                    pos2[v] = p
            for x, y in pinned.items():
                pos2[x] = pos1[y]
            N = len(tokens)
            tables: dict[str, set] = {}
            clash = False
            for sym in sig.proper:
                rows = {tuple(pos1[v] for v in t) for t in B1.table(sym.name)}
                rows2 = {tuple(pos2[v] for v in t) for t in B2.table(sym.name)}
                # B1 and B2 must agree on tuples inside the overlap
                overlap = set(pos1) & set(pos2)
                for t in rows ^ rows2:
                    if overlap.issuperset(t):
                        clash = True
                        break
                rows |= rows2
                tables[sym.name] = rows
            if clash:
                continue
            cross = _cross_orbits(sig, N, set(pos1), set(pos2))
            for r in range(len(cross) + 1):
                for chosen in itertools.combinations(range(len(cross)), r):
                    t2 = {k: set(v) for k, v in tables.items()}
                    for b in chosen:
                        name, group = cross[b]
                        t2[name].update(group)
                    C = FinStructure._trusted(sig, N, {k: frozenset(v) for k, v in t2.items()})
                    yield Amalgam(C, Embedding(B1, C, tuple(pos1)), Embedding(B2, C, tuple(pos2)))


def find_amalgam(K: FiniteClass, base: AmalgamationBase, strong: bool = False) -> Amalgam | None:
    """First member of ``K`` amalgamating ``base`` on the union of the images."""
    for am in _candidates(base, strong):
        if am.C in K and am.verify(base, strong):
            return am
    return None


def amalgamation_bases(K: FiniteClass, n: int) -> Iterator[AmalgamationBase]:
    """Bases with nonempty ``A`` and parts of size ``<= n``, ordered by
    ``(|A|, A, B1, f1, B2, f2)`` with the ``(B, f)`` pairs unordered."""
    for a in range(1, n + 1):
        for A in K.members(a):
            sides = [
                (B, Embedding(A, B, f))
                for b in range(a, n + 1)
                for B in K.members(b)
                for f in iter_embeddings(A, B)
            ]
            for i, (B1, f1) in enumerate(sides):
                for B2, f2 in sides[i:]:
                    yield AmalgamationBase(A, B1, B2, f1, f2)


def _amalgamation(K: FiniteClass, n: int, strong: bool) -> Verdict:
    _check_bound(K, n)
    count = 0
    for base in amalgamation_bases(K, n):
        count += 1
        if find_amalgam(K, base, strong) is None:
            if K.hereditary:
                return Verdict.fail(base, f"no amalgam for base #{count}")
            return Verdict.unknown(
                f"no amalgam on the union of images for base #{count}; the class is "
                "not known to be hereditary, so larger amalgams were not ruled out",
                certificate=base,
            )
    return Verdict.ok(note=f"{count} bases amalgamated")


def ap_check(K: FiniteClass, n: int) -> Verdict:
    return _amalgamation(K, n, strong=False)


def strong_ap_check(K: FiniteClass, n: int) -> Verdict:
    return _amalgamation(K, n, strong=True)


def jep_check(K: FiniteClass, n: int) -> Verdict:
    """Every pair of members of size ``<= n`` embeds into a common member.

    Certificates on success map each pair to its witness.  A pair where one
    side embeds in the other is witnessed by the larger one; otherwise
    amalgams over the empty structure are searched.
    """
    _check_bound(K, n)
    members = list(K.members_up_to(n))
    empty = FinStructure(K.signature, 0)
    witnesses = {}
    for i, A in enumerate(members):
        for B in members[i:]:
            if (f := next(iter_embeddings(B, A), None)) is not None:
                witnesses[(A, B)] = (A, tuple(range(A.size)), f)
                continue
            if (f := next(iter_embeddings(A, B), None)) is not None:
                witnesses[(A, B)] = (B, f, tuple(range(B.size)))
                continue
            base = AmalgamationBase(empty, A, B, Embedding(empty, A, ()), Embedding(empty, B, ()))
            am = find_amalgam(K, base)
            if am is None:
                if K.hereditary:
                    return Verdict.fail((A, B), "no member embeds both")
                return Verdict.unknown("no joint embedding on the union", certificate=(A, B))
            witnesses[(A, B)] = (am.C, am.g1.map, am.g2.map)
    return Verdict.ok(witnesses, f"{len(witnesses)} pairs jointly embedded")


# -- hypergraph structures ----------------------------------------------------

def hypergraph_check(A: FinStructure) -> Verdict:
    """Every non-order relation is symmetric and antireflexive."""
    problems = []
    for sym in A.signature.proper:
        rows = A.table(sym.name)
        for t in sorted(rows):
            if len(set(t)) < len(t):
                problems.append(("antireflexivity", sym.name, t))
            for p in sorted(set(itertools.permutations(t))):
                if p not in rows:
                    problems.append(("symmetry", sym.name, t))
                    break
    if problems:
        return Verdict.fail(problems, f"{len(problems)} violating tuples")
    return Verdict.ok()
