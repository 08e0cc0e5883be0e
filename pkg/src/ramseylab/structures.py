"""Finite relational signatures and structures.

Domains are always ``0..n-1``.  When the signature designates an order
symbol, structures are relabeled on construction so that the order is
``0 < 1 < ... < n-1``; the order table is then implicit and never stored.
"""
from __future__ import annotations

import contextlib
import itertools
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Sequence

__all__ = [
    "RelationSymbol",
    "Signature",
    "FinStructure",
    "Embedding",
    "Copy",
    "StructureError",
    "SignatureMismatch",
    "SizeCapExceeded",
    "size_cap",
    "get_size_cap",
    "induced_substructure",
    "enumerate_embeddings",
    "iter_embeddings",
    "first_embedding",
    "enumerate_copies",
    "isomorphic",
    "ordered_sum",
    "automorphisms",
    "is_embedding",
    "ORDERED_GRAPH",
    "LINEAR_ORDER",
    "ordered_graph",
    "linear_order",
    "reduct",
]


class StructureError(ValueError):
    """A structure violates its signature's declared invariants."""


class SignatureMismatch(StructureError):
    pass


class SizeCapExceeded(StructureError):
    pass


_SIZE_CAP = [64]


def get_size_cap() -> int:
    return _SIZE_CAP[-1]


@contextlib.contextmanager
def size_cap(n: int):
    """Temporarily change the vertex cap enforced by exhaustive operations."""
    _SIZE_CAP.append(n)
    try:
        yield n
    finally:
        _SIZE_CAP.pop()


def _guard(*structures: "FinStructure") -> None:
    cap = get_size_cap()
    for s in structures:
        if s.size > cap:
            raise SizeCapExceeded(
                f"structure with {s.size} vertices exceeds size cap {cap}"
            )


@dataclass(frozen=True)
class RelationSymbol:
    name: str
    arity: int
    symmetric: bool = False
    antireflexive: bool = False

    def __post_init__(self):
        if self.arity < 1:
            raise ValueError(f"relation {self.name!r} must have arity >= 1")
        if not self.name or any(c.isspace() or c in ",:;()" for c in self.name):
            raise ValueError(f"bad relation name {self.name!r}")


@dataclass(frozen=True)
class Signature:
    relations: tuple[RelationSymbol, ...]
    order: str | None = None

    def __post_init__(self):
        names = [r.name for r in self.relations]
        if len(set(names)) != len(names):
            raise ValueError(f"duplicate relation names in {names}")
        if self.order is not None:
            sym = self.get(self.order)
            if sym is None or sym.arity != 2:
                raise ValueError(f"order symbol {self.order!r} must name a binary relation")

    def get(self, name: str) -> RelationSymbol | None:
        for r in self.relations:
            if r.name == name:
                return r
        return None

    def __getitem__(self, name: str) -> RelationSymbol:
        r = self.get(name)
        if r is None:
            raise KeyError(name)
        return r

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(r.name for r in self.relations)

    @property
    def ordered(self) -> bool:
        return self.order is not None

    @property
    def proper(self) -> tuple[RelationSymbol, ...]:
        """The relations other than the order."""
        return tuple(r for r in self.relations if r.name != self.order)

    def restrict(self, names: Iterable[str]) -> "Signature":
        keep = set(names)
        unknown = keep - set(self.names)
        if unknown:
            raise KeyError(f"unknown relations {sorted(unknown)}")
        rels = tuple(r for r in self.relations if r.name in keep)
        order = self.order if self.order in keep else None
        return Signature(rels, order)


ORDERED_GRAPH = Signature(
    (RelationSymbol("<", 2), RelationSymbol("R", 2, symmetric=True, antireflexive=True)),
    order="<",
)
LINEAR_ORDER = Signature((RelationSymbol("<", 2),), order="<")


def _orbit(tup: tuple[int, ...]) -> set[tuple[int, ...]]:
    return set(itertools.permutations(tup))


class FinStructure:
    """An immutable finite relational structure on ``0..size-1``.

    ``tables`` maps relation names to tuple collections.  For an ordered
    signature the order table may be omitted (natural order is assumed); if
    given it must be a strict linear order and the structure is relabeled so
    that it becomes the natural order.  Symmetric relations are closed under
    permutation; antireflexivity violations are rejected.
    """

    __slots__ = ("signature", "size", "_tables", "_key", "_hash")

    def __init__(
        self,
        signature: Signature,
        size: int,
        tables: Mapping[str, Iterable[Sequence[int]]] | None = None,
    ):
        if size < 0:
            raise StructureError("size must be a natural number")
        tables = dict(tables or {})
        unknown = set(tables) - set(signature.names)
        if unknown:
            raise StructureError(f"tables for undeclared relations {sorted(unknown)}")
        raw: dict[str, set[tuple[int, ...]]] = {}
        for sym in signature.relations:
            rows = set()
            for t in tables.get(sym.name, ()):
                t = tuple(int(v) for v in t)
                if len(t) != sym.arity:
                    raise StructureError(
                        f"tuple {t} has wrong length for {sym.name}/{sym.arity}"
                    )
                for v in t:
                    if not 0 <= v < size:
                        raise StructureError(f"vertex {v} of {sym.name}{t} out of range")
                rows.add(t)
            raw[sym.name] = rows

        relabel = None
        if signature.order is not None:
            if signature.order in tables:
                relabel = _order_ranks(raw[signature.order], size)
            del raw[signature.order]

        final: dict[str, frozenset] = {}
        for sym in signature.proper:
            rows = raw[sym.name]
            if relabel is not None:
                rows = {tuple(relabel[v] for v in t) for t in rows}
            if sym.antireflexive:
                for t in sorted(rows):
                    if len(set(t)) < len(t):
                        raise StructureError(
                            f"{sym.name}{t} violates antireflexivity"
                        )
            if sym.symmetric:
                closed = set()
                for t in rows:
                    closed |= _orbit(t)
                rows = closed
            final[sym.name] = frozenset(rows)
        self._init(signature, size, final)

    def _init(self, signature, size, tables):
        object.__setattr__(self, "signature", signature)
        object.__setattr__(self, "size", size)
        object.__setattr__(self, "_tables", tables)
        object.__setattr__(self, "_key", None)
        object.__setattr__(self, "_hash", None)

    @classmethod
    def _trusted(cls, signature: Signature, size: int, tables: dict[str, frozenset]):
        # Caller guarantees canonical order and closed, validated tables.
        obj = cls.__new__(cls)
        obj._init(signature, size, tables)
        return obj

    def __setattr__(self, name, value):
        raise AttributeError("FinStructure is immutable")

    # -- access ---------------------------------------------------------------
    @property
    def ordered(self) -> bool:
        return self.signature.order is not None

    @property
    def domain(self) -> range:
        return range(self.size)

    def table(self, name: str) -> frozenset:
        if name == self.signature.order:
            return frozenset(itertools.combinations(range(self.size), 2))
        return self._tables[name]

    @property
    def tables(self) -> dict[str, frozenset]:
        """All non-order relation tables."""
        return dict(self._tables)

    def holds(self, name: str, tup: Sequence[int]) -> bool:
        if name == self.signature.order:
            return tup[0] < tup[1]
        return tuple(tup) in self._tables[name]

    def key(self) -> tuple:
        """Canonical identity; for ordered structures equal keys iff isomorphic."""
        if self._key is None:
            k = (self.signature, self.size) + tuple(
                tuple(sorted(self._tables[r.name])) for r in self.signature.proper
            )
            object.__setattr__(self, "_key", k)
        return self._key

    def __eq__(self, other):
        if not isinstance(other, FinStructure):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self):
        if self._hash is None:
            object.__setattr__(self, "_hash", hash(self.key()))
        return self._hash

    def __len__(self):
        return self.size

    def __repr__(self):
        parts = []
        for sym in self.signature.proper:
            rows = sorted(self._tables[sym.name])
            if sym.symmetric:
                rows = [t for t in rows if list(t) == sorted(t)]
            parts.append(f"{sym.name}={rows}")
        return f"FinStructure({', '.join([f'n={self.size}'] + parts)})"

    def edges(self, name: str = "R") -> list[tuple[int, int]]:
        """Increasing pairs of a symmetric binary relation."""
        return sorted(t for t in self._tables[name] if t[0] < t[1])


def _order_ranks(order_rows: set[tuple[int, ...]], size: int) -> list[int]:
    for a, b in order_rows:
        if a == b:
            raise StructureError(f"order is not irreflexive at ({a},{b})")
        if (b, a) in order_rows:
            raise StructureError(f"order is not a strict order: ({a},{b}) and ({b},{a})")
    for a, b in itertools.combinations(range(size), 2):
        if (a, b) not in order_rows and (b, a) not in order_rows:
            raise StructureError(f"order is not total: {a} and {b} incomparable")
    below = [0] * size
    for a, b in order_rows:
        below[b] += 1
    if sorted(below) != list(range(size)):
        raise StructureError("order is not transitive")
    for a, b in order_rows:
        for c in range(size):
            if (b, c) in order_rows and (a, c) not in order_rows:
                raise StructureError(f"order is not transitive at ({a},{b},{c})")
    return below


# -- builders ---------------------------------------------------------------

def ordered_graph(n: int, edges: Iterable[tuple[int, int]] = ()) -> FinStructure:
    """Ordered graph on ``0<1<...<n-1`` with the given undirected edges."""
    return FinStructure(ORDERED_GRAPH, n, {"R": list(edges)})


def linear_order(n: int) -> FinStructure:
    return FinStructure(LINEAR_ORDER, n)


# -- embeddings ---------------------------------------------------------------

@dataclass(frozen=True)
class Embedding:
    source: FinStructure = field(repr=False)
    target: FinStructure = field(repr=False)
    map: tuple[int, ...]

    def __call__(self, v: int) -> int:
        return self.map[v]

    def image(self) -> tuple[int, ...]:
        return tuple(sorted(self.map))

    def compose(self, inner: "Embedding") -> "Embedding":
        """``self ∘ inner``: inner maps into ``self.source``."""
        return Embedding(inner.source, self.target, tuple(self.map[v] for v in inner.map))

    def verify(self) -> bool:
        return is_embedding(self.source, self.target, self.map)


@dataclass(frozen=True)
class Copy:
    """An A-substructure of C: the class of embeddings with a fixed image."""

    vertex_set: tuple[int, ...]
    rep: Embedding


def _check_sig(A: FinStructure, C: FinStructure) -> None:
    if A.signature != C.signature:
        raise SignatureMismatch("structures have different signatures")


def is_embedding(A: FinStructure, C: FinStructure, mapping: Sequence[int]) -> bool:
    """Whether ``mapping`` is an injective strong embedding ``A -> C``."""
    if len(mapping) != A.size or len(set(mapping)) != A.size:
        return False
    if any(not 0 <= w < C.size for w in mapping):
        return False
    sig = A.signature
    if sig.order is not None:
        if any(mapping[i] >= mapping[i + 1] for i in range(A.size - 1)):
            return False
    for sym in sig.proper:
        src = A.table(sym.name)
        tgt = C.table(sym.name)
        for t in itertools.product(range(A.size), repeat=sym.arity):
            if (t in src) != (tuple(mapping[v] for v in t) in tgt):
                return False
    return True


def iter_embeddings(
    A: FinStructure, C: FinStructure, within: Iterable[int] | None = None
) -> Iterator[tuple[int, ...]]:
    """Yield all strong embeddings ``A -> C`` as maps, lexicographically.

    ``within`` restricts images to a subset of ``C``'s domain.
    """
    _check_sig(A, C)
    _guard(A, C)
    n, m = A.size, C.size
    allowed = (1 << m) - 1
    if within is not None:
        allowed = 0
        for v in within:
            allowed |= 1 << v
    if n > bin(allowed).count("1"):
        return
    ordered = A.signature.order is not None
    if all(sym.arity == 2 for sym in A.signature.proper):
        yield from _binary_embeddings(A, C, ordered, allowed)
        return
    rels = [(sym.arity, A.table(sym.name), C.table(sym.name)) for sym in A.signature.proper]
    img = [0] * n
    used = [False] * m

    def ok(v: int) -> bool:
        # every tuple over 0..v that mentions v
        for arity, src, tgt in rels:
            if arity == 1:
                if ((v,) in src) != ((img[v],) in tgt):
                    return False
                continue
            if arity == 2:
                w = img[v]
                for u in range(v + 1):
                    x = img[u]
                    if ((u, v) in src) != ((x, w) in tgt):
                        return False
                    if u != v and ((v, u) in src) != ((w, x) in tgt):
                        return False
                continue
            for t in itertools.product(range(v + 1), repeat=arity):
                if v not in t:
                    continue
                if (t in src) != (tuple(img[u] for u in t) in tgt):
                    return False
        return True

    def rec(v: int):
        if v == n:
            yield tuple(img)
            return
        lo = img[v - 1] + 1 if (ordered and v > 0) else 0
        hi = m - (n - v - 1) if ordered else m
        for w in range(lo, hi):
            if used[w] or not allowed >> w & 1:
                continue
            img[v] = w
            if ok(v):
                used[w] = True
                yield from rec(v + 1)
                used[w] = False

    yield from rec(0)


def _binary_embeddings(A: FinStructure, C: FinStructure, ordered: bool, allowed: int):
    # Candidate sets as int bitsets: each placed vertex u cuts the candidates
    # for v down to the targets whose relation pattern with img[u] matches.
    n, m = A.size, C.size
    full = (1 << m) - 1
    start = allowed
    rels = []
    for sym in A.signature.proper:
        out = [0] * m
        inn = [0] * m
        loops = 0
        for a, b in C.table(sym.name):
            out[a] |= 1 << b
            inn[b] |= 1 << a
            if a == b:
                loops |= 1 << a
        rels.append((A.table(sym.name), out, inn, loops))
    img = [0] * n

    def cands(v: int, used: int) -> int:
        mask = start & ~used
        if ordered and v > 0:
            mask &= full ^ ((2 << img[v - 1]) - 1)
        for src, out, inn, loops in rels:
            mask &= loops if (v, v) in src else ~loops
            for u in range(v):
                x = img[u]
                mask &= out[x] if (u, v) in src else ~out[x]
                mask &= inn[x] if (v, u) in src else ~inn[x]
            if not mask:
                return 0
        return mask

    def rec(v: int, used: int):
        if v == n:
            yield tuple(img)
            return
        mask = cands(v, used)
        while mask:
            low = mask & -mask
            img[v] = low.bit_length() - 1
            yield from rec(v + 1, used | low)
            mask ^= low

    yield from rec(0, 0)


def enumerate_embeddings(A: FinStructure, C: FinStructure) -> list[Embedding]:
    return [Embedding(A, C, f) for f in iter_embeddings(A, C)]


def first_embedding(
    A: FinStructure, C: FinStructure, within: Iterable[int] | None = None
) -> Embedding | None:
    for f in iter_embeddings(A, C, within):
        return Embedding(A, C, f)
    return None


def enumerate_copies(A: FinStructure, C: FinStructure) -> list[Copy]:
    """One copy per image set, ordered by vertex set; rep is the least map."""
    seen: dict[tuple[int, ...], tuple[int, ...]] = {}
    for f in iter_embeddings(A, C):
        s = tuple(sorted(f))
        if s not in seen:
            seen[s] = f
    return [Copy(s, Embedding(A, C, seen[s])) for s in sorted(seen)]


def induced_substructure(C: FinStructure, S: Iterable[int]) -> FinStructure:
    """Restriction of ``C`` to ``S``, renumbered in increasing vertex order."""
    verts = sorted(set(S))
    for v in verts:
        if not 0 <= v < C.size:
            raise StructureError(f"vertex {v} out of range for size {C.size}")
    pos = {v: i for i, v in enumerate(verts)}
    keep = set(verts)
    tables = {}
    for sym in C.signature.proper:
        tables[sym.name] = frozenset(
            tuple(pos[v] for v in t) for t in C.table(sym.name) if keep.issuperset(t)
        )
    return FinStructure._trusted(C.signature, len(verts), tables)


def reduct(S: FinStructure, names: Iterable[str]) -> FinStructure:
    """Forget every relation not in ``names`` (the order too, if omitted)."""
    sig = S.signature.restrict(names)
    return FinStructure._trusted(sig, S.size, {r.name: S.table(r.name) for r in sig.proper})


def isomorphic(A: FinStructure, B: FinStructure) -> tuple[bool, tuple[int, ...] | None]:
    """Return ``(True, witness)`` if a strong bijective embedding exists."""
    if A.signature != B.signature or A.size != B.size:
        return False, None
    if A.ordered:
        if A.key() == B.key():
            return True, tuple(range(A.size))
        return False, None
    for f in iter_embeddings(A, B):
        return True, f
    return False, None


def ordered_sum(parts: Sequence[FinStructure]) -> FinStructure:
    """Disjoint union with the order concatenating parts left to right."""
    if not parts:
        raise StructureError("ordered_sum needs at least one part")
    sig = parts[0].signature
    if sig.order is None:
        raise StructureError("ordered_sum requires ordered structures")
    for p in parts:
        if p.signature != sig:
            raise SignatureMismatch("parts have different signatures")
    tables = {sym.name: set() for sym in sig.proper}
    offset = 0
    for p in parts:
        for sym in sig.proper:
            tables[sym.name].update(tuple(v + offset for v in t) for t in p.table(sym.name))
        offset += p.size
    return FinStructure._trusted(sig, offset, {k: frozenset(v) for k, v in tables.items()})


def automorphisms(A: FinStructure) -> list[tuple[int, ...]]:
    if A.ordered:
        return [tuple(range(A.size))]
    return list(iter_embeddings(A, A))
