"""Complete quantifier-free types of tuples.

A type of arity ``m`` decides every atomic formula in ``x1..xm``: the
equalities ``xi = xj`` (``i < j``) followed by each relation of the
signature in declaration order, with argument tuples in lexicographic order
over ``range(m)``.  The decisions are packed into one integer word, so type
equality is word equality.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Sequence

from .structures import FinStructure, Signature, StructureError

__all__ = [
    "QfType",
    "TypeCatalog",
    "qftype_of",
    "type_catalog",
    "diagram_type",
    "realize_type",
    "increasing_tuples",
]


@lru_cache(maxsize=None)
def _layout(signature: Signature, m: int):
    """Atom list and index lookup for arity ``m``."""
    atoms: list[tuple[str | None, tuple[int, ...]]] = []
    for pair in itertools.combinations(range(m), 2):
        atoms.append((None, pair))
    for sym in signature.relations:
        for t in itertools.product(range(m), repeat=sym.arity):
            atoms.append((sym.name, t))
    index = {a: i for i, a in enumerate(atoms)}
    return tuple(atoms), index


@dataclass(frozen=True)
class QfType:
    signature: Signature
    arity: int
    word: int

    # -- construction --------------------------------------------------------
    @classmethod
    def from_atoms(
        cls,
        signature: Signature,
        arity: int,
        true_atoms: Iterable[tuple[str | None, Sequence[int]]],
    ) -> "QfType":
        """Build from the set of atoms that hold; ``None`` names equality.

        Indices are 0-based variable positions.
        """
        _, index = _layout(signature, arity)
        word = 0
        for name, t in true_atoms:
            t = tuple(t)
            if name is None:
                t = tuple(sorted(t))
                if t[0] == t[1]:
                    continue
            word |= 1 << index[(name, t)]
        return cls(signature, arity, word)

    # -- queries -------------------------------------------------------------
    def _bit(self, name, t) -> bool:
        _, index = _layout(self.signature, self.arity)
        return bool(self.word >> index[(name, tuple(t))] & 1)

    def equal(self, i: int, j: int) -> bool:
        if i == j:
            return True
        return self._bit(None, (min(i, j), max(i, j)))

    def holds(self, name: str, t: Sequence[int]) -> bool:
        return self._bit(name, t)

    def atoms(self) -> Iterator:
        atoms, _ = _layout(self.signature, self.arity)
        for i, (name, t) in enumerate(atoms):
            yield name, t, bool(self.word >> i & 1)

    def true_atoms(self) -> list[tuple[str | None, tuple[int, ...]]]:
        return [(name, t) for name, t, v in self.atoms() if v]

    @property
    def distinct(self) -> bool:
        return not any(
            self.equal(i, j) for i, j in itertools.combinations(range(self.arity), 2)
        )

    @property
    def increasing(self) -> bool:
        order = self.signature.order
        if order is None:
            return self.distinct
        return self.distinct and all(
            self.holds(order, (i, i + 1)) for i in range(self.arity - 1)
        )

    def restrict(self, positions: Sequence[int]) -> "QfType":
        """Type of the sub-tuple picking ``positions`` (in that order)."""
        positions = tuple(positions)
        k = len(positions)
        true = []
        for i, j in itertools.combinations(range(k), 2):
            if self.equal(positions[i], positions[j]):
                true.append((None, (i, j)))
        for sym in self.signature.relations:
            for t in itertools.product(range(k), repeat=sym.arity):
                if self.holds(sym.name, tuple(positions[v] for v in t)):
                    true.append((sym.name, t))
        return QfType.from_atoms(self.signature, k, true)

    def reduct(self, names: Iterable[str]) -> "QfType":
        sub = self.signature.restrict(names)
        true = [(n, t) for n, t in self.true_atoms() if n is None or sub.get(n)]
        return QfType.from_atoms(sub, self.arity, true)

    def r_bits(self, name: str = "R") -> tuple[int, ...]:
        """Truth of ``name`` on increasing pairs, pair-lexicographic."""
        return tuple(
            int(self.holds(name, p)) for p in itertools.combinations(range(self.arity), 2)
        )

    def is_consistent(self) -> bool:
        """Equality is an equivalence, atoms respect it, and the order is a
        strict linear order on the distinct variables."""
        m = self.arity
        for i, j, k in itertools.permutations(range(m), 3):
            if self.equal(i, j) and self.equal(j, k) and not self.equal(i, k):
                return False
        for sym in self.signature.relations:
            for t in itertools.product(range(m), repeat=sym.arity):
                for u in itertools.product(range(m), repeat=sym.arity):
                    if all(self.equal(a, b) for a, b in zip(t, u)):
                        if self.holds(sym.name, t) != self.holds(sym.name, u):
                            return False
        order = self.signature.order
        if order is not None:
            for i in range(m):
                if self.holds(order, (i, i)):
                    return False
            for i, j in itertools.permutations(range(m), 2):
                if self.equal(i, j):
                    continue
                if self.holds(order, (i, j)) == self.holds(order, (j, i)):
                    return False
            for i, j, k in itertools.permutations(range(m), 3):
                if self.holds(order, (i, j)) and self.holds(order, (j, k)):
                    if not self.holds(order, (i, k)):
                        return False
        return True

    def describe(self) -> str:
        parts = []
        for name, t, v in self.atoms():
            args = ",".join(f"x{i + 1}" for i in t)
            if name is None:
                parts.append(f"x{t[0] + 1}{'=' if v else '!='}x{t[1] + 1}")
            elif v and name == self.signature.order:
                parts.append(f"x{t[0] + 1}<x{t[1] + 1}")
            elif v:
                parts.append(f"{name}({args})")
        return "{" + ", ".join(parts) + "}"

    def __repr__(self):
        return f"QfType(arity={self.arity}, {self.describe()})"


def qftype_of(tup: Sequence[int], S: FinStructure) -> QfType:
    """Complete quantifier-free type of ``tup`` in ``S`` (repeats allowed)."""
    tup = tuple(tup)
    for v in tup:
        if not 0 <= v < S.size:
            raise StructureError(f"element {v} out of range for size {S.size}")
    sig = S.signature
    m = len(tup)
    atoms, _ = _layout(sig, m)
    order = sig.order
    word = 0
    bit = 1
    for name, t in atoms:
        if name is None:
            v = tup[t[0]] == tup[t[1]]
        elif name == order:
            v = tup[t[0]] < tup[t[1]]
        else:
            v = S.holds(name, tuple(tup[i] for i in t))
        if v:
            word |= bit
        bit <<= 1
    return QfType(sig, m, word)


def increasing_tuples(S: FinStructure, m: int) -> Iterator[tuple[int, ...]]:
    return itertools.combinations(range(S.size), m)


@dataclass(frozen=True)
class TypeCatalog:
    source: FinStructure
    arity: int
    entries: frozenset

    def __contains__(self, t: QfType) -> bool:
        return t in self.entries

    def __len__(self):
        return len(self.entries)

    def __iter__(self):
        return iter(sorted(self.entries, key=lambda t: t.word))


def type_catalog(I: FinStructure, m: int) -> TypeCatalog:
    """Types realized in ``I`` by increasing tuples of distinct elements."""
    if m < 1:
        raise ValueError("catalog arity must be >= 1")
    entries = frozenset(qftype_of(t, I) for t in increasing_tuples(I, m))
    return TypeCatalog(I, m, entries)


def diagram_type(C: FinStructure) -> QfType:
    if not C.ordered:
        raise StructureError("diagram_type requires an ordered structure")
    return qftype_of(range(C.size), C)


def realize_type(t: QfType, S: FinStructure) -> tuple[int, ...] | None:
    """Lexicographically least tuple of ``S`` realizing ``t``, or ``None``."""
    if t.signature != S.signature:
        raise StructureError("type and structure have different signatures")
    m = t.arity
    order = t.signature.order
    tup: list[int] = []

    def consistent(k: int) -> bool:
        # atoms whose variables lie in 0..k and mention k
        w = tup[k]
        for i in range(k):
            if (tup[i] == w) != t.equal(i, k):
                return False
        for sym in t.signature.relations:
            for idx in itertools.product(range(k + 1), repeat=sym.arity):
                if k not in idx:
                    continue
                vals = tuple(tup[i] for i in idx)
                if sym.name == order:
                    real = vals[0] < vals[1]
                else:
                    real = S.holds(sym.name, vals)
                if real != t.holds(sym.name, idx):
                    return False
        return True

    def rec(k: int) -> bool:
        if k == m:
            return True
        for w in range(S.size):
            tup.append(w)
            if consistent(k) and rec(k + 1):
                return True
            tup.pop()
        return False

    return tuple(tup) if rec(0) else None
