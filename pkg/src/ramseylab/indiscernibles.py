"""Indexed families, generalized indiscernibility, and extraction.

An :class:`IndexedFamily` sends each element ``i`` of an index structure to
a tuple ``a_i`` of a target structure.  A formula of arity ``m`` in a
:class:`FormulaSet` is evaluated on ``m`` index slots: its free variables
``x1..x(m*l)`` are the concatenated image tuples, ``l`` being the common
image length.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .formulas import FormulaSet
from .qftypes import QfType, qftype_of, type_catalog
from .structures import (
    Embedding,
    FinStructure,
    SignatureMismatch,
    first_embedding,
    iter_embeddings,
    reduct,
)
from .verdicts import Verdict

__all__ = [
    "IndexedFamily",
    "IndiscernibleType",
    "NotIndiscernible",
    "ReindexHypothesisError",
    "ExtractionError",
    "Stage",
    "ExtractionTrace",
    "check_indiscernible",
    "indiscernible_type",
    "based_on_check",
    "reindex",
    "reindex_search",
    "extract_indiscernible",
    "extraction_trace",
    "closure_color",
    "delta_values",
]


class NotIndiscernible(ValueError):
    def __init__(self, verdict: Verdict):
        super().__init__(verdict.note)
        self.verdict = verdict


class ReindexHypothesisError(ValueError):
    pass


class ExtractionError(RuntimeError):
    def __init__(self, msg: str, stage: int | None = None, qtype: QfType | None = None):
        super().__init__(msg)
        self.stage = stage
        self.qtype = qtype


@dataclass(frozen=True)
class IndexedFamily:
    index: FinStructure
    target: FinStructure
    map: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        m = tuple(tuple(a) if isinstance(a, (tuple, list)) else (int(a),) for a in self.map)
        object.__setattr__(self, "map", m)
        if len(m) != self.index.size:
            raise ValueError(f"map has {len(m)} entries for an index of size {self.index.size}")
        if len({len(a) for a in m}) > 1:
            raise ValueError("image tuples must share one length")
        if m and len(m[0]) == 0:
            raise ValueError("image tuples must be nonempty")
        for a in m:
            for v in a:
                if not 0 <= v < self.target.size:
                    raise ValueError(f"image element {v} out of range")
        if len(set(m)) != len(m):
            raise ValueError("the family is not injective")

    @property
    def width(self) -> int:
        return len(self.map[0]) if self.map else 1

    def images(self, tup: Sequence[int]) -> tuple[int, ...]:
        return tuple(v for i in tup for v in self.map[i])

    def restrict(self, emb: Embedding | Sequence[int]) -> "IndexedFamily":
        """Pull back along an embedding into the index."""
        if isinstance(emb, Embedding):
            source, mapping = emb.source, emb.map
        else:
            raise TypeError("restrict expects an Embedding")
        return IndexedFamily(source, self.target, tuple(self.map[i] for i in mapping))


def delta_values(fam: IndexedFamily, delta: FormulaSet, tup: Sequence[int], _cache=None) -> tuple[bool, ...]:
    """Truth values of the arity-``len(tup)`` formulas on the images of ``tup``."""
    delta = delta.for_width(fam.width)
    img = fam.images(tup)
    if _cache is not None and img in _cache:
        return _cache[img]
    val = tuple(bool(f(fam.target, img)) for _, f in delta.of_arity(len(tup)))
    if _cache is not None:
        _cache[img] = val
    return val


def _arities(delta: FormulaSet, n_max: int | None) -> range:
    top = delta.max_arity if n_max is None else n_max
    return range(1, top + 1)


def check_indiscernible(
    fam: IndexedFamily,
    sub: Iterable[str] | None,
    delta: FormulaSet,
    n_max: int | None = None,
) -> Verdict:
    """Equal qf types in the ``sub`` reduct of the index force equal Δ-types.

    Tuples are arbitrary (repeats allowed).  ``sub=None`` means the full
    index signature.
    """
    delta = delta.for_width(fam.width)
    if n_max is not None and delta.max_arity > n_max:
        raise ValueError("formula arities exceed n_max")
    I = fam.index if sub is None else reduct(fam.index, sub)
    cache: dict = {}
    for m in _arities(delta, n_max):
        fs = delta.of_arity(m)
        if not fs:
            continue
        seen: dict[int, tuple] = {}
        for tup in itertools.product(range(I.size), repeat=m):
            key = qftype_of(tup, I).word
            val = delta_values(fam, delta, tup, cache)
            if key not in seen:
                seen[key] = (tup, val)
                continue
            first, ref = seen[key]
            if ref != val:
                k = next(p for p in range(len(val)) if val[p] != ref[p])
                formula = fs[k][1]
                return Verdict.fail(
                    {"arity": m, "left": first, "right": tup, "formula": formula.text,
                     "values": (ref[k], val[k])},
                    f"{first} and {tup} share a qf type but disagree on {formula.text}",
                )
    return Verdict.ok()


@dataclass(frozen=True)
class IndiscernibleType:
    """``p^η`` for each increasing index type ``η`` realized in the index."""

    delta: FormulaSet
    values: dict = field(hash=False)  # QfType -> tuple[bool, ...]

    def __getitem__(self, eta: QfType) -> tuple[bool, ...]:
        return self.values[eta]

    def __iter__(self):
        return iter(sorted(self.values, key=lambda t: (t.arity, t.word)))

    def __len__(self):
        return len(self.values)

    def formula_values(self, eta: QfType) -> dict[str, bool]:
        fs = self.delta.of_arity(eta.arity)
        return {f.text: v for (_, f), v in zip(fs, self.values[eta])}


def indiscernible_type(fam: IndexedFamily, delta: FormulaSet, n_max: int | None = None) -> IndiscernibleType:
    delta = delta.for_width(fam.width)
    verdict = check_indiscernible(fam, None, delta, n_max)
    if not verdict.holds:
        raise NotIndiscernible(verdict)
    values = {}
    I = fam.index
    for m in _arities(delta, n_max):
        if m > I.size:
            break
        for tup in itertools.combinations(range(I.size), m):
            eta = qftype_of(tup, I)
            if eta not in values:
                values[eta] = delta_values(fam, delta, tup)
    return IndiscernibleType(delta, values)


def based_on_check(
    newer: IndexedFamily, older: IndexedFamily, sigma: FormulaSet, n_max: int | None = None
) -> Verdict:
    """Every pattern of ``newer`` already occurs in ``older``.

    For each tuple ``s`` of the newer index some tuple ``t`` of the older
    index has the same qf type and the images have equal Σ-types.
    """
    if newer.width != older.width:
        raise ValueError("families have different image widths")
    sigma = sigma.for_width(newer.width)
    if newer.index.signature != older.index.signature:
        raise SignatureMismatch("families have different index signatures")
    if newer.target.signature != older.target.signature:
        raise SignatureMismatch("families have different target signatures")
    for m in _arities(sigma, n_max):
        if not sigma.of_arity(m):
            continue
        seen: dict[int, set] = {}
        for t in itertools.product(range(older.index.size), repeat=m):
            key = qftype_of(t, older.index).word
            seen.setdefault(key, set()).add(delta_values(older, sigma, t))
        for s in itertools.product(range(newer.index.size), repeat=m):
            q = qftype_of(s, newer.index)
            if delta_values(newer, sigma, s) not in seen.get(q.word, ()):
                return Verdict.fail(
                    {"arity": m, "tuple": s, "type": q.describe()},
                    f"the pattern of {s} does not occur in the older family",
                )
    return Verdict.ok()


# -- reindexing -----------------------------------------------------------------

def _pattern_table(fam: IndexedFamily, delta: FormulaSet, n_max: int) -> dict[tuple[int, int], tuple]:
    """Δ-values by (arity, qf-type word) over arbitrary tuples of the index."""
    table: dict[tuple[int, int], tuple] = {}
    for m in range(1, n_max + 1):
        for t in itertools.product(range(fam.index.size), repeat=m):
            key = (m, qftype_of(t, fam.index).word)
            val = delta_values(fam, delta, t)
            if table.setdefault(key, val) != val:
                raise NotIndiscernible(check_indiscernible(fam, None, delta, n_max))
    return table


def reindex_search(
    fam: IndexedFamily, J: FinStructure, delta: FormulaSet, n_max: int | None = None
) -> tuple[IndexedFamily | None, dict | None]:
    """Find ``j -> b_j`` in ``fam.target`` with every Δ-pattern of ``fam``.

    Returns ``(family, None)`` or ``(None, blocking)`` where ``blocking``
    names the deepest index element that could not be placed and the index
    type (or injectivity) that ruled out its last candidate.
    """
    delta = delta.for_width(fam.width)
    if J.signature != fam.index.signature:
        raise SignatureMismatch("J must share the index signature")
    n_max = delta.max_arity if n_max is None else n_max
    for m in range(1, min(n_max, J.size) + 1):
        missing = type_catalog(J, m).entries - type_catalog(fam.index, m).entries
        if missing:
            t = min(missing, key=lambda q: q.word)
            raise ReindexHypothesisError(f"J realizes {t.describe()} which the index omits")
    table = _pattern_table(fam, delta, n_max)
    width = fam.width
    cands = list(itertools.product(range(fam.target.size), repeat=width))
    b: list[tuple[int, ...]] = []
    used: set = set()
    worst = {"depth": -1}

    def values(tup):
        img = tuple(v for j in tup for v in b[j])
        return tuple(bool(f(fam.target, img)) for _, f in delta.of_arity(len(tup)))

    def fits(j: int):
        for m in range(1, n_max + 1):
            if not delta.of_arity(m):
                continue
            for tup in itertools.product(range(j + 1), repeat=m):
                if j not in tup:
                    continue
                q = qftype_of(tup, J)
                want = table.get((m, q.word))
                if want is None:
                    raise ReindexHypothesisError(f"J realizes {q.describe()} which the index omits")
                if values(tup) != want:
                    return q
        return None

    def rec(j: int) -> bool:
        if j == J.size:
            return True
        reason = None
        for c in cands:
            if c in used:
                reason = reason or "injectivity"
                continue
            b.append(c)
            bad = fits(j)
            if bad is None:
                used.add(c)
                if rec(j + 1):
                    return True
                used.discard(c)
            else:
                reason = bad
            b.pop()
        if j >= worst["depth"]:
            worst.update(depth=j, reason=reason)
        return False

    if rec(0):
        out = IndexedFamily(J, fam.target, tuple(b))
        assert check_indiscernible(out, None, delta, n_max).holds
        assert based_on_check(out, fam, delta, n_max).holds
        return out, None
    reason = worst.get("reason")
    return None, {
        "element": worst["depth"],
        "reason": reason if isinstance(reason, str) else "type",
        "eta": reason.describe() if isinstance(reason, QfType) else None,
        "type": reason if isinstance(reason, QfType) else None,
    }


def reindex(fam: IndexedFamily, J: FinStructure, delta: FormulaSet, n_max: int | None = None) -> IndexedFamily | None:
    return reindex_search(fam, J, delta, n_max)[0]


# -- extraction -------------------------------------------------------------------

def _surjections(m: int, k: int) -> list[tuple[int, ...]]:
    return [s for s in itertools.product(range(k), repeat=m) if len(set(s)) == k]


def closure_color(fam: IndexedFamily, delta: FormulaSet, tup: Sequence[int], r: int) -> tuple:
    """Colour of an increasing tuple: every formula of arity ``m <= r``
    evaluated on ``tup`` composed with each surjection onto its positions.

    Two increasing tuples of the same type with equal colours are
    indistinguishable by Δ on any tuple built from their entries.
    """
    delta = delta.for_width(fam.width)
    k = len(tup)
    out = []
    for m in range(k, r + 1):
        fs = delta.of_arity(m)
        if not fs:
            continue
        for sigma in _surjections(m, k):
            img = tuple(v for p in sigma for v in fam.map[tup[p]])
            out.extend(bool(f(fam.target, img)) for _, f in fs)
    return tuple(out)


@dataclass(frozen=True)
class Stage:
    qtype: QfType
    color: tuple | None  # None when the host realizes no copy of the type
    host: tuple[int, ...]


@dataclass(frozen=True)
class ExtractionTrace:
    types: tuple[QfType, ...]
    stages: tuple[Stage, ...]
    copy: Embedding
    family: IndexedFamily
    nodes: int


def _bits(mask: int) -> list[int]:
    out = []
    while mask:
        low = mask & -mask
        out.append(low.bit_length() - 1)
        mask ^= low
    return out


def extraction_trace(
    raw: IndexedFamily,
    delta: FormulaSet,
    r: int | None,
    shape: FinStructure,
    *,
    node_limit: int = 100_000,
) -> ExtractionTrace:
    """Nested homogeneous hosts inside the finite index, then a shape copy.

    The types are the increasing qf types of arity ``1..r`` realized in the
    shape, in encoding order.  Stages run from the last type to the first.
    Each stage fixes a colour for its type and deletes vertices of
    off-colour realizations until the host is homogeneous for that type.
    Every deletion keeps some copy of ``shape`` that is homogeneous for all
    types and agrees with the colours fixed so far, so no stage dead-ends and
    the extraction fails only when no homogeneous shape copy exists at all.
    """
    delta = delta.for_width(raw.width)
    I = raw.index
    if not I.ordered:
        raise ValueError("extraction needs an ordered index")
    if shape.signature != I.signature:
        raise SignatureMismatch("shape and index signatures differ")
    r = max(delta.max_arity, 1) if r is None else r
    if r < delta.max_arity:
        raise ValueError("pattern arity r is below the largest formula arity")
    full = (1 << I.size) - 1
    if first_embedding(shape, I) is None:
        raise ExtractionError("the shape does not embed into the raw index", stage=0)

    types: list[QfType] = []
    for m in range(1, min(r, shape.size) + 1):
        types.extend(sorted(type_catalog(shape, m).entries, key=lambda q: q.word))
    words = {(q.arity, q.word): j for j, q in enumerate(types)}
    # realizations in the index (vertex mask, tuple) and their colours
    real: list[list[tuple[int, tuple]]] = [[] for _ in types]
    color: dict[tuple, tuple] = {}
    for m in range(1, min(r, shape.size) + 1):
        for tup in itertools.combinations(range(I.size), m):
            j = words.get((m, qftype_of(tup, I).word))
            if j is not None:
                mask = sum(1 << v for v in tup)
                real[j].append((mask, tup))
                color[tup] = closure_color(raw, delta, tup, r)
    # positions of each type inside the shape
    pattern = [
        [t for t in itertools.combinations(range(shape.size), q.arity)
         if qftype_of(t, shape).word == q.word]
        for q in types
    ]
    nodes = [0]

    def homogeneous_copy(H: int, fixed: dict[int, tuple], upto: Sequence[int] | None = None):
        """Least shape copy in ``H``, homogeneous for the listed types and
        coloured as in ``fixed``."""
        check = range(len(types)) if upto is None else upto
        for f in iter_embeddings(shape, I, _bits(H)):
            nodes[0] += 1
            if nodes[0] > node_limit:
                raise ExtractionError(f"node limit {node_limit} reached")
            for j in check:
                cols = {color[tuple(f[p] for p in t)] for t in pattern[j]}
                if len(cols) > 1 or (j in fixed and cols and fixed[j] not in cols):
                    break
            else:
                return f
        return None

    order = list(range(len(types)))[::-1]
    if homogeneous_copy(full, {}) is None:
        for pos in range(len(order)):
            if homogeneous_copy(full, {}, order[: pos + 1]) is None:
                i = order[pos]
                raise ExtractionError(
                    f"stage {pos + 1}: no copy of the shape in the index is homogeneous "
                    f"for {types[i].describe()} and the earlier stage types",
                    stage=pos + 1, qtype=types[i],
                )
    H = full
    fixed: dict[int, tuple] = {}
    stages: list[Stage] = []
    for i in order:
        inside = [tup for mask, tup in real[i] if mask & H == mask]
        if not inside:
            stages.append(Stage(types[i], None, tuple(_bits(H))))
            continue
        freq: dict[tuple, int] = {}
        for tup in inside:
            freq[color[tup]] = freq.get(color[tup], 0) + 1
        for c in sorted(freq, key=lambda c: (-freq[c], c)):
            if homogeneous_copy(H, {**fixed, i: c}) is not None:
                fixed[i] = c
                break
        else:  # unreachable while the invariant holds
            raise AssertionError("no colour keeps a homogeneous shape copy")
        while True:
            off = next(
                (mask for mask, tup in real[i] if mask & H == mask and color[tup] != fixed[i]),
                None,
            )
            if off is None:
                break
            for v in _bits(off):
                if homogeneous_copy(H & ~(1 << v), fixed) is not None:
                    H &= ~(1 << v)
                    break
            else:
                raise AssertionError("no deletion keeps a homogeneous shape copy")
        stages.append(Stage(types[i], fixed[i], tuple(_bits(H))))

    emb = first_embedding(shape, I, within=_bits(H))
    fam = raw.restrict(emb)

    # nested hosts, and homogeneity persists once reached
    prev = full
    for s, st in enumerate(stages):
        Hs = sum(1 << v for v in st.host)
        assert Hs & prev == Hs, "hosts are not nested"
        prev = Hs
        for earlier in stages[: s + 1]:
            j = types.index(earlier.qtype)
            cols = {color[tup] for mask, tup in real[j] if mask & Hs == mask}
            assert len(cols) <= 1, "homogeneity was lost"
    return ExtractionTrace(tuple(types), tuple(stages), emb, fam, nodes[0])


def extract_indiscernible(
    raw: IndexedFamily,
    delta: FormulaSet,
    r: int | None,
    shape: FinStructure,
    *,
    node_limit: int = 100_000,
) -> IndexedFamily:
    """A Δ-indiscernible family indexed by ``shape``, based on ``raw``."""
    return extraction_trace(raw, delta, r, shape, node_limit=node_limit).family
