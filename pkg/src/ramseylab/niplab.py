"""Independence property, graph coding, and the collapse-to-IP argument.

The pipeline runs on finite targets.  A shattering target codes an ordered
graph through a symmetric formula; extraction gives an indiscernible whose
order-type table depends on the edges (a *collapse*); the collapse is
normalized to a single flipped edge and turned back into an explicit
shattering witness.  On an order-only target the same pipeline finds no
collapse.
"""
from __future__ import annotations

import itertools
import random
import time
from dataclasses import dataclass, field
from typing import Sequence

from .formulas import Formula, FormulaSet, parse_formula
from .fraisse import SaturationCertificate, extension_property_check, weakly_saturated_ordered_graph
from .indiscernibles import (
    IndexedFamily,
    NotIndiscernible,
    check_indiscernible,
    extraction_trace,
    indiscernible_type,
)
from .qftypes import QfType, qftype_of
from .structures import (
    ORDERED_GRAPH,
    FinStructure,
    RelationSymbol,
    Signature,
    first_embedding,
    linear_order,
    ordered_graph,
    ordered_sum,
)
from .verdicts import BudgetExceeded

__all__ = [
    "PartitionedFormula",
    "ShatterWitness",
    "CollapseReport",
    "CollapseError",
    "IPVerificationError",
    "DemoReport",
    "shatter_check",
    "code_graph",
    "collapse_analysis",
    "ip_from_collapse",
    "pattern_graph",
    "membership_structure",
    "paley_graph",
    "ip_demo",
    "nip_demo",
    "subsets",
]


class CollapseError(RuntimeError):
    """The finite index does not realize a type the normalization needs."""

    def __init__(self, msg: str, missing: QfType | None = None):
        super().__init__(msg)
        self.missing = missing


class IPVerificationError(AssertionError):
    pass


@dataclass(frozen=True)
class PartitionedFormula:
    """``φ(x; y)``: the first ``x_arity`` variables are the object side."""

    formula: Formula
    x_arity: int
    y_arity: int

    def __post_init__(self):
        if self.x_arity < 0 or self.y_arity < 0:
            raise ValueError("arities must be natural numbers")
        if self.formula.arity != self.x_arity + self.y_arity:
            raise ValueError(
                f"formula has {self.formula.arity} free variables, split is "
                f"{self.x_arity}+{self.y_arity}"
            )

    @classmethod
    def parse(cls, text: str, x_arity: int = 1, y_arity: int = 1) -> "PartitionedFormula":
        return cls(parse_formula(text, x_arity + y_arity), x_arity, y_arity)

    def __call__(self, M: FinStructure, b: Sequence[int], a: Sequence[int]) -> bool:
        return self.formula(M, tuple(b) + tuple(a))

    def __str__(self):
        return f"{self.formula.text} with x = x1..x{self.x_arity}"


def subsets(n: int) -> list[frozenset[int]]:
    """``w_1..w_{2^n}``: ``w_t`` holds ``i`` iff bit ``i-1`` of ``t-1`` is set."""
    return [frozenset(i + 1 for i in range(n) if s >> i & 1) for s in range(2**n)]


@dataclass(frozen=True)
class ShatterWitness:
    phi: PartitionedFormula
    structure: FinStructure
    n: int
    parameters: tuple[tuple[int, ...], ...]  # a_1..a_n
    instances: tuple[tuple[int, ...], ...]  # b_1..b_{2^n}

    @property
    def subsets(self) -> list[frozenset[int]]:
        return subsets(self.n)

    def violations(self) -> list[tuple[int, int]]:
        """``(t, i)`` pairs, 1-based, where ``φ(b_t; a_i)`` disagrees with ``i ∈ w_t``."""
        out = []
        for t, (b, w) in enumerate(zip(self.instances, self.subsets), start=1):
            for i, a in enumerate(self.parameters, start=1):
                if self.phi(self.structure, b, a) != (i in w):
                    out.append((t, i))
        return out

    def verify(self) -> bool:
        return (
            len(self.parameters) == self.n
            and len(self.instances) == 2**self.n
            and not self.violations()
        )


def shatter_check(
    phi: PartitionedFormula, M: FinStructure, n: int, *, budget: int = 10**6
) -> ShatterWitness | None:
    """Least parameters ``a_1 < ... < a_n`` (lexicographic) shattered by ``φ``.

    Each candidate instance ``b`` is summarized by the set of parameter
    candidates it satisfies; a partial parameter list survives only while
    every pattern on it is realized.
    """
    if n < 0:
        raise ValueError("n must be a natural number")
    xs = list(itertools.product(range(M.size), repeat=phi.x_arity))
    ys = list(itertools.product(range(M.size), repeat=phi.y_arity))
    if len(xs) * len(ys) > budget:
        raise BudgetExceeded(f"{len(xs)} x {len(ys)} evaluations exceed the budget {budget}")
    sat = [sum(1 << j for j, a in enumerate(ys) if phi(M, b, a)) for b in xs]
    nodes = [0]
    chosen: list[int] = []

    def patterns() -> dict[int, int]:
        out: dict[int, int] = {}
        for bi, row in enumerate(sat):
            key = sum(1 << p for p, j in enumerate(chosen) if row >> j & 1)
            out.setdefault(key, bi)
        return out

    def rec(start: int) -> dict[int, int] | None:
        nodes[0] += 1
        if nodes[0] > budget:
            raise BudgetExceeded(f"shatter search passed {budget} nodes")
        pats = patterns()
        if len(pats) < 2 ** len(chosen):
            return None
        if len(chosen) == n:
            return pats
        for j in range(start, len(ys)):
            chosen.append(j)
            found = rec(j + 1)
            if found is not None:
                return found
            chosen.pop()
        return None

    if not xs:
        return None
    pats = rec(0)
    if pats is None:
        return None
    w = ShatterWitness(
        phi, M, n,
        tuple(ys[j] for j in chosen),
        tuple(xs[pats[s]] for s in range(2**n)),
    )
    assert w.verify()
    return w


def membership_structure(k: int = 3) -> FinStructure:
    """Points ``0..k-1`` then the subsets of ``[k]`` (subset ``s`` at ``k + s``),
    ordered in that way, with ``E(s, x)`` iff ``x ∈ s``."""
    sig = Signature((RelationSymbol("<", 2), RelationSymbol("E", 2)), order="<")
    rows = [(k + s, x) for s in range(2**k) for x in range(k) if s >> x & 1]
    return FinStructure(sig, k + 2**k, {"E": rows})


def paley_graph(q: int) -> FinStructure:
    """Paley graph on ``Z/q`` in the natural order; ``q`` a prime with ``q ≡ 1 mod 4``."""
    if q < 5 or q % 4 != 1 or any(q % d == 0 for d in range(2, int(q**0.5) + 1)):
        raise ValueError("q must be a prime congruent to 1 mod 4")
    squares = {x * x % q for x in range(1, q)}
    return ordered_graph(q, [(a, b) for a in range(q) for b in range(a + 1, q) if (b - a) % q in squares])


# -- graph coding -------------------------------------------------------------

def code_graph(
    phi: PartitionedFormula, M: FinStructure, G: FinStructure, *, budget: int = 10**6
) -> IndexedFamily | None:
    """Injection ``g ↦ a_g`` with ``φ(a_g; a_h) ⇔ R(g, h)`` for ``g ≠ h``."""
    if G.signature != ORDERED_GRAPH:
        raise ValueError("code_graph expects an ordered graph")
    if phi.x_arity != phi.y_arity or phi.x_arity == 0:
        raise ValueError("code_graph needs a formula with equal nonempty halves")
    cands = list(itertools.product(range(M.size), repeat=phi.x_arity))
    if len(cands) ** 2 > budget:
        raise BudgetExceeded(f"{len(cands)}^2 evaluations exceed the budget {budget}")
    adj = [0] * len(cands)
    for i, c in enumerate(cands):
        for j, d in enumerate(cands):
            if i != j and phi(M, c, d):
                adj[i] |= 1 << j
    for i in range(len(cands)):
        for j in range(len(cands)):
            if (adj[i] >> j & 1) != (adj[j] >> i & 1):
                raise ValueError(f"{phi.formula.text} is not symmetric at {cands[i]}, {cands[j]}")
    full = (1 << len(cands)) - 1
    img: list[int] = []
    nodes = [0]

    def rec(g: int, used: int) -> bool:
        if g == G.size:
            return True
        mask = full & ~used
        for h in range(g):
            mask &= adj[img[h]] if G.holds("R", (h, g)) else ~adj[img[h]]
        while mask:
            nodes[0] += 1
            if nodes[0] > budget:
                raise BudgetExceeded(f"coding search passed {budget} nodes")
            low = mask & -mask
            img.append(low.bit_length() - 1)
            if rec(g + 1, used | low):
                return True
            img.pop()
            mask ^= low
        return False

    if not rec(0, 0):
        return None
    fam = IndexedFamily(G, M, tuple(cands[i] for i in img))
    for g, h in itertools.permutations(range(G.size), 2):
        assert phi(M, fam.map[g], fam.map[h]) == G.holds("R", (g, h))
    return fam


# -- collapse analysis ----------------------------------------------------------

def _increasing_type(n: int, bits: Sequence[int]) -> QfType:
    pairs = list(itertools.combinations(range(n), 2))
    atoms = [("<", p) for p in pairs]
    for (i, j), b in zip(pairs, bits):
        if b:
            atoms += [("R", (i, j)), ("R", (j, i))]
    return QfType.from_atoms(ORDERED_GRAPH, n, atoms)


@dataclass(frozen=True)
class CollapseReport:
    """A formula whose value on increasing tuples depends on the edges.

    ``i_star``/``j_star`` realize ``F``/``G`` over the shared ``common``
    tuple; ``F`` has ``R(z1, z2)`` and ``G`` does not.  ``theta_prime`` is
    ``θ`` with ``z1, z2`` moved to the front, negated when the ``θ`` side of
    the crossing is the non-edge, so ``F ⇒ θ'`` and ``G ⇒ ¬θ'``.
    """

    theta: Formula
    theta_index: int
    n: int
    a: QfType
    b: QfType
    walk: tuple[QfType, ...]
    a_prime: QfType
    b_prime: QfType
    flip: tuple[int, int]  # (k, l), 1-based
    i_tuple: tuple[int, ...]
    j_tuple: tuple[int, ...]
    common: tuple[int, ...]
    i_star: tuple[int, int]
    j_star: tuple[int, int]
    F: QfType
    G: QfType
    polarity: int
    theta_prime: Formula
    table: dict = field(hash=False, compare=False)  # increasing type -> θ value

    def flip_weight(self) -> int:
        return sum(x != y for x, y in zip(self.a_prime.r_bits(), self.b_prime.r_bits()))

    def fg_difference(self) -> list[tuple]:
        """Atoms on which ``F`` and ``G`` disagree."""
        return [
            (name, t)
            for (name, t, u), (_, _, v) in zip(self.F.atoms(), self.G.atoms())
            if u != v
        ]

    def check(self, fam: IndexedFamily) -> bool:
        k, l = self.flip
        F_tup = self.i_star + self.common
        G_tup = self.j_star + self.common
        return (
            self.flip_weight() == 1
            and set(self.fg_difference()) == {("R", (0, 1)), ("R", (1, 0))}
            and self.F.is_consistent() and self.G.is_consistent()
            and qftype_of(F_tup, fam.index) == self.F
            and qftype_of(G_tup, fam.index) == self.G
            and self.F.holds("R", (0, 1)) and not self.G.holds("R", (0, 1))
            and self.theta_prime(fam.target, fam.images(F_tup))
            and not self.theta_prime(fam.target, fam.images(G_tup))
            and 1 <= k < l <= self.n
        )

    def lines(self) -> list[str]:
        k, l = self.flip
        return [
            f"separating formula: {self.theta.text} (arity {self.n})",
            f"theta holds on {self.a.describe()}, fails on {self.b.describe()}",
            f"walk: {len(self.walk) - 1} flips; crossing {self.a_prime.describe()} -> {self.b_prime.describe()}",
            f"flip pair: ({k},{l})",
            f"i = {self.i_tuple}, j = {self.j_tuple}, common = {self.common}",
            f"F = {self.F.describe()} at {self.i_star + self.common}",
            f"G = {self.G.describe()} at {self.j_star + self.common}",
            f"theta' = {self.theta_prime.text}",
        ]


def _walk(a_bits: tuple, b_bits: tuple) -> list[tuple]:
    """Flip the differing pairs of ``a`` one at a time, pair-lexicographically."""
    out = [a_bits]
    cur = list(a_bits)
    for p, (x, y) in enumerate(zip(a_bits, b_bits)):
        if x != y:
            cur[p] = y
            out.append(tuple(cur))
    return out


def collapse_analysis(fam: IndexedFamily, delta: FormulaSet) -> CollapseReport | None:
    """``None`` when every Δ-value on increasing tuples depends on the arity
    alone; otherwise a normalized collapse.

    The first formula (in Δ order) that separates two increasing types is
    used.  Candidate pairs ``(a, b)`` run over θ-true and θ-false realized
    types by encoding; the first pair whose flip walk stays inside realized
    types up to its crossing wins.
    """
    if fam.index.signature != ORDERED_GRAPH:
        raise ValueError("collapse analysis expects an ordered-graph index")
    delta = delta.for_width(fam.width)
    verdict = check_indiscernible(fam, None, delta)
    if not verdict.holds:
        raise NotIndiscernible(verdict)
    ptype = indiscernible_type(fam, delta)
    for n in range(2, delta.max_arity + 1):
        realized = [eta for eta in ptype if eta.arity == n]
        for pos, (idx, theta) in enumerate(delta.of_arity(n)):
            table = {eta: ptype[eta][pos] for eta in realized}
            if len(set(table.values())) < 2:
                continue
            by_bits = {eta.r_bits(): eta for eta in realized}
            trues = [eta for eta in realized if table[eta]]
            falses = [eta for eta in realized if not table[eta]]
            first_missing = None
            for a, b in itertools.product(trues, falses):
                crossing = None
                steps = _walk(a.r_bits(), b.r_bits())
                for s in range(1, len(steps)):
                    cur = by_bits.get(steps[s])
                    if cur is None:
                        first_missing = first_missing or _increasing_type(n, steps[s])
                        break
                    if not table[cur]:
                        crossing = s
                        break
                if crossing is None:
                    continue
                walk = tuple(by_bits[bits] for bits in steps[: crossing + 1])
                return _normalize(fam, theta, idx, n, a, b, walk, table)
            raise CollapseError(
                f"every flip walk for {theta.text} leaves the realized types; "
                f"missing {first_missing.describe()}",
                first_missing,
            )
    return None


def _normalize(fam, theta, idx, n, a, b, walk, table) -> CollapseReport:
    I = fam.index
    a1, b1 = walk[-2], walk[-1]
    p = next(q for q, (x, y) in enumerate(zip(a1.r_bits(), b1.r_bits())) if x != y)
    k, l = list(itertools.combinations(range(n), 2))[p]
    rest = [s for s in range(n) if s not in (k, l)]
    # rebase: keep a realization of b' and move positions k, l to realize a'
    found = None
    for jt in itertools.combinations(range(I.size), n):
        if qftype_of(jt, I) != b1:
            continue
        for x, y in itertools.combinations(range(I.size), 2):
            it = list(jt)
            it[k], it[l] = x, y
            if list(it) == sorted(set(it)) and qftype_of(it, I) == a1:
                found = (tuple(it), jt)
                break
        if found:
            break
    if found is None:
        raise CollapseError(
            f"no realization of {a1.describe()} shares the positions off ({k + 1},{l + 1}) "
            f"with a realization of {b1.describe()}",
            a1,
        )
    it, jt = found
    common = tuple(jt[s] for s in rest)
    w = fam.width
    order = [s * w + c for s in [k, l] + rest for c in range(w)]
    theta_p = theta.permute(order)
    if a1.holds("R", (k, l)):
        polarity, i_star, j_star = 1, (it[k], it[l]), (jt[k], jt[l])
    else:
        polarity, i_star, j_star = -1, (jt[k], jt[l]), (it[k], it[l])
        theta_p = theta_p.negate()
    report = CollapseReport(
        theta=theta, theta_index=idx, n=n, a=a, b=b, walk=walk,
        a_prime=a1, b_prime=b1, flip=(k + 1, l + 1),
        i_tuple=it, j_tuple=jt, common=common, i_star=i_star, j_star=j_star,
        F=qftype_of(i_star + common, I), G=qftype_of(j_star + common, I),
        polarity=polarity, theta_prime=theta_p, table=table,
    )
    assert report.check(fam), "collapse report failed its own invariants"
    return report


# -- IP witness synthesis --------------------------------------------------------

def _stable_topological(n: int, before: set[tuple[int, int]]) -> list[int]:
    preds = [0] * n
    succ: list[list[int]] = [[] for _ in range(n)]
    for u, v in before:
        preds[v] += 1
        succ[u].append(v)
    out = []
    ready = [v for v in range(n) if preds[v] == 0]
    while ready:
        v = min(ready)
        ready.remove(v)
        out.append(v)
        for s in succ[v]:
            preds[s] -= 1
            if preds[s] == 0:
                ready.append(s)
    if len(out) != n:
        raise ValueError("order constraints are cyclic")
    return out


def pattern_graph(report: CollapseReport | None, m: int, index: FinStructure | None = None):
    """The ordered graph on ``y_s, z_t, u_3..u_n`` and the position of each.

    With ``report=None`` this is the two-variable pattern (``n = 2``,
    ``F`` = edge, ``G`` = non-edge).  Returns ``(B, ys, zs, us)`` with
    vertex lists in ``B``.
    """
    if m < 0:
        raise ValueError("m must be a natural number")
    common = report.common if report else ()
    istar = report.i_star if report else None
    ny, nz, nu = 2**m, m, len(common)
    N = ny + nz + nu
    Y = list(range(ny))
    Z = list(range(ny, ny + nz))
    U = list(range(ny + nz, N))
    before: set[tuple[int, int]] = set()
    edges: set[tuple[int, int]] = set()
    for s, w in enumerate(subsets(m)):
        for t in range(1, m + 1):
            before.add((Y[s], Z[t - 1]))
            if t in w:
                edges.add((Y[s], Z[t - 1]))
    if report is not None:
        for p, q in itertools.combinations(range(nu), 2):
            before.add((U[p], U[q]))
            if index.holds("R", (common[p], common[q])):
                edges.add((U[p], U[q]))
        for p, a in enumerate(common):
            for side, z in ((Y, istar[0]), (Z, istar[1])):
                for v in side:
                    before.add((v, U[p]) if z < a else (U[p], v))
                    if index.holds("R", (z, a)):
                        edges.add((v, U[p]))
    order = _stable_topological(N, before)
    pos = {v: i for i, v in enumerate(order)}
    B = ordered_graph(N, [(pos[u], pos[v]) for u, v in edges])
    return B, [pos[v] for v in Y], [pos[v] for v in Z], [pos[v] for v in U]


def ip_from_collapse(
    report: CollapseReport,
    m: int,
    host: FinStructure | SaturationCertificate | None,
    fam: IndexedFamily,
) -> ShatterWitness:
    """θ'-shattering of ``m`` parameters read off a copy of the pattern graph.

    ``host`` must be the index of ``fam`` (or a saturation certificate for
    it); parameters and instances are the ``fam``-images of the copy.
    """
    index = fam.index
    if isinstance(host, SaturationCertificate):
        host = host.structure
    if host is not None and host != index:
        raise ValueError("the host must be the index of the family")
    B, Y, Z, U = pattern_graph(report, m, index)
    emb = first_embedding(B, index)
    if emb is None:
        raise ValueError(f"host too small: the index does not embed the {B.size}-vertex pattern graph")
    w = fam.width
    phi = PartitionedFormula(report.theta_prime, w, w * (report.n - 1))
    params = tuple(fam.images([emb(z)] + [emb(u) for u in U]) for z in Z)
    inst = tuple(fam.images([emb(y)]) for y in Y)
    for s, y in enumerate(Y):
        for t, z in enumerate(Z, start=1):
            got = qftype_of([emb(y), emb(z)] + [emb(u) for u in U], index)
            want = report.F if t in subsets(m)[s] else report.G
            if got != want:
                raise IPVerificationError(f"pattern copy gives {got.describe()}, expected {want.describe()}")
    witness = ShatterWitness(phi, fam.target, m, params, inst)
    bad = witness.violations()
    if bad:
        raise IPVerificationError(f"shattering fails at (t, i) = {bad[0]}; is the family indiscernible?")
    return witness


# -- demonstrations ---------------------------------------------------------------

@dataclass
class DemoReport:
    target: str
    shatter: ShatterWitness | None
    shatter_n: int
    family: IndexedFamily | None = None
    extracted: IndexedFamily | None = None
    collapse: CollapseReport | None = None
    witness: ShatterWitness | None = None
    order_table: dict = field(default_factory=dict)  # arity -> set of value tuples
    notes: list[str] = field(default_factory=list)
    timing: dict[str, float] = field(default_factory=dict)

    @property
    def ip_side(self) -> bool:
        return self.collapse is not None


class _Clock:
    def __init__(self, report: DemoReport):
        self.report = report
        self.t = time.perf_counter()

    def lap(self, name: str) -> None:
        now = time.perf_counter()
        self.report.timing[name] = now - self.t
        self.t = now


def ip_demo(target: str = "membership", m: int = 2, shatter_n: int | None = None, *, q: int = 29) -> DemoReport:
    """Shattering target through coding, extraction, collapse and back to IP.

    Both targets code the two-variable pattern graph: ``membership`` through
    the symmetrized membership relation, ``paley`` through the edge relation
    of a Paley graph whose extension property is checked for sets of size
    at most 2.
    """
    if target == "membership":
        M = membership_structure(3)
        phi = PartitionedFormula.parse("or(rel(E, x1, x2), rel(E, x2, x1))")
        index = pattern_graph(None, m)[0]
        shatter_n = 3 if shatter_n is None else shatter_n
    elif target == "paley":
        M = paley_graph(q)
        phi = PartitionedFormula.parse("rel(R, x1, x2)")
        index = pattern_graph(None, m)[0]
        shatter_n = 2 if shatter_n is None else shatter_n
    else:
        raise ValueError(f"unknown IP target {target!r}")
    rep = DemoReport(target, None, shatter_n)
    clock = _Clock(rep)
    sym = PartitionedFormula(phi.formula, 1, 1)
    rep.shatter = shatter_check(sym, M, shatter_n)
    clock.lap("shatter")
    if target == "paley":
        ext = extension_property_check(M, 3, respect_order=False)
        rep.notes.append(f"extension property for sets of size <= 2: {ext.status}")
        clock.lap("extension")
    rep.family = code_graph(phi, M, index)
    if rep.family is None:
        rep.notes.append("the target does not code the index graph")
        return rep
    clock.lap("code")
    delta = FormulaSet((phi.formula,))
    trace = extraction_trace(rep.family, delta, 2, index)
    rep.extracted = trace.family
    clock.lap("extract")
    rep.collapse = collapse_analysis(rep.extracted, delta)
    clock.lap("collapse")
    if rep.collapse is not None:
        rep.witness = ip_from_collapse(rep.collapse, m, rep.extracted.index, rep.extracted)
        clock.lap("ip")
    return rep


def _order_family(blocks: int, seed: int, S: FinStructure) -> IndexedFamily:
    """``blocks`` copies of ``S`` placed in shuffled order inside a linear
    order, each copy increasing or decreasing at random."""
    rng = random.Random(seed)
    n = S.size
    slots = list(range(blocks))
    rng.shuffle(slots)
    mp = []
    for b in range(blocks):
        inner = list(range(n))
        if rng.random() < 0.5:
            inner.reverse()
        mp.extend(slots[b] * n + v for v in inner)
    return IndexedFamily(ordered_sum([S] * blocks), linear_order(blocks * n), tuple(mp))


def nip_demo(shatter_n: int = 2, *, seed: int = 0, blocks: int = 3) -> DemoReport:
    """The order-only target: no shattering, and the extracted indiscernible
    has Δ-values that depend on the arity alone."""
    M = linear_order(6)
    phi = PartitionedFormula.parse("lt(x1, x2)")
    rep = DemoReport("linear-order", None, shatter_n)
    clock = _Clock(rep)
    rep.shatter = shatter_check(phi, M, shatter_n)
    clock.lap("shatter")
    S = weakly_saturated_ordered_graph(3).structure
    rep.family = _order_family(blocks, seed, S)
    delta = FormulaSet.parse(["lt(x1, x2)", "and(lt(x1, x2), lt(x2, x3))"])
    trace = extraction_trace(rep.family, delta, 3, S)
    rep.extracted = trace.family
    clock.lap("extract")
    rep.collapse = collapse_analysis(rep.extracted, delta)
    ptype = indiscernible_type(rep.extracted, delta)
    for eta in ptype:
        if eta.arity >= 2:
            rep.order_table.setdefault(eta.arity, set()).add(ptype[eta])
    clock.lap("collapse")
    return rep
