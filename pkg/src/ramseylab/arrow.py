"""The partition arrow ``C -> (B)^A_k``.

Every question here is reduced to the *copy hypergraph*: its vertices are
the A-copies of C in lexicographic order of vertex sets, and each B-copy of
C contributes the hyperedge of A-copies it contains.  A coloring is bad when
no hyperedge is monochromatic.  Colors are ``1..k`` in the public API and
``0..k-1`` inside the kernels.
"""
from __future__ import annotations

import os
import shutil
import subprocess
import tempfile
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import cached_property
from typing import Any, Sequence

import numpy as np

from . import kernels
from .structures import Copy, FinStructure, SignatureMismatch, enumerate_copies, first_embedding
from .verdicts import BudgetExceeded, Status

__all__ = [
    "ArrowProblem",
    "Coloring",
    "ArrowVerdict",
    "BudgetExceeded",
    "CnfDocument",
    "DEFAULT_BUDGET",
    "find_homogeneous",
    "bad_coloring_search",
    "check_arrow",
    "export_cnf",
    "solve_cnf",
    "ramsey_witness_search",
]

DEFAULT_BUDGET = 2**24


@dataclass(frozen=True, eq=False)
class ArrowProblem:
    C: FinStructure
    B: FinStructure
    A: FinStructure

    def __post_init__(self):
        if not (self.A.signature == self.B.signature == self.C.signature):
            raise SignatureMismatch("C, B and A must share a signature")

    @cached_property
    def a_copies(self) -> list[Copy]:
        return enumerate_copies(self.A, self.C)

    @cached_property
    def b_copies(self) -> list[Copy]:
        return enumerate_copies(self.B, self.C)

    @cached_property
    def index(self) -> dict[tuple[int, ...], int]:
        return {c.vertex_set: i for i, c in enumerate(self.a_copies)}

    @cached_property
    def hyperedges(self) -> list[tuple[int, ...]]:
        """A-copy indices inside each B-copy, in B-copy order."""
        inner = enumerate_copies(self.A, self.B)
        out = []
        for bc in self.b_copies:
            g = bc.rep.map
            out.append(tuple(sorted(
                {self.index[tuple(sorted(g[v] for v in ac.vertex_set))] for ac in inner}
            )))
        return out

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        members = [i for h in self.hyperedges for i in h]
        offsets = np.zeros(len(self.hyperedges) + 1, dtype=np.int32)
        offsets[1:] = np.cumsum([len(h) for h in self.hyperedges])
        return np.asarray(members, dtype=np.int32), offsets

    @property
    def n(self) -> int:
        return len(self.a_copies)

    def degree_order(self) -> list[int]:
        """Copies by descending number of containing B-copies, ties by index."""
        deg = [0] * self.n
        for h in self.hyperedges:
            for i in h:
                deg[i] += 1
        return sorted(range(self.n), key=lambda i: (-deg[i], i))


@dataclass(frozen=True)
class Coloring:
    A: FinStructure = field(repr=False)
    C: FinStructure = field(repr=False)
    k: int
    copies: tuple[tuple[int, ...], ...]
    assignment: tuple[int, ...]

    def __post_init__(self):
        if len(self.assignment) != len(self.copies):
            raise ValueError("assignment must color every copy")
        if any(not 1 <= c <= self.k for c in self.assignment):
            raise ValueError(f"colors must lie in 1..{self.k}")

    def color_of(self, vertex_set: Sequence[int]) -> int:
        return self.assignment[self.copies.index(tuple(sorted(vertex_set)))]

    def as_dict(self) -> dict[tuple[int, ...], int]:
        return dict(zip(self.copies, self.assignment))

    @classmethod
    def from_function(cls, A, C, k, color) -> "Coloring":
        copies = tuple(c.vertex_set for c in enumerate_copies(A, C))
        return cls(A, C, k, copies, tuple(int(color(s)) for s in copies))


@dataclass(frozen=True)
class ArrowVerdict:
    status: Status
    bad_coloring: Coloring | None = None
    homogeneity_certificates: np.ndarray | None = None
    mode: str = "exhaustive"
    metadata: dict[str, Any] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.status is Status.HOLDS

    @property
    def fails(self) -> bool:
        return self.status is Status.FAILS

    def certificate_for(self, problem: ArrowProblem, assignment: Sequence[int]) -> Copy:
        """The homogeneous B-copy recorded for a coloring (colors ``1..k``)."""
        if self.homogeneity_certificates is None:
            raise ValueError("no certificates recorded")
        k = self.metadata["k"]
        rank = 0
        for c in assignment:
            rank = rank * k + (c - 1)
        return problem.b_copies[int(self.homogeneity_certificates[rank])]


def _coloring(problem: ArrowProblem, k: int, colors0: Sequence[int]) -> Coloring:
    return Coloring(
        problem.A, problem.C, k,
        tuple(c.vertex_set for c in problem.a_copies),
        tuple(int(c) + 1 for c in colors0),
    )


def _problem_for(coloring: Coloring, B: FinStructure) -> ArrowProblem:
    problem = ArrowProblem(coloring.C, B, coloring.A)
    if tuple(c.vertex_set for c in problem.a_copies) != coloring.copies:
        raise ValueError("coloring does not cover the A-copies of C")
    return problem


def find_homogeneous(B: FinStructure, coloring: Coloring) -> Copy | None:
    """Least B-copy whose A-subcopies all share a color, or ``None``."""
    problem = _problem_for(coloring, B)
    members, offsets = problem.csr
    colors = np.asarray([c - 1 for c in coloring.assignment], dtype=np.int32)
    h = kernels.first_homogeneous(colors, members, offsets)
    return None if h < 0 else problem.b_copies[h]


def _verified_bad(problem: ArrowProblem, k: int, colors0) -> Coloring:
    col = _coloring(problem, k, colors0)
    if find_homogeneous(problem.B, col) is not None:
        raise AssertionError("kernel returned a coloring with a homogeneous copy")
    return col


def bad_coloring_search(
    C: FinStructure, B: FinStructure, A: FinStructure, k: int, node_limit: int = 0
) -> Coloring | None:
    """Backtracking search for a coloring without homogeneous B-copies.

    ``None`` means the search space was exhausted.  With a positive
    ``node_limit`` the search may stop early, which raises
    :class:`BudgetExceeded`.
    """
    problem = ArrowProblem(C, B, A)
    col, exhausted = _search(problem, k, node_limit)[:2]
    if col is not None:
        return col
    if not exhausted:
        raise BudgetExceeded(f"search stopped after {node_limit} nodes")
    return None


def _search(problem: ArrowProblem, k: int, node_limit: int):
    if not problem.b_copies:
        return _coloring(problem, k, [0] * problem.n), True, 0
    members, offsets = problem.csr
    colors, exhausted, nodes = kernels.backtrack(
        problem.n, k, members, offsets, problem.degree_order(), node_limit
    )
    if colors is None:
        return None, exhausted, nodes
    return _verified_bad(problem, k, colors), True, nodes


def _exhaustive_chunk(args):
    backend, n, k, members, offsets, lo, hi, want = args
    return kernels.get(backend).exhaustive(n, k, members, offsets, lo, hi, want)


def _exhaustive(problem: ArrowProblem, k: int, budget: int, jobs: int, certificates: bool):
    n = problem.n
    total = k**n
    if total > budget:
        raise BudgetExceeded(f"{k}^{n} colorings exceed the budget of {budget}")
    members, offsets = problem.csr
    if jobs <= 1 or n == 0 or k == 1:
        bad, certs, count = kernels.exhaustive(n, k, members, offsets, 0, k, certificates)
        return bad, certs, count
    # split on the color of copy 0; chunks are merged in lexicographic order
    bounds = np.linspace(0, k, min(jobs, k) + 1).astype(int)
    tasks = [
        (kernels.BACKEND, n, k, members, offsets, int(lo), int(hi), certificates)
        for lo, hi in zip(bounds[:-1], bounds[1:])
        if hi > lo
    ]
    with ProcessPoolExecutor(max_workers=len(tasks)) as pool:
        results = list(pool.map(_exhaustive_chunk, tasks))
    count = 0
    parts = []
    for bad, certs, c in results:
        count += c
        if bad is not None:
            return bad, None, count
        parts.append(certs)
    certs = np.concatenate(parts) if certificates else None
    return None, certs, count


def check_arrow(
    C: FinStructure,
    B: FinStructure,
    A: FinStructure,
    k: int,
    mode: str = "exhaustive",
    *,
    budget: int = DEFAULT_BUDGET,
    jobs: int = 1,
    node_limit: int = 0,
    certificates: bool = True,
    solver: str = "minisat22",
    solve_with: str | None = None,
) -> ArrowVerdict:
    """Decide ``C -> (B)^A_k``.

    ``exhaustive`` enumerates every coloring and returns the lexicographically
    least bad one, or one homogeneous B-copy index per coloring.  ``search``
    backtracks and is inconclusive if ``node_limit`` is hit.  ``cnf`` solves
    the export with pysat, or with an external DIMACS solver at ``solve_with``.
    """
    if k < 1:
        raise ValueError("k must be positive")
    problem = ArrowProblem(C, B, A)
    meta: dict[str, Any] = {
        "k": k, "a_copies": problem.n, "b_copies": len(problem.b_copies),
        "backend": kernels.BACKEND,
    }
    if mode == "exhaustive":
        bad, certs, count = _exhaustive(problem, k, budget, jobs, certificates)
        meta["colorings"] = count
        meta["jobs"] = jobs
        if bad is not None:
            return ArrowVerdict(Status.FAILS, _verified_bad(problem, k, bad), None, mode, meta)
        return ArrowVerdict(Status.HOLDS, None, certs, mode, meta)
    if mode == "search":
        col, exhausted, nodes = _search(problem, k, node_limit)
        meta["nodes"] = nodes
        if col is not None:
            return ArrowVerdict(Status.FAILS, col, None, mode, meta)
        if exhausted:
            return ArrowVerdict(Status.HOLDS, None, None, mode, meta)
        return ArrowVerdict(Status.INCONCLUSIVE, None, None, mode, meta)
    if mode == "cnf":
        doc = export_cnf(C, B, A, k)
        meta.update(nvars=doc.nvars, nclauses=len(doc.clauses))
        model = solve_cnf(doc, solver=solver, solve_with=solve_with)
        meta["solver"] = solve_with or solver
        if model is None:
            return ArrowVerdict(Status.HOLDS, None, None, mode, meta)
        col = doc.decode(model)
        if find_homogeneous(B, col) is not None:
            raise AssertionError("solver model decodes to a coloring with a homogeneous copy")
        return ArrowVerdict(Status.FAILS, col, None, mode, meta)
    raise ValueError(f"unknown mode {mode!r}")


# -- CNF ----------------------------------------------------------------------

@dataclass(frozen=True)
class CnfDocument:
    """Bad-coloring existence as CNF; satisfiable iff the arrow fails.

    Variable ``(i-1)*k + j`` says copy ``i`` (1-based) has color ``j``.
    """

    problem: ArrowProblem = field(repr=False)
    k: int
    clauses: tuple[tuple[int, ...], ...]

    @property
    def nvars(self) -> int:
        return self.problem.n * self.k

    def var(self, i: int, j: int) -> int:
        return (i - 1) * self.k + j

    def copy_map(self) -> str:
        return "".join(
            f"c copy {i} = {{{','.join(map(str, c.vertex_set))}}}\n"
            for i, c in enumerate(self.problem.a_copies, start=1)
        )

    def to_dimacs(self, with_map: bool = True) -> str:
        lines = [self.copy_map()] if with_map else []
        lines.append(f"p cnf {self.nvars} {len(self.clauses)}\n")
        lines.extend(" ".join(map(str, c + (0,))) + "\n" for c in self.clauses)
        return "".join(lines)

    def write(self, path: str | os.PathLike) -> None:
        """DIMACS file plus a ``.map`` sidecar listing the copy order."""
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.to_dimacs())
        with open(f"{os.fspath(path)}.map", "w", encoding="utf-8", newline="\n") as fh:
            fh.write(self.copy_map())

    def decode(self, model: Sequence[int]) -> Coloring:
        true = {v for v in model if v > 0}
        colors = []
        for i in range(1, self.problem.n + 1):
            js = [j for j in range(1, self.k + 1) if self.var(i, j) in true]
            if len(js) != 1:
                raise ValueError(f"model gives copy {i} colors {js}")
            colors.append(js[0] - 1)
        return _coloring(self.problem, self.k, colors)


def export_cnf(C: FinStructure, B: FinStructure, A: FinStructure, k: int) -> CnfDocument:
    problem = ArrowProblem(C, B, A)
    var = lambda i, j: i * k + j  # noqa: E731  (0-based copy, 1-based color)
    clauses: list[tuple[int, ...]] = []
    for i in range(problem.n):
        clauses.append(tuple(var(i, j) for j in range(1, k + 1)))
        for j1 in range(1, k + 1):
            for j2 in range(j1 + 1, k + 1):
                clauses.append((-var(i, j1), -var(i, j2)))
    for h in problem.hyperedges:
        for j in range(1, k + 1):
            clauses.append(tuple(-var(i, j) for i in h))
    return CnfDocument(problem, k, tuple(clauses))


def solve_cnf(doc: CnfDocument, solver: str = "minisat22", solve_with: str | None = None):
    """A satisfying model as a list of literals, or ``None`` if unsatisfiable."""
    if solve_with is not None:
        return _external_solve(doc, solve_with)
    from pysat.solvers import Solver

    if any(len(c) == 0 for c in doc.clauses):
        return None
    with Solver(name=solver, bootstrap_with=[list(c) for c in doc.clauses]) as s:
        return s.get_model() if s.solve() else None


def _external_solve(doc: CnfDocument, path: str):
    exe = shutil.which(path) or path
    with tempfile.TemporaryDirectory() as tmp:
        fn = os.path.join(tmp, "arrow.cnf")
        doc.write(fn)
        proc = subprocess.run([exe, fn], capture_output=True, text=True)
    status = None
    model: list[int] = []
    for line in proc.stdout.splitlines():
        if line.startswith("s "):
            status = line[2:].strip()
        elif line.startswith("v "):
            model.extend(int(x) for x in line[2:].split() if x != "0")
    if status is None:
        status = {10: "SATISFIABLE", 20: "UNSATISFIABLE"}.get(proc.returncode)
    if status == "UNSATISFIABLE":
        return None
    if status == "SATISFIABLE":
        return model
    raise RuntimeError(f"solver {path} gave no verdict (exit {proc.returncode})")


# -- witnesses in a class -----------------------------------------------------

def ramsey_witness_search(
    K, B: FinStructure, A: FinStructure, k: int, cap: int | None = None,
    *, budget: int = DEFAULT_BUDGET, node_limit: int = 10**6,
) -> FinStructure | None:
    """Least member of ``K`` (by size, then generator order) with
    ``C -> (B)^A_k``.  ``None`` means nothing was found up to ``cap``, which
    says nothing about larger members."""
    cap = K.size_cap if cap is None else cap
    for n in range(B.size, cap + 1):
        for C in K.members(n):
            if first_embedding(B, C) is None:
                continue
            problem = ArrowProblem(C, B, A)
            if k**problem.n <= budget:
                v = check_arrow(C, B, A, k, "exhaustive", budget=budget, certificates=False)
            else:
                v = check_arrow(C, B, A, k, "search", node_limit=node_limit)
            if v.holds:
                return C
    return None
