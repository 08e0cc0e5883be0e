"""Text formats: structure files, family files, certificates and run reports.

Structure files are line oriented::

    # comment
    signature: <:2 order, R:2 symmetric antireflexive
    domain: 3
    rel R: 0 1, 1 2

``;`` also ends a line.  A relation line may drop the ``rel`` keyword.  The
order relation is implicit unless listed, in which case the structure is
relabeled so that it becomes the natural order.
"""
from __future__ import annotations

import dataclasses
import enum
import hashlib
import itertools
import json
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

import numpy as np

from . import niplab
from .fraisse import weakly_saturated_ordered_graph
from .indiscernibles import IndexedFamily
from .structures import (
    Embedding,
    FinStructure,
    RelationSymbol,
    Signature,
    StructureError,
    linear_order,
    ordered_graph,
)
from .qftypes import QfType
from .verdicts import Status

__all__ = [
    "ParseError",
    "parse_signature",
    "parse_structure",
    "print_structure",
    "print_signature",
    "builtin_structure",
    "load_structure",
    "parse_family",
    "print_family",
    "load_family",
    "jsonable",
    "structure_from_json",
    "sha256_text",
    "RunReport",
]


class ParseError(ValueError):
    def __init__(self, msg: str, line: int | None = None, column: int | None = None):
        where = ""
        if line is not None:
            where = f"line {line}" + (f", column {column}" if column is not None else "") + ": "
        super().__init__(where + msg)
        self.line = line
        self.column = column


_FLAGS = {"order", "symmetric", "antireflexive"}


def _segments(text: str):
    """``(line, column, content)`` for each nonblank ``;``-separated piece."""
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        col = 0
        for piece in body.split(";"):
            stripped = piece.strip()
            if stripped:
                yield lineno, col + len(piece) - len(piece.lstrip()) + 1, stripped
            col += len(piece) + 1


def parse_signature(text: str, line: int | None = None, column: int | None = None) -> Signature:
    rels = []
    order = None
    for part in text.split(","):
        words = part.split()
        if not words:
            raise ParseError("empty relation declaration", line, column)
        m = re.fullmatch(r"(.+):(\d+)", words[0])
        if not m:
            raise ParseError(f"expected name:arity, found {words[0]!r}", line, column)
        name, arity = m.group(1), int(m.group(2))
        flags = set(words[1:])
        bad = flags - _FLAGS
        if bad:
            raise ParseError(f"unknown flag {sorted(bad)[0]!r} on {name}", line, column)
        if "order" in flags:
            if order is not None:
                raise ParseError("two order symbols", line, column)
            order = name
        try:
            rels.append(RelationSymbol(name, arity, "symmetric" in flags, "antireflexive" in flags))
        except ValueError as exc:
            raise ParseError(str(exc), line, column) from None
    try:
        return Signature(tuple(rels), order)
    except ValueError as exc:
        raise ParseError(str(exc), line, column) from None


def print_signature(sig: Signature) -> str:
    parts = []
    for r in sig.relations:
        flags = [f for f, on in (("order", r.name == sig.order), ("symmetric", r.symmetric),
                                 ("antireflexive", r.antireflexive)) if on]
        parts.append(" ".join([f"{r.name}:{r.arity}", *flags]))
    return ", ".join(parts)


def parse_structure(text: str) -> FinStructure:
    sig = None
    size = None
    tables: dict[str, list[tuple[int, ...]]] = {}
    for line, col, seg in _segments(text):
        key, sep, rest = seg.partition(":")
        if not sep:
            raise ParseError(f"expected 'key: value', found {seg!r}", line, col)
        key = key.strip()
        if key == "signature":
            if sig is not None:
                raise ParseError("second signature line", line, col)
            sig = parse_signature(rest, line, col)
            continue
        if key == "domain":
            try:
                size = int(rest.strip())
            except ValueError:
                raise ParseError(f"domain must be a natural number, found {rest.strip()!r}", line, col) from None
            if size < 0:
                raise ParseError("domain must be a natural number", line, col)
            continue
        name = key[4:].strip() if key.startswith("rel ") else key
        if sig is None:
            raise ParseError("relation line before the signature", line, col)
        sym = sig.get(name)
        if sym is None:
            raise ParseError(f"undeclared relation {name!r}", line, col)
        rows = tables.setdefault(name, [])
        offset = col + len(seg) - len(rest)
        for chunk in rest.split(","):
            if not chunk.strip():
                if rest.strip():
                    raise ParseError("empty tuple", line, offset)
                continue
            try:
                t = tuple(int(v) for v in chunk.split())
            except ValueError:
                raise ParseError(f"bad tuple {chunk.strip()!r}", line, offset) from None
            if len(t) != sym.arity:
                raise ParseError(f"{name} has arity {sym.arity}, tuple {t} does not", line, offset)
            rows.append(t)
            offset += len(chunk) + 1
    if sig is None:
        raise ParseError("missing signature line")
    if size is None:
        raise ParseError("missing domain line")
    try:
        return FinStructure(sig, size, tables)
    except StructureError as exc:
        raise ParseError(str(exc)) from None


def print_structure(S: FinStructure) -> str:
    lines = [f"signature: {print_signature(S.signature)}", f"domain: {S.size}"]
    for sym in S.signature.proper:
        rows = sorted(S.table(sym.name))
        if sym.symmetric:
            rows = [t for t in rows if t == min(itertools.permutations(t))]
        body = ", ".join(" ".join(map(str, t)) for t in rows)
        lines.append(f"rel {sym.name}:" + (f" {body}" if body else ""))
    return "\n".join(lines) + "\n"


# -- builtin ids and references ------------------------------------------------

def builtin_structure(ident: str) -> FinStructure | None:
    """``order<N>``, ``point``, ``edge``, ``nonedge``, ``clique<N>``,
    ``empty<N>``, ``path<N>``, ``sat<L>``, ``paley<q>``, ``membership<k>``."""
    if ident == "point":
        return ordered_graph(1)
    if ident == "edge":
        return ordered_graph(2, [(0, 1)])
    if ident == "nonedge":
        return ordered_graph(2)
    m = re.fullmatch(r"(order|clique|empty|path|sat|paley|membership)(\d+)", ident)
    if not m:
        return None
    kind, n = m.group(1), int(m.group(2))
    if kind == "order":
        return linear_order(n)
    if kind == "clique":
        return ordered_graph(n, [(a, b) for a in range(n) for b in range(a + 1, n)])
    if kind == "empty":
        return ordered_graph(n)
    if kind == "path":
        return ordered_graph(n, [(a, a + 1) for a in range(n - 1)])
    if kind == "sat":
        return weakly_saturated_ordered_graph(n).structure
    return niplab.paley_graph(n) if kind == "paley" else niplab.membership_structure(n)


def _read(path: Path) -> str:
    try:
        return path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise FileNotFoundError(f"no such file: {path}") from None


def load_structure(ref: str, base: Path | None = None) -> tuple[FinStructure, str]:
    """A builtin id or a structure file path; returns the structure and the
    text whose hash identifies the input."""
    S = builtin_structure(ref)
    if S is not None:
        return S, print_structure(S)
    path = Path(ref) if base is None or Path(ref).is_absolute() else base / ref
    text = _read(path)
    try:
        return parse_structure(text), text
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


# -- family files -------------------------------------------------------------------

def parse_family(text: str, base: Path | None = None):
    """Sections ``index <ref>`` and ``target <ref>`` (or ``index:`` followed by an
    indented structure block) and ``map: i -> m1 ... ml`` lines."""
    parts: dict[str, FinStructure] = {}
    maps: dict[int, tuple[int, ...]] = {}
    lines = text.splitlines()
    i = 0
    while i < len(lines):
        raw = lines[i]
        line = raw.split("#", 1)[0].rstrip()
        i += 1
        if not line.strip():
            continue
        if raw[:1].isspace():
            raise ParseError("unexpected indented line", i)
        m = re.fullmatch(r"(index|target)\s*(:?)\s*(\S*)", line)
        if m:
            section, colon, ref = m.groups()
            if section in parts:
                raise ParseError(f"second {section} section", i)
            if ref:
                parts[section], _ = load_structure(ref, base)
                continue
            block = []
            start = i
            while i < len(lines) and (not lines[i].strip() or lines[i][:1].isspace()):
                block.append(lines[i])
                i += 1
            try:
                parts[section] = parse_structure("\n".join(block))
            except ParseError as exc:
                line_no = None if exc.line is None else exc.line + start
                raise ParseError(f"{section} block: {exc}", line_no) from None
            continue
        m = re.fullmatch(r"map:\s*(\d+)\s*->\s*([\d\s]+)", line.strip())
        if m:
            k = int(m.group(1))
            if k in maps:
                raise ParseError(f"element {k} mapped twice", i)
            maps[k] = tuple(int(v) for v in m.group(2).split())
            continue
        raise ParseError(f"unrecognized line {line.strip()!r}", i)
    for section in ("index", "target"):
        if section not in parts:
            raise ParseError(f"missing {section} section")
    index = parts["index"]
    missing = [k for k in range(index.size) if k not in maps]
    if missing:
        raise ParseError(f"no map line for index element {missing[0]}")
    extra = [k for k in maps if k >= index.size]
    if extra:
        raise ParseError(f"map line for {extra[0]}, outside the index")
    try:
        return IndexedFamily(index, parts["target"], tuple(maps[k] for k in range(index.size)))
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def print_family(fam) -> str:
    out = []
    for section, S in (("index", fam.index), ("target", fam.target)):
        out.append(f"{section}:")
        out.extend("  " + ln for ln in print_structure(S).splitlines())
    out.extend(f"map: {i} -> {' '.join(map(str, a))}" for i, a in enumerate(fam.map))
    return "\n".join(out) + "\n"


def load_family(ref: str):
    path = Path(ref)
    text = _read(path)
    try:
        return parse_family(text, path.parent), text
    except ParseError as exc:
        raise ParseError(f"{path}: {exc}") from None


# -- certificates and reports ------------------------------------------------------

def jsonable(obj: Any) -> Any:
    """Plain JSON data for certificates; structures keep their tables."""
    if obj is None or isinstance(obj, (bool, int, float, str)):
        return obj
    if isinstance(obj, FinStructure):
        return {
            "signature": print_signature(obj.signature),
            "domain": obj.size,
            "rel": {name: sorted(map(list, obj.table(name))) for name in obj.tables},
        }
    if isinstance(obj, Embedding):
        return {"source": jsonable(obj.source), "map": list(obj.map)}
    if isinstance(obj, QfType):
        return obj.describe()
    if isinstance(obj, enum.Enum):
        return obj.value
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, dict):
        return {_key(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, set, frozenset)):
        items = [jsonable(v) for v in obj]
        return sorted(items, key=repr) if isinstance(obj, (set, frozenset)) else items
    if dataclasses.is_dataclass(obj):
        return {f.name: jsonable(getattr(obj, f.name)) for f in dataclasses.fields(obj) if f.repr}
    return repr(obj)


def _key(k: Any) -> str:
    if isinstance(k, str):
        return k
    if isinstance(k, FinStructure):
        return print_structure(k).replace("\n", "; ").strip("; ")
    if isinstance(k, tuple):
        return " ".join(map(str, k))
    return str(jsonable(k))


def structure_from_json(data: dict) -> FinStructure:
    sig = parse_signature(data["signature"])
    return FinStructure(sig, data["domain"], {k: [tuple(t) for t in v] for k, v in data["rel"].items()})


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


@dataclass
class RunReport:
    command: str
    inputs: list[tuple[str, str]] = field(default_factory=list)  # (name, sha256)
    status: Status | None = None
    lines: list[str] = field(default_factory=list)
    certificate: Any = None
    timing: dict[str, float] = field(default_factory=dict)

    def add_input(self, name: str, text: str) -> None:
        self.inputs.append((name, sha256_text(text)))

    def render(self) -> str:
        out = list(self.lines)
        out.append(f"@command {self.command}")
        out.extend(f"@input {name} sha256={digest}" for name, digest in self.inputs)
        if self.status is not None:
            out.append(f"@verdict {self.status.value}")
        if self.certificate is not None:
            out.append("@certificate " + json.dumps(jsonable(self.certificate), sort_keys=True,
                                                    separators=(",", ":")))
        out.append("@timing " + " ".join(f"{k}={v:.3f}s" for k, v in self.timing.items()))
        return "\n".join(out) + "\n"
