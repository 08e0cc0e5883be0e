"""First-order formulas over finite structures.

Prefix syntax::

    and(f, g, ...)  or(f, g, ...)  not(f)  implies(f, g)
    exists(y, f)    forall(y, f)   true    false
    rel(R, x1, x2)  eq(x1, x2)     lt(x1, x2)

``lt`` is sugar for the signature's order symbol.  The free variables of a
formula of arity ``m`` are ``x1..xm``; quantifiers range over the whole
domain of the structure it is evaluated in.
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .structures import FinStructure, Signature

__all__ = [
    "FormulaError",
    "Formula",
    "FormulaSet",
    "parse_formula",
    "parse_formula_file",
    "atomic_formulas",
]


class FormulaError(ValueError):
    pass


_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_<>=!][A-Za-z0-9_<>=!']*)|(?P<punct>[(),]))")
_CONNECTIVES = {"and", "or", "not", "implies", "exists", "forall"}
_ATOMS = {"rel", "eq", "lt"}
_FREE = re.compile(r"x([1-9][0-9]*)$")


def _tokens(text: str):
    pos = 0
    out = []
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            raise FormulaError(f"unexpected character {text[pos:].lstrip()[:1]!r} at column {pos + 1}")
        tok = m.group("name") or m.group("punct")
        out.append((tok, m.start(m.lastgroup) + 1))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str):
        self.toks = _tokens(text)
        self.i = 0

    def peek(self):
        return self.toks[self.i][0] if self.i < len(self.toks) else None

    def take(self, want: str | None = None) -> str:
        if self.i >= len(self.toks):
            raise FormulaError("unexpected end of formula")
        tok, col = self.toks[self.i]
        if want is not None and tok != want:
            raise FormulaError(f"expected {want!r} at column {col}, found {tok!r}")
        self.i += 1
        return tok

    def args(self) -> list:
        self.take("(")
        items = [self.formula_or_name()]
        while self.peek() == ",":
            self.take(",")
            items.append(self.formula_or_name())
        self.take(")")
        return items

    def formula_or_name(self):
        tok = self.peek()
        if tok in _CONNECTIVES or tok in _ATOMS or tok in ("true", "false"):
            return self.formula()
        return self.take()

    def formula(self):
        tok = self.take()
        if tok in ("true", "false"):
            return ("const", tok == "true")
        if tok not in _CONNECTIVES and tok not in _ATOMS:
            raise FormulaError(f"unknown connective or atom {tok!r}")
        args = self.args()

        def sub(a):
            if not isinstance(a, tuple):
                raise FormulaError(f"{tok}: expected a formula, found {a!r}")
            return a

        def var(a):
            if isinstance(a, tuple):
                raise FormulaError(f"{tok}: expected a variable")
            return a

        if tok == "not":
            if len(args) != 1:
                raise FormulaError("not takes one argument")
            return ("not", sub(args[0]))
        if tok in ("and", "or"):
            if not args:
                raise FormulaError(f"{tok} needs arguments")
            return (tok, tuple(sub(a) for a in args))
        if tok == "implies":
            if len(args) != 2:
                raise FormulaError("implies takes two arguments")
            return ("implies", sub(args[0]), sub(args[1]))
        if tok in ("exists", "forall"):
            if len(args) != 2:
                raise FormulaError(f"{tok} takes a variable and a formula")
            return (tok, var(args[0]), sub(args[1]))
        if tok == "rel":
            if len(args) < 2:
                raise FormulaError("rel needs a relation name and arguments")
            return ("rel", var(args[0]), tuple(var(a) for a in args[1:]))
        if len(args) != 2:
            raise FormulaError(f"{tok} takes two variables")
        return (tok, var(args[0]), var(args[1]))


def _free_vars(node, bound=frozenset()) -> set[str]:
    kind = node[0]
    if kind == "const":
        return set()
    if kind == "rel":
        return {v for v in node[2] if v not in bound}
    if kind in ("eq", "lt"):
        return {v for v in node[1:] if v not in bound}
    if kind == "not":
        return _free_vars(node[1], bound)
    if kind in ("and", "or"):
        return set().union(*(_free_vars(f, bound) for f in node[1]))
    if kind == "implies":
        return _free_vars(node[1], bound) | _free_vars(node[2], bound)
    return _free_vars(node[2], bound | {node[1]})


def _show(node) -> str:
    kind = node[0]
    if kind == "const":
        return "true" if node[1] else "false"
    if kind == "rel":
        return f"rel({node[1]}, {', '.join(node[2])})"
    if kind in ("eq", "lt"):
        return f"{kind}({node[1]}, {node[2]})"
    if kind == "not":
        return f"not({_show(node[1])})"
    if kind in ("and", "or"):
        return f"{kind}({', '.join(_show(f) for f in node[1])})"
    if kind == "implies":
        return f"implies({_show(node[1])}, {_show(node[2])})"
    return f"{kind}({node[1]}, {_show(node[2])})"


def _rename(node, mapping: dict[str, str]):
    kind = node[0]
    if kind == "const":
        return node
    if kind == "rel":
        return ("rel", node[1], tuple(mapping.get(v, v) for v in node[2]))
    if kind in ("eq", "lt"):
        return (kind, mapping.get(node[1], node[1]), mapping.get(node[2], node[2]))
    if kind == "not":
        return ("not", _rename(node[1], mapping))
    if kind in ("and", "or"):
        return (kind, tuple(_rename(f, mapping) for f in node[1]))
    if kind == "implies":
        return ("implies", _rename(node[1], mapping), _rename(node[2], mapping))
    inner = {k: v for k, v in mapping.items() if k != node[1]}
    if node[1] in inner.values():
        raise FormulaError(f"renaming would capture bound variable {node[1]}")
    return (kind, node[1], _rename(node[2], inner))


def _compile(node) -> Callable[[FinStructure, dict], bool]:
    kind = node[0]
    if kind == "const":
        val = node[1]
        return lambda S, env: val
    if kind == "rel":
        name, vs = node[1], node[2]
        return lambda S, env: S.holds(name, tuple(env[v] for v in vs))
    if kind == "eq":
        a, b = node[1], node[2]
        return lambda S, env: env[a] == env[b]
    if kind == "lt":
        a, b = node[1], node[2]

        def lt(S, env):
            if S.signature.order is None:
                raise FormulaError("lt used on an unordered structure")
            return S.holds(S.signature.order, (env[a], env[b]))

        return lt
    if kind == "not":
        f = _compile(node[1])
        return lambda S, env: not f(S, env)
    if kind == "and":
        fs = [_compile(f) for f in node[1]]
        return lambda S, env: all(f(S, env) for f in fs)
    if kind == "or":
        fs = [_compile(f) for f in node[1]]
        return lambda S, env: any(f(S, env) for f in fs)
    if kind == "implies":
        f, g = _compile(node[1]), _compile(node[2])
        return lambda S, env: (not f(S, env)) or g(S, env)
    v, body = node[1], _compile(node[2])
    quant = any if kind == "exists" else all
    return lambda S, env: quant(body(S, {**env, v: w}) for w in range(S.size))


@dataclass(frozen=True)
class Formula:
    """A formula with free variables among ``x1..x{arity}``."""

    node: tuple
    arity: int
    _fn: Callable = field(compare=False, repr=False, default=None)

    def __post_init__(self):
        for v in _free_vars(self.node):
            m = _FREE.match(v)
            if not m or int(m.group(1)) > self.arity:
                raise FormulaError(f"free variable {v} is not among x1..x{self.arity}")
        object.__setattr__(self, "_fn", _compile(self.node))

    @property
    def text(self) -> str:
        return _show(self.node)

    def __str__(self):
        return self.text

    def __call__(self, S: FinStructure, values: Sequence[int]) -> bool:
        if len(values) != self.arity:
            raise FormulaError(f"expected {self.arity} values, got {len(values)}")
        return self._fn(S, {f"x{i + 1}": v for i, v in enumerate(values)})

    def negate(self) -> "Formula":
        return Formula(("not", self.node), self.arity)

    def permute(self, order: Sequence[int]) -> "Formula":
        """Formula ``g`` with ``g(v) = self(w)`` where ``w[order[i]] = v[i]``."""
        mapping = {f"x{order[i] + 1}": f"x{i + 1}" for i in range(self.arity)}
        # rename through fresh names to avoid collisions
        tmp = {k: f"__{v}" for k, v in mapping.items()}
        back = {f"__{v}": v for v in mapping.values()}
        return Formula(_rename(_rename(self.node, tmp), back), self.arity)

    def relations(self) -> set[str]:
        out = set()

        def walk(n):
            if n[0] == "rel":
                out.add(n[1])
            elif n[0] == "not":
                walk(n[1])
            elif n[0] in ("and", "or"):
                for f in n[1]:
                    walk(f)
            elif n[0] == "implies":
                walk(n[1])
                walk(n[2])
            elif n[0] in ("exists", "forall"):
                walk(n[2])

        walk(self.node)
        return out


def parse_formula(text: str, arity: int | None = None) -> Formula:
    """Parse prefix syntax; the arity defaults to the largest free ``xi``."""
    p = _Parser(text)
    node = p.formula()
    if p.peek() is not None:
        raise FormulaError(f"trailing input at column {p.toks[p.i][1]}")
    if arity is None:
        idx = [int(m.group(1)) for v in _free_vars(node) if (m := _FREE.match(v))]
        arity = max(idx, default=0)
    return Formula(node, arity)


@dataclass(frozen=True)
class FormulaSet:
    """A finite list Δ of formulas read against families of image ``width``.

    A formula with ``m * width`` free variables talks about ``m`` index
    slots; :meth:`of_arity` and :attr:`max_arity` count slots.
    """

    formulas: tuple[Formula, ...]
    signature: Signature | None = None
    width: int = 1

    def __post_init__(self):
        object.__setattr__(self, "formulas", tuple(self.formulas))
        if self.width < 1:
            raise FormulaError("width must be positive")
        for f in self.formulas:
            if f.arity % self.width:
                raise FormulaError(f"{f}: arity {f.arity} is not a multiple of width {self.width}")
        if self.signature is not None:
            names = set(self.signature.names)
            for f in self.formulas:
                missing = f.relations() - names
                if missing:
                    raise FormulaError(f"{f}: unknown relations {sorted(missing)}")

    def __iter__(self):
        return iter(self.formulas)

    def __len__(self):
        return len(self.formulas)

    @property
    def max_arity(self) -> int:
        return max((f.arity // self.width for f in self.formulas), default=0)

    def of_arity(self, m: int) -> list[tuple[int, Formula]]:
        return [(i, f) for i, f in enumerate(self.formulas) if f.arity == m * self.width]

    def for_width(self, width: int) -> "FormulaSet":
        return self if width == self.width else FormulaSet(self.formulas, self.signature, width)

    @classmethod
    def parse(cls, texts: Iterable[str], signature: Signature | None = None) -> "FormulaSet":
        return cls(tuple(parse_formula(t) for t in texts), signature)


def parse_formula_file(text: str, signature: Signature | None = None) -> FormulaSet:
    """Lines ``arity: formula`` (or a bare formula); ``#`` starts a comment."""
    out = []
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        arity = None
        m = re.match(r"(\d+)\s*:(.*)$", line)
        if m:
            arity, line = int(m.group(1)), m.group(2).strip()
        try:
            out.append(parse_formula(line, arity))
        except FormulaError as exc:
            raise FormulaError(f"line {lineno}: {exc}") from None
    return FormulaSet(tuple(out), signature)


def atomic_formulas(signature: Signature, max_arity: int) -> FormulaSet:
    """Every atom ``rel(R, x..)`` over ``x1..xm`` that mentions ``xm``, plus
    equalities, for ``m <= max_arity``; arity is ``m``."""
    out = []
    for m in range(1, max_arity + 1):
        xs = [f"x{i + 1}" for i in range(m)]
        for i in range(m - 1):
            out.append(Formula(("eq", xs[i], xs[m - 1]), m))
        for sym in signature.relations:
            for t in itertools.product(range(m), repeat=sym.arity):
                if m - 1 in t:
                    out.append(Formula(("rel", sym.name, tuple(xs[i] for i in t)), m))
    return FormulaSet(tuple(out), signature)
