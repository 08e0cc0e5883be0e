"""Brute-force references for extraction, independent of the library's
colouring code."""
import itertools

from ramseylab.qftypes import qftype_of
from ramseylab.structures import Embedding, iter_embeddings


def pattern_values(fam, delta, tup, r, surjective=False):
    """Δ on every tuple of length <= r drawn from the entries of ``tup``;
    with ``surjective`` only tuples using every entry."""
    delta = delta.for_width(fam.width)
    out = []
    for m in range(1, r + 1):
        for _, f in delta.of_arity(m):
            for pick in itertools.product(range(len(tup)), repeat=m):
                if surjective and len(set(pick)) < len(tup):
                    continue
                out.append(f(fam.target, fam.images([tup[p] for p in pick])))
    return tuple(out)


def homogeneous_copies(raw, delta, shape):
    """Every embedding of ``shape`` into the raw index whose pulled-back
    family gives equal Δ-values to tuples of equal qf type."""
    delta = delta.for_width(raw.width)
    out = []
    for f in iter_embeddings(shape, raw.index):
        sub = raw.restrict(Embedding(shape, raw.index, f))
        ok = True
        for m in range(1, delta.max_arity + 1):
            fs = delta.of_arity(m)
            if not fs:
                continue
            seen = {}
            for t in itertools.product(range(shape.size), repeat=m):
                key = qftype_of(t, shape).word
                val = tuple(g(sub.target, sub.images(t)) for _, g in fs)
                if seen.setdefault(key, val) != val:
                    ok = False
                    break
            if not ok:
                break
        if ok:
            out.append(f)
    return out


def stage_is_homogeneous(raw, delta, r, host, qtypes, surjective=True):
    """In ``host`` every listed type has one pattern-value vector.

    Stages run from high arity to low, so before the last stage only the
    patterns using every entry of a tuple are settled."""
    host = sorted(host)
    for q in qtypes:
        vals = {
            pattern_values(raw, delta, t, r, surjective)
            for t in itertools.combinations(host, q.arity)
            if qftype_of(t, raw.index).word == q.word
        }
        if len(vals) > 1:
            return False
    return True
