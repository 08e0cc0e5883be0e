"""Shared hypothesis strategies."""
import itertools

from hypothesis import strategies as st

from ramseylab.structures import ordered_graph


@st.composite
def ordered_graphs(draw, min_size=0, max_size=6):
    n = draw(st.integers(min_size, max_size))
    pairs = list(itertools.combinations(range(n), 2))
    mask = draw(st.lists(st.booleans(), min_size=len(pairs), max_size=len(pairs)))
    return ordered_graph(n, [p for p, b in zip(pairs, mask) if b])
