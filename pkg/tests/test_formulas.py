import pytest
from hypothesis import given, strategies as st

from ramseylab.formulas import (
    FormulaError, FormulaSet, atomic_formulas, parse_formula, parse_formula_file,
)
from ramseylab.structures import ORDERED_GRAPH, linear_order, ordered_graph

from strategies import ordered_graphs

PATH = ordered_graph(3, [(0, 1), (1, 2)])


def test_atoms_and_connectives():
    f = parse_formula("and(rel(R, x1, x2), not(eq(x1, x2)))")
    assert f.arity == 2
    assert f(PATH, (0, 1)) and not f(PATH, (0, 2))
    assert parse_formula("implies(false, false)")(PATH, ())


def test_quantifiers_range_over_domain():
    common = parse_formula("exists(y, and(rel(R, x1, y), rel(R, y, x2)))")
    assert common(PATH, (0, 2)) and not common(PATH, (0, 1))
    top = parse_formula("forall(y, or(eq(x1, y), lt(y, x1)))")
    assert top(PATH, (2,)) and not top(PATH, (1,))


def test_explicit_arity_pads():
    f = parse_formula("lt(x1, x2)", arity=3)
    assert f.arity == 3 and f(linear_order(3), (0, 1, 0))


def test_parse_errors():
    for bad in ("and(", "rel(R, x1", "lt(x1, x2) extra", "?", "exists(x1)"):
        with pytest.raises(FormulaError):
            parse_formula(bad)
    with pytest.raises(FormulaError):
        parse_formula("lt(x1, x3)", arity=2)


def test_lt_needs_order():
    from ramseylab.structures import reduct

    with pytest.raises(FormulaError):
        parse_formula("lt(x1, x2)")(reduct(PATH, ["R"]), (0, 1))


def test_formula_file():
    fs = parse_formula_file("# comment\n2: rel(R, x1, x2)\nlt(x1, x2)\n\n3: true\n", ORDERED_GRAPH)
    assert [f.arity for f in fs] == [2, 2, 3]
    assert fs.max_arity == 3 and len(fs.of_arity(2)) == 2
    with pytest.raises(FormulaError, match="line 2"):
        parse_formula_file("true\nrel(\n")
    with pytest.raises(FormulaError, match="unknown relations"):
        parse_formula_file("rel(S, x1, x2)", ORDERED_GRAPH)


def test_width_counts_slots():
    fs = FormulaSet.parse(["rel(R, x1, x4)", "lt(x1, x2)"])
    w = fs.for_width(2)
    assert w.max_arity == 2 and len(w.of_arity(1)) == 1
    with pytest.raises(FormulaError):
        FormulaSet.parse(["rel(R, x1, x3)"]).for_width(2)


def test_atomic_formulas_cover_types():
    fs = atomic_formulas(ORDERED_GRAPH, 2)
    texts = {f.text for f in fs}
    assert "rel(R, x1, x2)" in texts and "eq(x1, x2)" in texts


def test_negate_and_text_round_trip():
    f = parse_formula("or(rel(R, x1, x2), exists(y, lt(y, x1)))")
    assert parse_formula(f.text) == f
    assert f.negate()(PATH, (0, 2)) == (not f(PATH, (0, 2)))


@given(ordered_graphs(min_size=1, max_size=5), st.data())
def test_permute_reorders_arguments(G, data):
    f = parse_formula("and(rel(R, x1, x2), lt(x2, x3))")
    order = data.draw(st.permutations(range(3)))
    g = f.permute(order)
    v = data.draw(st.lists(st.integers(0, G.size - 1), min_size=3, max_size=3))
    w = [None] * 3
    for i in range(3):
        w[order[i]] = v[i]
    assert g(G, v) == f(G, w)
