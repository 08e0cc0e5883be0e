import pytest

from ramseylab.formulas import FormulaSet
from ramseylab.fraisse import weakly_saturated_ordered_graph
from ramseylab.indiscernibles import IndexedFamily, NotIndiscernible
from ramseylab.niplab import (
    PartitionedFormula, ShatterWitness, code_graph, collapse_analysis, ip_demo,
    ip_from_collapse, membership_structure, nip_demo, paley_graph, pattern_graph,
    shatter_check, subsets,
)
from ramseylab.structures import linear_order, ordered_graph, ordered_sum

EDGE = ordered_graph(2, [(0, 1)])
NONEDGE = ordered_graph(2)
R = PartitionedFormula.parse("rel(R, x1, x2)")


def identity(G):
    return IndexedFamily(G, G, tuple(range(G.size)))


def test_subsets_enumeration():
    assert subsets(2) == [frozenset(), {1}, {2}, {1, 2}]


def test_shatter_trivial_level():
    w = shatter_check(R, EDGE, 0)
    assert w.verify() and w.parameters == () and len(w.instances) == 1


def test_membership_shatters_three():
    M = membership_structure(3)
    phi = PartitionedFormula.parse("rel(E, x1, x2)")
    w = shatter_check(phi, M, 3)
    assert w.verify() and len(w.instances) == 8
    # the subset vertices themselves form a witness
    by_subsets = ShatterWitness(phi, M, 3, ((0,), (1,), (2,)), tuple((3 + s,) for s in range(8)))
    assert by_subsets.verify()


def test_linear_order_does_not_shatter_two():
    phi = PartitionedFormula.parse("lt(x1, x2)")
    assert shatter_check(phi, linear_order(6), 1) is not None
    assert shatter_check(phi, linear_order(6), 2) is None


def test_witness_detects_violations():
    M = linear_order(3)
    phi = PartitionedFormula.parse("lt(x1, x2)")
    # w_1 is empty and w_2 = {1}, so these instances are swapped
    w = ShatterWitness(phi, M, 1, ((1,),), ((0,), (2,)))
    assert not w.verify() and w.violations() == [(1, 1), (2, 1)]


def test_paley_graph_checks_arguments():
    assert paley_graph(5).edges() == [(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]
    for bad in (7, 9, 15):
        with pytest.raises(ValueError):
            paley_graph(bad)


def test_code_graph_examples():
    P = paley_graph(13)
    assert code_graph(R, P, ordered_graph(1)) is not None
    for G in (EDGE, NONEDGE):
        fam = code_graph(R, P, G)
        assert fam is not None
        a, b = fam.map
        assert P.holds("R", a + b) == G.holds("R", (0, 1))
    K4 = ordered_graph(4, [(i, j) for i in range(4) for j in range(i + 1, 4)])
    assert code_graph(R, K4, NONEDGE) is None


def test_code_graph_rejects_asymmetric_formula():
    with pytest.raises(ValueError):
        code_graph(PartitionedFormula.parse("lt(x1, x2)"), linear_order(4), EDGE)


def test_collapse_none_for_order_indiscernible():
    fam = IndexedFamily(EDGE, linear_order(2), (0, 1))
    assert collapse_analysis(fam, FormulaSet.parse(["lt(x1, x2)"])) is None


def test_collapse_requires_indiscernible_input():
    fam = IndexedFamily(ordered_graph(3), linear_order(3), (0, 2, 1))
    with pytest.raises(NotIndiscernible):
        collapse_analysis(fam, FormulaSet.parse(["lt(x1, x2)"]))


@pytest.mark.parametrize("text,polarity", [("rel(R, x1, x2)", 1), ("not(rel(R, x1, x2))", -1)])
def test_collapse_on_two_types_is_identity_walk(text, polarity):
    B = pattern_graph(None, 2)[0]
    fam = identity(B)
    rep = collapse_analysis(fam, FormulaSet.parse([text]))
    assert rep.n == 2 and rep.flip == (1, 2) and rep.polarity == polarity
    assert rep.walk == (rep.a, rep.b) and (rep.a_prime, rep.b_prime) == (rep.a, rep.b)
    assert rep.flip_weight() == 1
    assert set(rep.fg_difference()) == {("R", (0, 1)), ("R", (1, 0))}
    assert rep.check(fam)
    w = ip_from_collapse(rep, 2, None, fam)
    assert w.verify() and len(w.instances) == 4
    with pytest.raises(ValueError, match="host too small"):
        ip_from_collapse(rep, 3, None, fam)


def test_collapse_on_three_types_walks():
    S = weakly_saturated_ordered_graph(3).structure
    fam = identity(S)
    rep = collapse_analysis(fam, FormulaSet.parse(["rel(R, x1, x3)"]))
    assert rep.n == 3 and rep.flip_weight() == 1 and rep.check(fam)
    assert rep.table[rep.a_prime] != rep.table[rep.b_prime]
    # the 3-ary pattern graph has a u vertex; extend the index to host it
    big = identity(ordered_sum([S, pattern_graph(rep, 2, S)[0]]))
    rep2 = collapse_analysis(big, FormulaSet.parse(["rel(R, x1, x3)"]))
    assert ip_from_collapse(rep2, 2, None, big).verify()


def test_host_must_be_the_index():
    B = pattern_graph(None, 1)[0]
    fam = identity(B)
    rep = collapse_analysis(fam, FormulaSet.parse(["rel(R, x1, x2)"]))
    with pytest.raises(ValueError):
        ip_from_collapse(rep, 1, ordered_graph(3), fam)


def test_pattern_graph_level_one():
    B, Y, Z, U = pattern_graph(None, 1)
    assert B.size == 3 and U == []
    assert B.edges() == [tuple(sorted((Y[1], Z[0])))]


def test_ip_demo_membership():
    rep = ip_demo("membership", m=2)
    assert rep.shatter.verify() and rep.ip_side
    assert rep.collapse.theta.text == "or(rel(E, x1, x2), rel(E, x2, x1))"
    assert rep.collapse.n == 2 and rep.collapse.flip == (1, 2)
    assert rep.witness.verify() and len(rep.witness.instances) == 4


def test_ip_demo_paley():
    rep = ip_demo("paley", m=2)
    assert rep.witness is not None and rep.witness.verify()


def test_nip_demo():
    rep = nip_demo(2)
    assert rep.shatter is None and rep.collapse is None
    assert set(rep.order_table) == {2, 3}
    assert all(len(v) == 1 for v in rep.order_table.values())
