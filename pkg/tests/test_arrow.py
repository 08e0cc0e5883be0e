import itertools

import pytest
from hypothesis import given, settings, strategies as st

from ramseylab.arrow import (
    ArrowProblem, BudgetExceeded, Coloring, bad_coloring_search, check_arrow,
    export_cnf, find_homogeneous, ramsey_witness_search, solve_cnf,
)
from ramseylab.classes import linear_orders, ordered_graphs as og_class
from ramseylab.structures import enumerate_copies, linear_order, ordered_graph
from ramseylab.verdicts import Status

from strategies import ordered_graphs

L = linear_order
K3 = ordered_graph(3, [(0, 1), (0, 2), (1, 2)])


def brute_force(C, B, A, k):
    """Reference: scan every coloring of the A-copies."""
    copies = [c.vertex_set for c in enumerate_copies(A, C)]
    for colors in itertools.product(range(1, k + 1), repeat=len(copies)):
        col = Coloring(A, C, k, tuple(copies), colors)
        if find_homogeneous(B, col) is None:
            return False
    return True


def test_find_homogeneous_one_color():
    col = Coloring.from_function(L(2), L(4), 1, lambda s: 1)
    assert find_homogeneous(L(3), col).vertex_set == (0, 1, 2)


def test_find_homogeneous_no_copy():
    col = Coloring.from_function(L(2), L(2), 2, lambda s: 1)
    assert find_homogeneous(L(3), col) is None


def test_find_homogeneous_planted_triangle():
    # pairs inside {1,3,5} get color 1, everything else alternates
    def color(s):
        if set(s) <= {1, 3, 5}:
            return 1
        return 2 if (s[0] + s[1]) % 2 else 1

    col = Coloring.from_function(L(2), L(6), 2, color)
    hit = find_homogeneous(L(3), col)
    triples = [t for t in itertools.combinations(range(6), 3)
               if len({color(p) for p in itertools.combinations(t, 2)}) == 1]
    assert hit.vertex_set == triples[0]
    assert (1, 3, 5) in triples


def test_bad_coloring_examples():
    bad = bad_coloring_search(L(5), L(3), L(2), 2)
    assert bad is not None and find_homogeneous(L(3), bad) is None
    assert bad_coloring_search(L(6), L(3), L(2), 2) is None
    vac = bad_coloring_search(L(2), L(3), L(2), 2)
    assert set(vac.assignment) == {1}


def test_bad_coloring_budget():
    with pytest.raises(BudgetExceeded):
        bad_coloring_search(L(6), L(3), L(2), 2, node_limit=5)


def test_check_arrow_ground_truth():
    v6 = check_arrow(L(6), L(3), L(2), 2)
    assert v6.status is Status.HOLDS
    assert len(v6.homogeneity_certificates) == 2**15
    v5 = check_arrow(L(5), L(3), L(2), 2)
    assert v5.fails and find_homogeneous(L(3), v5.bad_coloring) is None
    assert check_arrow(L(4), L(3), L(2), 1).holds


def test_certificates_name_homogeneous_copies():
    P = ArrowProblem(L(6), L(3), L(2))
    v = check_arrow(L(6), L(3), L(2), 2)
    for code in (0, 12345, 2**15 - 1):
        colors = [1 + (code >> (P.n - 1 - i) & 1) for i in range(P.n)]
        copy = v.certificate_for(P, colors)
        col = Coloring(L(2), L(6), 2, tuple(c.vertex_set for c in P.a_copies), tuple(colors))
        assert len({col.color_of(p) for p in itertools.combinations(copy.vertex_set, 2)}) == 1


def test_exhaustive_budget():
    with pytest.raises(BudgetExceeded):
        check_arrow(L(6), L(3), L(2), 2, budget=100)


def test_search_mode_and_inconclusive():
    assert check_arrow(L(6), L(3), L(2), 2, "search").holds
    assert check_arrow(L(5), L(3), L(2), 2, "search").fails
    v = check_arrow(L(6), L(3), L(2), 2, "search", node_limit=3)
    assert v.status is Status.INCONCLUSIVE


def test_parallel_matches_serial():
    a = check_arrow(L(6), L(3), L(2), 2, jobs=2)
    b = check_arrow(L(6), L(3), L(2), 2)
    assert (a.homogeneity_certificates == b.homogeneity_certificates).all()
    c = check_arrow(L(5), L(3), L(2), 2, jobs=2)
    d = check_arrow(L(5), L(3), L(2), 2)
    assert c.bad_coloring == d.bad_coloring


def test_cnf_examples():
    doc5 = export_cnf(L(5), L(3), L(2), 2)
    assert doc5.nvars == 20
    model = solve_cnf(doc5)
    assert model is not None
    assert find_homogeneous(L(3), doc5.decode(model)) is None
    assert solve_cnf(export_cnf(L(6), L(3), L(2), 2)) is None
    assert solve_cnf(export_cnf(L(4), L(3), L(2), 1)) is None


def test_dimacs_header():
    text = export_cnf(L(5), L(3), L(2), 2).to_dimacs()
    header = next(line for line in text.splitlines() if line.startswith("p "))
    assert header.split()[:3] == ["p", "cnf", "20"]


def test_ramsey_witness_search_examples():
    assert ramsey_witness_search(linear_orders(), L(3), L(2), 2) == L(6)
    edge = ordered_graph(2, [(0, 1)])
    assert ramsey_witness_search(og_class(4), edge, ordered_graph(1), 2) == K3
    assert ramsey_witness_search(og_class(4), edge, ordered_graph(1), 1) == edge


@settings(max_examples=25)
@given(ordered_graphs(min_size=1, max_size=4), ordered_graphs(min_size=1, max_size=2),
       ordered_graphs(min_size=1, max_size=2), st.integers(1, 2))
def test_modes_agree_with_brute_force(C, B, A, k):
    P = ArrowProblem(C, B, A)
    if k**P.n > 2**12:
        return
    truth = brute_force(C, B, A, k)
    for mode in ("exhaustive", "search", "cnf"):
        assert check_arrow(C, B, A, k, mode).holds == truth, mode
