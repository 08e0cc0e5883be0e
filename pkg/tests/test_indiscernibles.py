import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from ramseylab.formulas import FormulaSet, atomic_formulas
from ramseylab.fraisse import weakly_saturated_ordered_graph
from ramseylab.indiscernibles import (
    ExtractionError, IndexedFamily, NotIndiscernible, ReindexHypothesisError,
    based_on_check, check_indiscernible, closure_color, extract_indiscernible,
    extraction_trace, indiscernible_type, reindex, reindex_search,
)
from ramseylab.qftypes import diagram_type
from ramseylab.structures import (
    FinStructure, RelationSymbol, Signature, induced_substructure,
    linear_order, ordered_graph, ordered_sum,
)

import oracles
from strategies import ordered_graphs

LT = FormulaSet.parse(["lt(x1, x2)"])
EDGE = ordered_graph(2, [(0, 1)])
GRAPH = Signature((RelationSymbol("R", 2, symmetric=True, antireflexive=True),))


def identity(G):
    return IndexedFamily(G, G, tuple(range(G.size)))


def test_single_element_index():
    fam = IndexedFamily(ordered_graph(1), linear_order(3), (2,))
    assert check_indiscernible(fam, None, LT).holds


def test_unordered_edge_into_order_fails():
    idx = FinStructure(GRAPH, 2, {"R": [(0, 1)]})
    fam = IndexedFamily(idx, linear_order(2), (0, 1))
    v = check_indiscernible(fam, None, LT)
    assert v.fails and v.certificate["arity"] == 2


@given(ordered_graphs(min_size=1, max_size=4))
def test_identity_family_is_indiscernible(G):
    fam = identity(G)
    assert check_indiscernible(fam, None, atomic_formulas(G.signature, 2)).holds


def test_indiscernible_type_of_edge():
    p = indiscernible_type(identity(EDGE), FormulaSet.parse(["rel(R, x1, x2)"]))
    assert p[diagram_type(EDGE)] == (True,)
    assert p.formula_values(diagram_type(EDGE)) == {"rel(R, x1, x2)": True}


def test_indiscernible_type_rejects_bad_family():
    fam = IndexedFamily(linear_order(3), linear_order(3), (0, 2, 1))
    with pytest.raises(NotIndiscernible):
        indiscernible_type(fam, LT)


def test_sub_signature_sees_less():
    # the order alone cannot separate edge pairs from non-edge pairs
    G = ordered_graph(3, [(0, 1)])
    fam = identity(G)
    R = FormulaSet.parse(["rel(R, x1, x2)"])
    assert check_indiscernible(fam, None, R).holds
    assert check_indiscernible(fam, ["<"], R).fails


def test_based_on_examples():
    G = ordered_graph(3, [(0, 2)])
    fam = identity(G)
    delta = atomic_formulas(G.signature, 2)
    assert based_on_check(fam, fam, delta).holds
    target = ordered_graph(4, [(0, 1)])
    psi = FormulaSet.parse(["exists(y, rel(R, x1, y))"])
    older = IndexedFamily(EDGE, target, (0, 1))
    newer = IndexedFamily(EDGE, target, (2, 3))
    v = based_on_check(newer, older, psi)
    assert v.fails and v.certificate["arity"] == 1


def test_reindex_to_sub_index_and_isomorphic_copy():
    G = ordered_graph(4, [(0, 1), (2, 3)])
    fam = IndexedFamily(G, linear_order(8), (1, 3, 5, 7))
    J = induced_substructure(G, [0, 1])
    out = reindex(fam, J, LT)
    assert out is not None
    assert check_indiscernible(out, None, LT).holds and based_on_check(out, fam, LT).holds
    same = reindex(fam, G, LT)
    assert same is not None and based_on_check(same, fam, LT).holds


def test_reindex_blocked_by_small_target():
    fam = IndexedFamily(linear_order(2), linear_order(2), (0, 1))
    out, blocking = reindex_search(fam, linear_order(3), LT)
    assert out is None
    assert blocking["element"] == 2
    assert blocking["reason"] in ("type", "injectivity")


def test_reindex_hypothesis_checked():
    fam = IndexedFamily(ordered_graph(2), linear_order(2), (0, 1))
    with pytest.raises(ReindexHypothesisError):
        reindex(fam, EDGE, LT)


def test_family_validation():
    with pytest.raises(ValueError):
        IndexedFamily(linear_order(2), linear_order(3), (1, 1))
    with pytest.raises(ValueError):
        IndexedFamily(linear_order(2), linear_order(3), (0,))
    with pytest.raises(ValueError):
        IndexedFamily(linear_order(1), linear_order(3), (5,))


def test_width_two_family():
    # pairs (2i, 2i+1) of a linear order: slot formulas use four variables
    fam = IndexedFamily(linear_order(3), linear_order(6), ((0, 1), (2, 3), (4, 5)))
    delta = FormulaSet.parse(["lt(x2, x4)", "lt(x1, x2)"])
    assert check_indiscernible(fam, None, delta).holds
    p = indiscernible_type(fam, delta)
    # one formula per slot count, true on every increasing type
    assert sorted((eta.arity, v) for eta, v in p.values.items()) == [(1, (True,)), (2, (True,))]


def test_closure_color_separates_patterns():
    fam = IndexedFamily(linear_order(3), linear_order(3), (0, 2, 1))
    a = closure_color(fam, LT, (0, 1), 2)
    b = closure_color(fam, LT, (1, 2), 2)
    assert a != b
    # one value per surjection onto the two positions: (0, 1) then (1, 0)
    assert a == (True, False)


def test_extract_with_empty_delta_is_first_copy():
    cert = weakly_saturated_ordered_graph(2)
    raw = IndexedFamily(cert.structure, linear_order(5), (4, 0, 2))
    out = extract_indiscernible(raw, FormulaSet(()), None, EDGE)
    e = cert.witness_map[EDGE]
    assert out.index == EDGE and out.map == tuple(raw.map[i] for i in e.map)


def test_extract_from_replicated_index_into_order():
    S = weakly_saturated_ordered_graph(2).structure
    idx = ordered_sum([S] * 3)
    raw = IndexedFamily(idx, linear_order(idx.size), tuple(range(idx.size)))
    shape = ordered_sum([EDGE, ordered_graph(2)])
    out = extract_indiscernible(raw, LT, 2, shape)
    assert check_indiscernible(out, None, LT).holds
    assert based_on_check(out, raw, LT).holds
    p = indiscernible_type(out, LT)
    assert {v for eta, v in p.values.items() if eta.arity == 2} == {(True,)}


def test_extract_rejects_unembeddable_shape():
    raw = identity(ordered_graph(3))
    with pytest.raises(ExtractionError):
        extract_indiscernible(raw, LT, 2, EDGE)


def test_extract_fails_when_no_homogeneous_copy():
    # an order-reversing pair of blocks: any 3-chain mixes directions
    raw = IndexedFamily(linear_order(4), linear_order(4), (1, 0, 3, 2))
    assert oracles.homogeneous_copies(raw, LT, linear_order(3)) == []
    with pytest.raises(ExtractionError) as exc:
        extract_indiscernible(raw, LT, 2, linear_order(3))
    assert exc.value.stage is not None


def test_trace_stages_are_nested_and_homogeneous():
    S = weakly_saturated_ordered_graph(2).structure
    idx = ordered_sum([S] * 3)
    rng = random.Random(4)
    perm = list(range(idx.size))
    rng.shuffle(perm)
    raw = IndexedFamily(idx, linear_order(idx.size), tuple(perm))
    trace = extraction_trace(raw, LT, 2, S)
    done = []
    prev = set(range(idx.size))
    for st_ in trace.stages:
        assert set(st_.host) <= prev
        prev = set(st_.host)
        done.append(st_.qtype)
        assert oracles.stage_is_homogeneous(raw, LT, 2, st_.host, done)
    assert set(trace.copy.map) <= prev


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.sampled_from([1, 2]))
def test_extraction_agrees_with_oracle(seed, which):
    rng = random.Random(seed)
    S = weakly_saturated_ordered_graph(2).structure
    idx = ordered_sum([S] * 2)
    target = ordered_graph(8, [p for p in itertools.combinations(range(8), 2) if rng.random() < 0.5])
    raw = IndexedFamily(idx, target, tuple(rng.sample(range(8), idx.size)))
    texts = ["rel(R, x1, x2)", "lt(x1, x2)"][:which]
    delta = FormulaSet.parse(texts)
    shape = [EDGE, S][which - 1]
    exists = bool(oracles.homogeneous_copies(raw, delta, shape))
    try:
        out = extract_indiscernible(raw, delta, 2, shape)
    except ExtractionError:
        assert not exists
        return
    assert exists
    assert check_indiscernible(out, None, delta).holds
    assert based_on_check(out, raw, delta).holds
