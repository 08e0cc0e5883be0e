import itertools

import pytest

from ramseylab.classes import age_up_to
from ramseylab.fraisse import (
    LevelCapExceeded, all_ordered_graphs, embed_into, extension_property_check,
    weakly_saturated_ordered_graph,
)
from ramseylab.niplab import paley_graph
from ramseylab.structures import first_embedding, ordered_graph


def test_level_one_is_a_point():
    cert = weakly_saturated_ordered_graph(1)
    assert cert.structure == ordered_graph(1) and cert.verify()


def test_level_two_is_minimal():
    cert = weakly_saturated_ordered_graph(2)
    assert cert.verify()
    assert cert.structure.size == 3 and len(cert.structure.edges()) == 1
    two = all_ordered_graphs(2)[1:]
    for G in (ordered_graph(2), ordered_graph(2, [(0, 1)])):
        assert not all(first_embedding(A, G) for A in two)


def test_level_three_embeds_all_eight():
    cert = weakly_saturated_ordered_graph(3)
    assert cert.verify()
    threes = [A for A in cert.witness_map if A.size == 3]
    assert len(threes) == 8
    assert len([A for A in age_up_to(cert.structure, 3) if A.size == 3]) == 8


def test_level_cap():
    with pytest.raises(LevelCapExceeded):
        weakly_saturated_ordered_graph(5)
    with pytest.raises(ValueError):
        weakly_saturated_ordered_graph(0)


def test_verify_rejects_tampering():
    cert = weakly_saturated_ordered_graph(2)
    broken = dict(cert.witness_map)
    broken.pop(next(iter(broken)))
    assert not type(cert)(cert.structure, 2, broken).verify()


def test_extension_property_examples():
    assert extension_property_check(ordered_graph(1), 1).holds
    assert extension_property_check(ordered_graph(4), 2).fails
    # the order-blind variant holds in a Paley graph with enough vertices
    assert extension_property_check(paley_graph(29), 3, respect_order=False).holds
    assert extension_property_check(paley_graph(5), 3, respect_order=False).fails


def test_embed_into_examples():
    cert = weakly_saturated_ordered_graph(2)
    assert embed_into(ordered_graph(1), cert).map == (0,)
    e = embed_into(ordered_graph(2), cert)
    assert e.verify() and not cert.structure.holds("R", e.map)
    with pytest.raises(ValueError):
        embed_into(ordered_graph(3), cert)


def test_all_two_vertex_types_in_level_three():
    S = weakly_saturated_ordered_graph(3).structure
    for n in (1, 2, 3):
        pairs = list(itertools.combinations(range(n), 2))
        expected = 2 ** len(pairs)
        assert len([A for A in age_up_to(S, n) if A.size == n]) == expected
