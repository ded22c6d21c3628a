"""Copy enumeration: counts, dedup, caps, and the cheapest copy."""

import itertools
import math

import numpy as np
import pytest

from tilekit.copies import CopyOverflowError, cheapest_copy, enumerate_copies
from tilekit.graphs import automorphism_count, graph_from_spec, named_graph, parse_graph
from tilekit.instances import Exponential, Uniform01, WeightedInstance, sample_instance

K2 = named_graph("complete", [2])
K3 = named_graph("complete", [3])
K4 = named_graph("complete", [4])
P3 = named_graph("path", [3])
C4 = named_graph("cycle", [4])


def _constant_instance(n, value=0.5):
    return WeightedInstance(n, np.full(n * (n - 1) // 2, value), Uniform01(), 0)


def _all_copies_by_injection(h, n):
    """Test oracle: distinct copies as edge sets over all injections."""
    seen = set()
    for perm in itertools.permutations(range(n), h.vertex_count):
        edges = frozenset(
            (min(perm[u], perm[v]), max(perm[u], perm[v])) for u, v in h.edges
        )
        extra = frozenset(perm) - {v for e in edges for v in e}
        seen.add((edges, extra))
    return seen


def test_k3_in_k4_has_four_copies():
    index = enumerate_copies(K3, _constant_instance(4))
    assert len(index) == 4


def test_cap_below_cheapest_triangle():
    inst = sample_instance(5, Exponential(1.0), 3)
    cheapest = cheapest_copy(K3, inst)
    cap = max(inst.weight(a, b) for a, b in cheapest.edge_list) * 0.5
    maxes = []
    for combo in itertools.combinations(range(5), 3):
        maxes.append(max(inst.weight(a, b) for a, b in itertools.combinations(combo, 2)))
    cap = min(maxes) * 0.999
    index = enumerate_copies(K3, inst, cap)
    assert len(index) == 0
    assert index.copies == []


def test_c4_in_k4_has_three_copies():
    index = enumerate_copies(C4, _constant_instance(4))
    assert len(index) == 3
    assert len(_all_copies_by_injection(C4, 4)) == 3


@pytest.mark.parametrize("h", [K2, K3, K4, P3, C4])
@pytest.mark.parametrize("n", [4, 6, 8])
def test_copy_count_identity_connected(h, n):
    if h.vertex_count > n:
        pytest.skip("pattern larger than host")
    index = enumerate_copies(h, _constant_instance(n))
    falling = math.prod(range(n - h.vertex_count + 1, n + 1))
    assert len(index) == falling // automorphism_count(h)
    assert len(index) == len(_all_copies_by_injection(h, n))


def test_disconnected_and_isomorphic_components():
    k4k2 = graph_from_spec("complete:4+complete:2")
    index = enumerate_copies(k4k2, _constant_instance(8))
    assert len(index) == math.comb(8, 4) * math.comb(4, 2)
    twin = graph_from_spec("complete:2+complete:2")
    index = enumerate_copies(twin, _constant_instance(6))
    assert len(index) == 45  # 15 edges, 6 disjoint partners each, unordered
    assert len(index) == len(_all_copies_by_injection(twin, 6))


def test_isolated_pattern_vertices():
    h = parse_graph("n 4\n0 1")  # one edge plus two isolated vertices
    index = enumerate_copies(h, _constant_instance(5))
    assert len(index) == 10 * math.comb(3, 2)
    assert len(index) == len(_all_copies_by_injection(h, 5))
    c = index.copy(0)
    assert len(c.vertex_image) == 4
    assert len(c.edge_list) == 1


def test_cap_monotonicity():
    inst = sample_instance(7, Exponential(1.0), 8)
    loose = enumerate_copies(K3, inst, 2.0)
    tight = enumerate_copies(K3, inst, 1.0)
    loose_sets = {c.edge_list for c in loose.copies}
    tight_sets = {c.edge_list for c in tight.copies}
    assert tight_sets <= loose_sets
    for c in tight.copies:
        assert all(inst.weight(a, b) <= 1.0 for a, b in c.edge_list)


def test_weights_and_sort_order():
    inst = sample_instance(8, Exponential(1.0), 21)
    index = enumerate_copies(K3, inst)
    w = index.weights
    assert np.all(w[:-1] <= w[1:])
    for c in index.copies:
        total = 0.0
        for a, b in c.edge_list:
            total += inst.weight(a, b)
        assert total == c.weight


def test_tie_break_is_lexicographic():
    index = enumerate_copies(K3, _constant_instance(5))
    lists = [c.edge_list for c in index.copies]
    assert lists == sorted(lists)
    assert index.copies[0].vertex_image == (0, 1, 2)


def test_postings_consistent():
    inst = sample_instance(6, Exponential(1.0), 4)
    index = enumerate_copies(K3, inst)
    for v in range(6):
        for cid in index.postings[v]:
            assert v in index.copies[cid].vertex_image
    total = sum(len(p) for p in index.postings)
    assert total == len(index) * 3


def test_within_restriction():
    inst = sample_instance(8, Exponential(1.0), 2)
    index = enumerate_copies(K3, inst, within=[1, 3, 4, 6])
    assert len(index) == 4
    for c in index.copies:
        assert set(c.vertex_image) <= {1, 3, 4, 6}


def test_overflow_limit():
    with pytest.raises(CopyOverflowError):
        enumerate_copies(K3, _constant_instance(8), limit=10)


def test_cheapest_copy_k2_is_min_edge():
    inst = sample_instance(9, Exponential(1.0), 13)
    c = cheapest_copy(K2, inst)
    assert c.weight == float(inst.weights.min())


def test_cheapest_copy_k4_matches_brute_force():
    inst = sample_instance(10, Exponential(1.0), 31)
    best = math.inf
    for combo in itertools.combinations(range(10), 4):
        tot = 0.0
        for a, b in sorted(itertools.combinations(combo, 2)):
            tot += inst.weight(a, b)
        best = min(best, tot)
    assert cheapest_copy(K4, inst).weight == best


def test_cheapest_copy_unique_triangle():
    inst = sample_instance(3, Exponential(1.0), 77)
    c = cheapest_copy(K3, inst)
    assert c.vertex_image == (0, 1, 2)
    assert c.weight == inst.weight(0, 1) + inst.weight(0, 2) + inst.weight(1, 2)


def test_embedding_is_valid_map():
    h = graph_from_spec("lollipop:4,1")
    inst = sample_instance(7, Exponential(1.0), 5)
    index = enumerate_copies(h, inst)
    for c in index.copies[:50]:
        assert len(set(c.embedding)) == h.vertex_count
        image = tuple(
            sorted(
                (min(c.embedding[u], c.embedding[v]), max(c.embedding[u], c.embedding[v]))
                for u, v in h.edges
            )
        )
        assert image == c.edge_list
