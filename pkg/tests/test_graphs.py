"""Pattern graph parsing, construction, and density invariants."""

import itertools
import math
from fractions import Fraction

import pytest

from tilekit.graphs import (
    GraphH,
    GraphParseError,
    PatternTooLargeError,
    analyze,
    automorphism_count,
    disjoint_union,
    graph_from_spec,
    named_graph,
    parse_graph,
)


def test_parse_triangle():
    h = parse_graph("0 1\n1 2\n0 2")
    assert h.vertex_count == 3
    assert h.edges == frozenset({(0, 1), (1, 2), (0, 2)})


def test_parse_header_isolated_vertices():
    h = parse_graph("n 4\n0 1")
    assert h.vertex_count == 4
    assert h.e_h == 1


def test_parse_errors_name_the_line():
    with pytest.raises(GraphParseError, match="line 1.*self-loop"):
        parse_graph("0 0")
    with pytest.raises(GraphParseError, match="line 2.*duplicate"):
        parse_graph("0 1\n1 0")
    with pytest.raises(GraphParseError, match="line 2"):
        parse_graph("0 1\nbogus line")
    with pytest.raises(GraphParseError, match="header"):
        parse_graph("n 2\n0 5")
    with pytest.raises(GraphParseError, match="no edges"):
        parse_graph("# nothing\n")


def test_named_families():
    lol = named_graph("lollipop", [5, 2])
    assert (lol.vertex_count, lol.e_h) == (7, 12)
    k4k2 = disjoint_union(named_graph("complete", [4]), named_graph("complete", [2]))
    assert (k4k2.vertex_count, k4k2.e_h) == (6, 7)
    assert named_graph("cycle", [3]).edges == named_graph("complete", [3]).edges


def test_named_errors():
    with pytest.raises(ValueError, match="unknown graph family"):
        named_graph("petersen", [])
    with pytest.raises(ValueError):
        named_graph("complete", [1])
    with pytest.raises(ValueError):
        named_graph("cycle", [2])
    with pytest.raises(ValueError, match="disjoint_union"):
        named_graph("disjoint_union", [4, 2])


def test_graph_from_spec_union_syntax():
    h = graph_from_spec("complete:4+complete:2")
    assert (h.vertex_count, h.e_h) == (6, 7)
    assert h.label == "K4+K2"
    with pytest.raises(GraphParseError):
        graph_from_spec("complete:x")


def test_graph_validation():
    with pytest.raises(ValueError):
        GraphH(3, frozenset())  # no edges
    with pytest.raises(ValueError):
        GraphH(2, frozenset({(0, 2)}))  # endpoint out of range
    with pytest.raises(ValueError):
        GraphH(2, frozenset({(1, 1)}))


def test_analyze_k3():
    rep = analyze(named_graph("complete", [3]))
    assert rep.d_h == Fraction(3, 2)
    assert rep.d_star == Fraction(3, 2)
    assert rep.delta == Fraction(1, 1)
    assert rep.strictly_balanced and rep.balanced
    assert rep.aut_count == 6


def test_analyze_k4_plus_k2():
    rep = analyze(graph_from_spec("complete:4+complete:2"))
    assert rep.d_h == Fraction(7, 5)
    assert rep.d_star == Fraction(2, 1)
    assert rep.delta == Fraction(3, 2)
    assert not rep.strictly_balanced and not rep.balanced
    assert rep.h_star_vertices == (0, 1, 2, 3)
    assert rep.aut_count == 48


def test_analyze_lollipop():
    rep = analyze(named_graph("lollipop", [5, 2]))
    assert rep.d_h == Fraction(2, 1)
    assert rep.d_star == Fraction(5, 2)
    assert rep.delta == Fraction(2, 1)
    assert rep.aut_count == 24


def _density_oracle(h):
    """Independent exhaustive recomputation straight from the definitions."""
    edges = set(h.edges)
    best1 = Fraction(0)
    best0 = Fraction(0)
    strictly = True
    d_h = Fraction(h.e_h, h.vertex_count - 1)
    for size in range(1, h.vertex_count + 1):
        for sub in itertools.combinations(range(h.vertex_count), size):
            s = set(sub)
            e = sum(1 for u, v in edges if u in s and v in s)
            best0 = max(best0, Fraction(e, size))
            if size >= 2:
                best1 = max(best1, Fraction(e, size - 1))
                if size < h.vertex_count and Fraction(e, size - 1) >= d_h:
                    strictly = False
    return best1, best0, strictly


@pytest.mark.parametrize(
    "spec",
    [
        "complete:2",
        "complete:3",
        "complete:4",
        "cycle:4",
        "cycle:5",
        "path:3",
        "path:5",
        "lollipop:4,2",
        "lollipop:5,2",
        "complete:4+complete:2",
        "complete:2+complete:2",
        "complete:3+path:3",
    ],
)
def test_densities_match_exhaustive_oracle(spec):
    h = graph_from_spec(spec)
    rep = analyze(h)
    d_star, delta, strictly = _density_oracle(h)
    assert rep.d_star == d_star
    assert rep.delta == delta
    assert rep.strictly_balanced == strictly
    assert rep.d_star >= rep.d_h and rep.d_star >= rep.delta
    # the recorded winner really achieves the maximum
    s = set(rep.h_star_vertices)
    e = sum(1 for u, v in h.edges if u in s and v in s)
    assert Fraction(e, len(s) - 1) == rep.d_star
    if rep.strictly_balanced:
        assert rep.balanced
    if rep.d_star == rep.d_h:
        assert rep.balanced


def test_analyze_is_pure():
    h = named_graph("lollipop", [4, 3])
    assert analyze(h) == analyze(h)


def test_automorphism_counts():
    for k in range(2, 7):
        assert automorphism_count(named_graph("complete", [k])) == math.factorial(k)
    for k in range(3, 8):
        assert automorphism_count(named_graph("cycle", [k])) == 2 * k
    for k in range(3, 7):
        assert automorphism_count(named_graph("path", [k])) == 2
    # isolated vertices permute freely: Aut(K2 + 2 isolated) = 2 * 2!
    h = parse_graph("n 4\n0 1")
    assert automorphism_count(h) == 4
    # aut divides v!
    for spec in ["lollipop:4,2", "complete:3+path:3", "cycle:6"]:
        g = graph_from_spec(spec)
        assert math.factorial(g.vertex_count) % automorphism_count(g) == 0


def test_scan_limit():
    big = GraphH(17, frozenset({(0, 1)}))
    with pytest.raises(PatternTooLargeError, match="too large|limit"):
        analyze(big)
    # raising the limit makes it analyzable
    rep = analyze(big, scan_limit=17)
    assert rep.d_h == Fraction(1, 16)
