from itertools import product

import pytest

from critgroup.graphs import (
    Graph,
    LayeredSpec,
    SpecError,
    laplacian,
    layered_kpartite,
    layered_laplacian_direct,
    n_coefficient,
    standard_family,
    to_dot,
)
from critgroup.matrix import IntMatrix
from critgroup.snf import invariant_factors


def small_specs(max_total=20, max_k=6):
    """Every spec with k <= max_k and sum of parts <= max_total."""
    out = []

    def rec(prefix, left):
        if len(prefix) >= 2:
            out.append(LayeredSpec(tuple(prefix)))
        if len(prefix) == max_k:
            return
        for n in range(1, left + 1):
            rec(prefix + [n], left - n)

    rec([], max_total)
    return out


def _is_cycle4(g):
    deg = g.degrees()
    return g.vertex_count == 4 and len(g.edges) == 4 and deg == [2, 2, 2, 2] and g.is_connected()


def test_layered_examples():
    g = layered_kpartite(LayeredSpec((2, 2)))
    assert _is_cycle4(g)
    fig = layered_kpartite(LayeredSpec((6, 4, 5, 3, 4)))
    assert fig.vertex_count == 22
    assert len(fig.edges) == 6 * 4 + 4 * 5 + 5 * 3 + 3 * 4 == 71
    k33 = layered_kpartite(LayeredSpec((3, 3)))
    assert len(k33.edges) == 9


def test_spec_validation_and_parse():
    with pytest.raises(SpecError):
        LayeredSpec((3,))
    with pytest.raises(SpecError):
        LayeredSpec((2, 0))
    assert LayeredSpec.parse("6,4,5,3,4").parts == (6, 4, 5, 3, 4)
    for bad in ["", "2, 3", "2,,3", "2,-3", "a,b", "2;3"]:
        with pytest.raises(SpecError):
            LayeredSpec.parse(bad)
    assert str(LayeredSpec((2, 3, 4))) == "2,3,4"


def test_graph_invariants():
    with pytest.raises(ValueError):
        Graph(2, frozenset({(0, 0)}))
    with pytest.raises(ValueError):
        Graph.from_edges(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph(2, frozenset({(0, 1)}), part_of=(0, 0))


def test_laplacian_examples():
    assert laplacian(standard_family("path", 2)) == IntMatrix([[1, -1], [-1, 1]])
    c4 = laplacian(standard_family("cycle", 4))
    assert c4 == IntMatrix([[2, -1, 0, -1], [-1, 2, -1, 0], [0, -1, 2, -1], [-1, 0, -1, 2]])
    assert laplacian(layered_kpartite(LayeredSpec((2, 2)))) == layered_laplacian_direct(LayeredSpec((2, 2)))


def test_direct_laplacian_examples():
    assert layered_laplacian_direct(LayeredSpec((2, 2))) == IntMatrix(
        [[2, 0, -1, -1], [0, 2, -1, -1], [-1, -1, 2, 0], [-1, -1, 0, 2]]
    )
    assert layered_laplacian_direct(LayeredSpec((1, 1))) == IntMatrix([[1, -1], [-1, 1]])
    L = layered_laplacian_direct(LayeredSpec((2, 3, 2)))
    assert L.diagonal() == (3, 3, 4, 4, 4, 3, 3)
    assert L == laplacian(layered_kpartite(LayeredSpec((2, 3, 2))))


def test_n_coefficient():
    assert n_coefficient(LayeredSpec((6, 4, 5, 3, 4)), 3) == 7
    assert n_coefficient(LayeredSpec((2, 2)), 1) == 2
    for a, b in product(range(1, 6), repeat=2):
        assert n_coefficient(LayeredSpec((a, b)), 2) == a
    with pytest.raises(IndexError):
        n_coefficient(LayeredSpec((2, 2)), 3)


def test_standard_families():
    assert _is_cycle4(standard_family("cycle", 4))
    assert len(standard_family("complete", 4).edges) == 6
    assert standard_family("complete_bipartite", 2, 3) == layered_kpartite(LayeredSpec((2, 3)))
    t = standard_family("tree_random", 9, seed=3)
    assert len(t.edges) == 8 and t.is_connected()
    assert standard_family("tree_random", 9, seed=3) == t
    with pytest.raises(ValueError):
        standard_family("petersen", 10)


def test_direct_equals_combinatorial_sweep():
    specs = small_specs()
    assert len(specs) > 1000
    for spec in specs:
        assert laplacian(layered_kpartite(spec)) == layered_laplacian_direct(spec), spec


@pytest.mark.parametrize(
    "g",
    [standard_family("cycle", 5), standard_family("complete", 4), standard_family("path", 5),
     standard_family("tree_random", 7, seed=1)] + [layered_kpartite(s) for s in small_specs(9, 4)[::7]],
)
def test_laplacian_properties(g):
    L = laplacian(g)
    assert L == L.T
    assert all(sum(r) == 0 for r in L)
    assert list(L.diagonal()) == g.degrees()
    if g.is_connected():
        # rank n-1: exactly n-1 nonzero invariant factors
        assert len(invariant_factors(L)) == g.vertex_count - 1


def test_layered_edges_only_between_consecutive_parts():
    for spec in small_specs(12, 5):
        g = layered_kpartite(spec)
        assert g.is_connected()
        for u, v in g.edges:
            assert abs(g.part_of[u] - g.part_of[v]) == 1


def test_dot_export():
    text = to_dot(layered_kpartite(LayeredSpec((6, 4, 5, 3, 4))))
    assert text.count(" -- ") == 71
    assert text.count("subgraph cluster_") == 5
    assert "p1_v6" in text and "p5_v4" in text
    assert to_dot(layered_kpartite(LayeredSpec((1, 1)))).count(" -- ") == 1
    two = to_dot(layered_kpartite(LayeredSpec((2, 2))))
    assert two.count("subgraph") == 2 and two.count(" -- ") == 4
