from collections import Counter
from itertools import combinations

import pytest

from conftest import build
from spineforge.rosegraph import LabeledGraph
from spineforge.templates import (DegenerateDimension, check_lens_arrays, check_template,
                                  cube_orders, height_pairs, hypercube_template, lens_parity,
                                  lens_template, spherical_graph)


def test_height_pairs_d3():
    assert height_pairs(3) == [("000", "010"), ("001", "011"), ("111", "101"), ("110", "100")]


@pytest.mark.parametrize("d", [0, 1, 2])
def test_height_pairs_degenerate(d):
    with pytest.raises(DegenerateDimension, match="degenerate dimension"):
        height_pairs(d)


@pytest.mark.parametrize("d", range(3, 17))
def test_height_pairs_share_end_bits(d):
    pairs = height_pairs(d)
    assert len(pairs) == 4
    for a, b in pairs:
        assert len(a) == len(b) == d
        assert a[0] == b[0] and a[-1] == b[-1]
        assert all(a[i] != b[i] for i in range(1, d - 1))
    # the four pairs start at distinct (first, last) bit combinations
    assert len({(a[0], a[-1]) for a, _ in pairs}) == 4


@pytest.mark.parametrize("d", range(3, 17))
def test_lens_layout_passes_local_checks(d):
    ok, bad = check_lens_arrays(d)
    assert ok, bad


@pytest.mark.parametrize("d", range(4, 13))
def test_other_parity_fails(d):
    ok, _ = check_lens_arrays(d, 1 - lens_parity(d))
    assert not ok


def test_both_parities_work_for_d3():
    assert check_lens_arrays(3, 0)[0] and check_lens_arrays(3, 1)[0]


@pytest.mark.parametrize("d", [3, 4, 5])
def test_small_lens_templates_match_array_check(d):
    ok, bad = check_template(lens_template(d), "cubical")
    assert ok, bad


@pytest.mark.parametrize("n", range(2, 8))
def test_cube_orders_turn_through_each_axis_pair_twice(n):
    turns = Counter()
    for order in cube_orders(n):
        assert sorted(order) == list(range(n))
        for a, b in zip(order, order[1:]):
            turns[frozenset((a, b))] += 1
    assert set(turns) == {frozenset(p) for p in combinations(range(n), 2)}
    assert set(turns.values()) == {2}


@pytest.mark.parametrize("d", [2, 3, 4, 5])
def test_hypercube_counts(d):
    t = hypercube_template(d)
    assert len(t.slots) == 2 ** (d - 1)
    assert t.degree == d
    assert len(t.edges) == d * 2 ** (d - 1)
    assert t.edge_strands() == [d] * len(t.edges)
    # each slot joins antipodal corners
    assert all(s.start ^ s.end == 2 ** d - 1 for s in t.slots)
    assert len({frozenset((s.start, s.end)) for s in t.slots}) == 2 ** (d - 1)
    ok, bad = check_template(t, "simplicial")
    assert ok, bad


def test_hypercube_degenerate():
    with pytest.raises(DegenerateDimension):
        hypercube_template(1)


def test_lens_d3_is_k44():
    t = lens_template(3)
    assert len(t.slots) == 8 and t.degree == 4
    assert t.num_vertices == 8 and len(t.edges) == 16
    parity = [bin(v // 2).count("1") % 2 for v in range(8)]
    pairs = {frozenset(e) for e in t.edges}
    assert len(pairs) == 16
    assert all(parity[a] != parity[b] for a, b in t.edges)
    assert Counter(parity) == {0: 4, 1: 4}


def test_lens_d4_projects_four_to_one():
    t = lens_template(4)
    base = hypercube_template(3)
    assert len(t.slots) == 16 == 2 ** 4 and t.degree == 6
    down = Counter(b for b, _ in t.projection["down"])
    assert down == {b: 4 for b in range(len(base.slots))}
    # every upstairs path lies over a downstairs path
    for (b, _), sl in zip(t.projection["down"], t.slots):
        for j, p in enumerate(sl.paths):
            assert [(e // 4, dr) for e, dr in p] == base.slots[b].paths[j // 2]


def test_lens_d2_is_bigon():
    t = lens_template(2)
    assert len(t.slots) == 2 and t.degree == 2


def test_spherical_graph_counts():
    g = LabeledGraph(3, [(0, 1, 1), (1, 2, 2), (2, 0, -1), (0, 0, 2)])
    s, vproj, eproj = spherical_graph(g)
    assert s.num_vertices == 6 and len(s.edges) == 16
    for i, (u, v, x) in enumerate(s.edges):
        gu, gv, gx = g.edges[eproj[i]]
        assert (vproj[u], vproj[v], x) == (gu, gv, gx)
    # each edge has four lifts joining all height combinations
    assert Counter(eproj) == {e: 4 for e in range(4)}


@pytest.mark.parametrize("kind,d,k,seed,slots,degree", [
    ("simplicial", 2, 3, 11, 2, 2), ("simplicial", 3, 3, 29, 4, 3),
    ("simplicial", 4, 3, 0, 8, 4), ("simplicial", 5, 4, 0, 16, 5),
    ("cubical", 3, 4, 23, 8, 4)])
def test_pipeline_templates_consume_expected_beachballs(kind, d, k, seed, slots, degree):
    res = build(kind, d, k, seed)
    move = "hypercube" if kind == "simplicial" else "lens"
    lines = [x for x in res.trace if x["move"] == move]
    assert lines
    for line in lines:
        assert len(line["params"]["layout"]) == slots
    for p in res.state.pieces.values():
        assert len(p.info["layout"]) == slots
        assert len(p.arcs) == slots * degree
