import pytest

from conftest import build
from oracles import holonomy_oracle, quotient_oracle
from spineforge.planted import _placeholder
from spineforge.rosegraph import EdgePartition, circles_from_word
from spineforge.spine import (Spine, SpineError, check_regularity, classify_vertices,
                              cocycle_holonomy, genuine_valence, is_identity,
                              mapping_complex_stats, multiplicity, transversal_transport)

# a theta-graph spine for d=3 over a placeholder circle of length 12, and the
# same spine after exchanging two passages at one half-edge, which reverses
# the arc of positions 1..6
THETA_ORI = [1, -1] * 6
THETA = [0, 2, 0, 3, 1, 2, 1, 0, 3, 2, 3, 1]
THETA_SWAPPED = [0, 1, 2, 1, 3, 0, 2, 0, 3, 2, 3, 1]


def theta(cls):
    return Spine(_placeholder(12), EdgePartition(cls, THETA_ORI), "simplicial", 3, labels=False)


def oracle_labels(s, start):
    """holonomy_oracle output translated to the fiber labels of the start edge."""
    L = s.L
    cls = [s.q.edge_map[e] for e in range(L.n)]
    ori = [s.q.edge_ori[e] for e in range(L.n)]
    lab = s.module(cls[start]).labels()
    return {lab[a]: lab[b] for a, b in holonomy_oracle(cls, ori, L.n, e0=start).items()}


def test_multiplicity_and_valence():
    assert [multiplicity("simplicial", d) for d in (2, 3, 4)] == [2, 3, 4]
    assert [multiplicity("cubical", d) for d in (2, 3, 4)] == [2, 4, 6]
    assert genuine_valence("simplicial", 3) == 4
    assert genuine_valence("cubical", 3) == 6
    with pytest.raises(SpineError):
        multiplicity("prism", 3)


def test_subdivided_circle_is_all_internal():
    L = circles_from_word("abAB")
    s = Spine(L, EdgePartition.singletons(4), "simplicial", 2, fibers=[[e] for e in range(4)])
    assert classify_vertices(s) == ["internal"] * 4
    r = check_regularity(s)
    assert r.R1["pass"] and not r.R2["pass"]


@pytest.mark.parametrize("kind,d,k,seed", [("simplicial", 2, 3, 11), ("simplicial", 3, 3, 29),
                                            ("cubical", 3, 4, 23)])
def test_built_spines_have_only_allowed_vertices(kind, d, k, seed):
    s = build(kind, d, k, seed).spine
    gv = genuine_valence(kind, d)
    kinds = classify_vertices(s)
    assert set(kinds) == {"internal", "genuine"}
    for c, val in zip(kinds, s.sigma.valence()):
        assert val == (2 if c == "internal" else gv)
    assert all(len(p) == s.dd for p in s.preimages())


def test_short_fiber_fails_r2():
    s = build("simplicial", 3, 3, 29).spine
    fibers = [list(f) for f in s.fibers]
    fibers[0] = fibers[0][:-1]
    t = Spine(s.L, s.partition, s.kind, s.d, fibers=fibers)
    r = check_regularity(t)
    assert not r.R2["pass"]
    assert [0, "fiber", s.dd - 1] in r.R2["witnesses"]


def test_transport_is_trivial_for_d2():
    s = build("simplicial", 2, 3, 11).spine
    kinds = classify_vertices(s)
    v = kinds.index("genuine")
    (a, b, _), = s.vertex_turns()[v][:1]
    m = transversal_transport(s, v, a, b)
    assert len(m) == 1
    for c in range(s.L.copies):
        h = cocycle_holonomy(s, c)
        assert len(h) == 1 and is_identity(h)


@pytest.mark.parametrize("kind,d,k,seed", [("simplicial", 3, 3, 29), ("simplicial", 4, 3, 0)])
def test_transport_is_a_bijection_of_transversals(kind, d, k, seed):
    s = build(kind, d, k, seed).spine
    kinds = classify_vertices(s)
    checked = 0
    for v, turns in enumerate(s.vertex_turns()):
        if kinds[v] != "genuine":
            continue
        for a, b, _ in turns[:3]:
            m = transversal_transport(s, v, a, b)
            assert len(m) == s.dd - 1
            assert set(m) <= set(s.fibers[a // 2])
            assert set(m.values()) <= set(s.fibers[b // 2])
            assert len(set(m.values())) == len(m)
            checked += 1
    assert checked > 0


def test_cubical_transport_commutes_with_antipode():
    s = build("cubical", 3, 4, 23).spine
    kinds = classify_vertices(s)
    v = kinds.index("genuine")
    for a, b, _ in s.vertex_turns()[v]:
        m = transversal_transport(s, v, a, b)
        src, dst = s.module(a // 2), s.module(b // 2)
        for x, y in m.items():
            assert m[src.antipode(x)] == dst.antipode(y)


def test_theta_spine_has_identity_holonomy():
    s = theta(THETA)
    r = check_regularity(s)
    assert all(r.verdicts().values())
    assert r.holonomies == [[[2, 2], [3, 3]]]
    for start in range(12):
        assert cocycle_holonomy(s, 0, start=start) == oracle_labels(s, start)


def test_engineered_swap_gives_exactly_one_transposition():
    s = theta(THETA_SWAPPED)
    r = check_regularity(s)
    assert r.verdicts() == {"R1": True, "R2": True, "R3": True, "R4": True, "R5": False}
    assert r.holonomies == [[[2, 3], [3, 2]]]
    for start in range(12):
        h = cocycle_holonomy(s, 0, start=start)
        assert h == oracle_labels(s, start)
        moved = [x for x, y in h.items() if x != y]
        assert len(moved) == 2 and h[moved[0]] == moved[1]


def test_swap_is_a_reversed_arc():
    rev = list(THETA)
    rev[1:7] = THETA[1:7][::-1]
    assert rev == THETA_SWAPPED


@pytest.mark.parametrize("kind,d,k,seed", [("simplicial", 3, 3, 29), ("cubical", 3, 4, 23)])
def test_pipeline_holonomy_is_independent_of_start(kind, d, k, seed):
    s = build(kind, d, k, seed).spine
    n = s.L.n
    for start in range(0, n, max(1, n // 7)):
        assert is_identity(cocycle_holonomy(s, 0, start=start))


def test_pipeline_holonomy_matches_oracle():
    s = build("simplicial", 3, 3, 29).spine
    for start in (0, 5, 100):
        h = cocycle_holonomy(s, 0, start=start)
        assert h == oracle_labels(s, start)
        assert is_identity(h)


def surface_counts(s):
    return quotient_oracle(list(s.L.word), s.L.copies, s.partition.cls, s.partition.ori)


@pytest.mark.parametrize("seed", [0, 11, 17])
def test_d2_surface_euler_characteristic(seed):
    res = build("simplicial", 2, 3, seed)
    s = res.spine
    st = mapping_complex_stats(s, res.report)
    V, edges, fold = surface_counts(s)
    c = s.L.copies
    chi = V - len(edges) + c
    assert fold is None
    assert st["chi"] == chi == st["naive_chi"]
    assert st["surface_check"]
    m = st["m"]
    assert set(res.report.m) == {m} and m >= 7
    assert 6 * chi == c * (6 - m) and chi < 0


def test_hexagon_gives_torus():
    # opposite sides of a hexagon glued: a theta graph whose one face has m = 6
    L = circles_from_word("abcABC")
    p = EdgePartition.from_classes(6, [[(0, 1), (3, -1)], [(1, 1), (4, -1)], [(2, 1), (5, -1)]])
    s = Spine(L, p, "simplicial", 2)
    r = check_regularity(s)
    assert all(r.verdicts().values())
    st = mapping_complex_stats(s, r)
    assert st["m"] == 6 and st["chi"] == 0 and st["surface_check"]
