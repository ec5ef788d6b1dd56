import pytest
from hypothesis import given, settings, strategies as st

from oracles import first_fold, quotient_oracle
from spineforge.rosegraph import (CircleFamily, EdgePartition, IllegalQuotient, InconsistentLabels,
                                  LabeledGraph, apply_partition, circles_from_word, dumps,
                                  is_immersed, to_dot)
from spineforge.words import ReducedWord, WordError, random_cyclically_reduced_word


def test_circle_counts():
    L = circles_from_word("ab", 1)
    assert L.num_edges == 2
    L = circles_from_word("abAB", 3)
    assert L.components == 3 and L.num_edges == 12
    g = L.graph()
    assert g.num_vertices == 12 and set(g.valence()) == {2}
    for c in range(3):
        assert [L.label(L.edge_id(c, p)) for p in range(4)] == [1, 2, -1, -2]


def test_circle_needs_cyclically_reduced_word():
    with pytest.raises(WordError):
        circles_from_word("abA")


def test_is_immersed_examples():
    assert is_immersed(circles_from_word("aabAB").graph())[0]
    wedge = LabeledGraph(3, [(0, 1, 1), (0, 2, 1)])
    assert is_immersed(wedge) == (False, (0, 1))


def test_identity_partition_is_isomorphic_to_L():
    L = circles_from_word("abaBB", 2)
    q = apply_partition(L, EdgePartition.singletons(L.num_edges))
    assert q.graph == L.graph()


def test_two_copies_collapse_to_one_circle():
    L = circles_from_word("ab", 2)
    p = EdgePartition.from_classes(4, [[(0, 1), (2, 1)], [(1, 1), (3, 1)]])
    q = apply_partition(L, p)
    assert q.graph == LabeledGraph(2, [(0, 1, 1), (1, 0, 2)])


def test_inconsistent_labels():
    L = circles_from_word("ab")
    with pytest.raises(InconsistentLabels):
        apply_partition(L, EdgePartition.from_classes(2, [[(0, 1), (1, 1)]]))


def test_illegal_quotient_matches_fold_oracle():
    # two a-edges whose successors both read b from distinct sources
    w = ReducedWord.parse("abab")
    L = CircleFamily(w)
    p = EdgePartition.from_classes(4, [[(0, 1), (2, 1)]])
    V, edges, fold = quotient_oracle(list(w), 1, p.cls, p.ori)
    assert fold is not None
    with pytest.raises(IllegalQuotient):
        apply_partition(L, p)


def test_edge_count_conservation():
    L = circles_from_word("abAAB", 3)
    p = EdgePartition.from_classes(15, [[(0, 1), (5, 1), (10, 1)]])
    q = apply_partition(L, p, check=False)
    assert len(q.graph.edges) == len(p.classes())
    assert sum(len(c) for c in p.classes()) == L.num_edges


def test_json_and_dot():
    L = circles_from_word("ab", 2)
    p = EdgePartition.from_classes(4, [[(0, 1), (2, 1)]])
    g = apply_partition(L, p, check=False).graph
    assert LabeledGraph.from_json(g.to_json()) == g
    assert dumps(g.to_json()) == dumps(LabeledGraph.from_json(g.to_json()).to_json())
    dot = to_dot(g, glued=[0])
    assert "color=red" in dot and "color=black" in dot


@st.composite
def graphs(draw):
    V = draw(st.integers(1, 4))
    E = draw(st.integers(0, 12))
    edges = [(draw(st.integers(0, V - 1)), draw(st.integers(0, V - 1)),
              draw(st.sampled_from([1, -1, 2, -2]))) for _ in range(E)]
    return LabeledGraph(V, edges)


@settings(max_examples=400, deadline=None)
@given(graphs())
def test_is_immersed_agrees_with_fold_scan(g):
    fold = first_fold(g.num_vertices, g.edges)
    ok, bad = is_immersed(g)
    assert ok == (fold is None)
    assert bad == fold


@st.composite
def partitions(draw):
    n = draw(st.integers(2, 8))
    copies = draw(st.integers(1, 3))
    w = random_cyclically_reduced_word(2, n, draw(st.integers(0, 10**6)))
    E = n * copies
    cls = [draw(st.integers(0, E - 1)) for _ in range(E)]
    ori = [1 if w[e % n] > 0 else -1 for e in range(E)]
    # merge only edges over the same generator
    cls = [c * 2 + (abs(w[e % n]) - 1) for e, c in enumerate(cls)]
    return w, copies, cls, ori


@settings(max_examples=300, deadline=None)
@given(partitions())
def test_apply_partition_agrees_with_set_quotient(data):
    w, copies, cls, ori = data
    L = CircleFamily(w, copies)
    V, edges, fold = quotient_oracle(list(w), copies, cls, ori)
    q = apply_partition(L, EdgePartition(cls, ori), check=False)
    assert q.graph.num_vertices == V and q.graph.edges == edges
    if fold is None:
        apply_partition(L, EdgePartition(cls, ori))
    else:
        with pytest.raises(IllegalQuotient):
            apply_partition(L, EdgePartition(cls, ori))


def test_refinement_can_break_legality():
    # gluing all three a-edges of baaa is legal, gluing only two of them is not
    L = circles_from_word("baaa")
    ori = [1] * 4
    apply_partition(L, EdgePartition([1, 0, 0, 0], ori))
    with pytest.raises(IllegalQuotient):
        apply_partition(L, EdgePartition([1, 0, 0, 2], ori))
