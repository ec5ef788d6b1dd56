import json
import math
from types import SimpleNamespace

import pytest
from hypothesis import given, settings, strategies as st

from conftest import build
from oracles import lift_oracle, max_piece_oracle
from spineforge.analysis import (AnalysisError, bead_decompose, bead_lengths,
                                 lips_glue_legally, long_subword_lift_check, max_piece,
                                 piece_profile, pieces_histogram, pieces_ratio)
from spineforge.rosegraph import EdgePartition, apply_partition, circles_from_word
from spineforge.words import Presentation, ReducedWord, random_cyclically_reduced_word

C_DEFAULT = 0.2 * 0.3 / math.log(3)

# A y B C y D E A y D F: the two copies of y are glued, and the path A y D
# exists in the quotient but not in the circle
ENGINEERED = "bbaabAABBABBabAABaabbbaabAABaabABA"
Y_AT = (3, 12)
Y_LEN = 5


def engineered_spine():
    L = circles_from_word(ENGINEERED)
    p = EdgePartition.from_classes(len(ENGINEERED),
                                   [[(Y_AT[0] + u, 1), (Y_AT[1] + u, 1)] for u in range(Y_LEN)])
    q = apply_partition(L, p)
    return SimpleNamespace(L=L, q=q, sigma=q.graph, partition=p)


def test_max_piece_examples():
    # only single letters repeat in aabb and its inverse
    assert max_piece(Presentation(2, [ReducedWord("aabb")])) == 1 == \
        max_piece_oracle([ReducedWord("aabb")])
    assert max_piece(Presentation(2, [ReducedWord("abab")])) == 4
    p = Presentation(2, [ReducedWord("aab"), ReducedWord("aabAB")])
    assert max_piece(p) == max_piece_oracle(p.relators) == 3


def test_histogram_counts_every_position():
    p = Presentation(2, [random_cyclically_reduced_word(2, 60, 1)])
    text = pieces_histogram(p)
    lines = text.strip().split("\n")
    assert lines[0] == "length,positions"
    assert sum(int(x.split(",")[1]) for x in lines[1:]) == 120
    assert max(piece_profile(p).values()) == int(lines[-1].split(",")[0])


@settings(max_examples=150, deadline=None)
@given(k=st.integers(2, 3), lengths=st.lists(st.integers(1, 30), min_size=1, max_size=3),
       seed=st.integers(0, 10**6))
def test_max_piece_agrees_with_brute_force(k, lengths, seed):
    rels = [random_cyclically_reduced_word(k, n, seed + i) for i, n in enumerate(lengths)]
    p = Presentation(k, rels)
    assert max_piece(p) == max_piece_oracle(rels)


def test_pieces_ratio_small_seeds():
    for seed in range(5):
        p = Presentation(2, [random_cyclically_reduced_word(2, 256, seed)])
        assert pieces_ratio(p) == max_piece_oracle(p.relators) / 256


def test_bead_lengths():
    assert bead_lengths(4096, 0.3, 2) == (337, 12, 10)
    assert bead_lengths(4096, 0.3, 3) == (337, 12, 9)
    with pytest.raises(AnalysisError):
        bead_lengths(10, 0.3, 4)


def test_bead_precondition():
    r = random_cyclically_reduced_word(2, 4096, 0)
    with pytest.raises(AnalysisError, match="C must be smaller than delta / log"):
        bead_decompose(r, 0.3, 0.3 / math.log(3), 2)


@pytest.mark.parametrize("seed", [1, 2, 3])
def test_bead_decomposition_invariants(seed):
    r = random_cyclically_reduced_word(2, 4096, seed)
    bd = bead_decompose(r, 0.3, C_DEFAULT, 2, seed=seed)
    n = len(r)
    letters = list(r)
    assert bd.lip_length == math.ceil(C_DEFAULT * math.log(n)) == 1
    assert bd.m % 2 == 0 and len(bd.factors) == bd.m
    # factors tile the word
    pos = 0
    for f in bd.factors:
        assert f["r"][0] == pos and f["s"][0] == pos + f["r"][1]
        pos = f["s"][0] + f["s"][1]
    assert pos == n
    step = bd.m // 2
    assert len(bd.lips) == step
    for i, lip in enumerate(bd.lips):
        for j, p in enumerate(lip["positions"]):
            s0, sl = bd.factors[i + j * step]["s"]
            assert s0 <= p and p + bd.lip_length <= s0 + sl
            assert letters[p:p + bd.lip_length] == lip["word"]
        assert len({letters[p - 1] for p in lip["positions"]}) == 2
        assert len({letters[(p + bd.lip_length) % n] for p in lip["positions"]}) == 2
    assert sum(length for _, length in bd.pieces) == n - 2 * bd.lip_length * len(bd.lips)
    assert lips_glue_legally(r, bd)
    assert json.loads(json.dumps(bd.to_json()))["lip_length"] == 1


def test_no_lip_when_flanks_run_out():
    # dd = 4 occurrences need four distinct flanking letters, but only three are possible
    r = random_cyclically_reduced_word(2, 4096, 1)
    with pytest.raises(AnalysisError, match="no lip found"):
        bead_decompose(r, 0.3, C_DEFAULT, 4)


@pytest.mark.parametrize("beta,expected", [(4 / 34, False), (10 / 34, False), (20 / 34, True)])
def test_lift_check_engineered(beta, expected):
    s = engineered_spine()
    res = long_subword_lift_check(s, s.L.word, beta)
    readable, bad = lift_oracle(list(s.L.word), s.partition.cls, s.partition.ori,
                                math.ceil(beta * len(ENGINEERED)))
    assert res.verdict is expected
    assert (not bad) is expected
    if not expected:
        assert tuple(tuple(x) for x in res.witness["edges"]) in bad
    else:
        assert res.paths == len(readable)


def test_lift_check_witness_reads_a_y_d():
    s = engineered_spine()
    res = long_subword_lift_check(s, s.L.word, 10 / 34)
    word = []
    for E, dr in res.witness["edges"]:
        word.append(s.sigma.edges[E][2] * dr)
    # A y D, readable in r but not as one stretch of the circle
    assert str(ReducedWord(word, cyclic=False)) == "bba" + "abAAB" + "aa"
    assert "bbaabAABaa" in ENGINEERED * 2


def test_lift_check_cap():
    s = engineered_spine()
    res = long_subword_lift_check(s, s.L.word, 10 / 34, cap=5)
    assert res.verdict == "inconclusive" and res.witness == {"cap": 5}


def test_lift_check_pipeline_spine():
    s = build("simplicial", 2, 3, 11).spine
    res = long_subword_lift_check(s, s.L.word, 0.05)
    assert res.verdict is True and res.paths == 2 * s.L.n
    readable, bad = lift_oracle(list(s.L.word), s.partition.cls, s.partition.ori,
                                math.ceil(0.05 * s.L.n))
    assert not bad and len(readable) == res.paths


def test_lift_check_ignores_rotation():
    s = build("simplicial", 2, 3, 11).spine
    w = list(s.L.word)
    rot = ReducedWord(w[37:] + w[:37])
    a = long_subword_lift_check(s, s.L.word, 0.05)
    b = long_subword_lift_check(s, rot, 0.05)
    assert a.to_json() == b.to_json()


def test_lift_check_rejects_empty_length():
    with pytest.raises(AnalysisError):
        long_subword_lift_check(engineered_spine(), ReducedWord(ENGINEERED), 0)
