import itertools
from collections import Counter

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from oracles import all_cyclic_words, cyclically_reduced
from spineforge.words import (Letter, Presentation, ReducedWord, WordError, is_reduced,
                              random_cyclically_reduced_word, relator_count,
                              sample_presentation, sample_words)


def test_empty_word_for_zero_length():
    assert len(random_cyclically_reduced_word(2, 0, 5)) == 0


def test_rank_too_small():
    with pytest.raises(WordError, match="rank too small"):
        random_cyclically_reduced_word(1, 4, 0)


def test_length_three_outputs_lie_in_enumeration():
    # 36 reduced words of length 3, 8 of which cancel around the wrap
    reduced = [w for w in itertools.product((1, -1, 2, -2), repeat=3) if is_reduced(w)]
    allowed = set(all_cyclic_words(2, 3))
    assert len(reduced) == 36
    assert len(allowed) == 28 == 3 ** 3 + 1
    seen = {tuple(random_cyclically_reduced_word(2, 3, s)) for s in range(400)}
    assert seen == allowed


def test_letter_counts_within_three_sigma():
    w = random_cyclically_reduced_word(2, 10_000, 7)
    c = Counter(w)
    n = len(w)
    for x in (1, -1, 2, -2):
        assert abs(c[x] - n / 4) < 3 * np.sqrt(n * 0.25 * 0.75)


def test_is_reduced_examples():
    assert not is_reduced([1, -1])
    assert not is_reduced([1, 2, -1], cyclic=True)
    assert is_reduced([1, 2, -1], cyclic=False)
    assert is_reduced([1, 2, 1, 2], cyclic=True)


def test_letter_and_string_forms():
    a = Letter.from_int(-3)
    assert str(a) == "C" and a.inverse().to_int() == 3
    w = ReducedWord.parse("abAB")
    assert list(w) == [1, 2, -1, -2]
    assert str(w) == "abAB"
    assert str(w.inverse()) == "baBA"
    with pytest.raises(WordError):
        ReducedWord.parse("aA")


def test_sample_presentation_counts():
    assert len(sample_presentation(2, 20, 0.1, 1).relators) == 9
    assert len(sample_presentation(2, 10, 0.01, 1).relators) == 1
    assert relator_count(3, 30, 0.2) == 15625
    p = sample_presentation(3, 30, 0.2, 5)
    assert len(p.relators) == 15625
    assert all(len(r) == 30 for r in p.relators)


def test_sample_presentation_rejects_bad_density():
    with pytest.raises(WordError):
        sample_presentation(2, 10, 0.5, 0)


def test_relator_overflow_reports_count():
    with pytest.raises(WordError, match="relator count overflow"):
        sample_presentation(3, 200, 0.4, 0)


def test_uniform_on_short_words():
    # exact-uniform sampler against the brute-force enumeration
    for n in (2, 4, 6):
        words = all_cyclic_words(2, n)
        index = {w: i for i, w in enumerate(words)}
        rows = sample_words(2, n, 1_000_000, 11 + n)
        keys = [index[tuple(int(x) for x in r)] for r in rows]
        counts = np.bincount(keys, minlength=len(words))
        assert chisquare(counts).pvalue > 0.001


def test_scalar_sampler_uniform_on_length_three():
    words = all_cyclic_words(2, 3)
    c = Counter(tuple(random_cyclically_reduced_word(2, 3, s)) for s in range(2800))
    assert chisquare([c[w] for w in words]).pvalue > 0.001


def test_sequential_sampler_outputs_reduced_words():
    for s in range(200):
        w = random_cyclically_reduced_word(3, 9, s, method="sequential")
        assert is_reduced(list(w), cyclic=True)


def test_determinism():
    a = random_cyclically_reduced_word(3, 500, 42)
    b = random_cyclically_reduced_word(3, 500, 42)
    assert a == b and str(a) == str(b)
    assert Presentation(3, [a]).n == 500


@settings(max_examples=200, deadline=None)
@given(k=st.integers(2, 5), n=st.integers(1, 60), seed=st.integers(0, 2**32))
def test_random_words_are_cyclically_reduced(k, n, seed):
    w = random_cyclically_reduced_word(k, n, seed)
    assert len(w) == n
    assert cyclically_reduced(list(w))
    assert is_reduced(list(w), cyclic=True)
    assert all(1 <= abs(x) <= k for x in w)
