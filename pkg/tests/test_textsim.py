"""Lexical similarity primitives against brute-force oracles."""

from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from kgfact.textsim import (
    _levenshtein_rows,
    _levenshtein_small,
    cosine,
    levenshtein,
    normalized_similarity,
    plain_token_similarity,
    token_set_similarity,
    tokenize,
)


def oracle_levenshtein(a: str, b: str) -> int:
    """Textbook full-matrix DP, kept deliberately naive."""
    m, n = len(a), len(b)
    d = [[0] * (n + 1) for _ in range(m + 1)]
    for i in range(m + 1):
        d[i][0] = i
    for j in range(n + 1):
        d[0][j] = j
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            cost = 0 if a[i - 1] == b[j - 1] else 1
            d[i][j] = min(d[i - 1][j] + 1, d[i][j - 1] + 1, d[i - 1][j - 1] + cost)
    return d[m][n]


class TestTokenize:
    def test_lowercases_and_splits_punctuation(self):
        assert tokenize("New-York, 1924!") == ["new", "york", "1924"]

    def test_empty_and_symbol_only(self):
        assert tokenize("") == []
        assert tokenize("!!! ???") == []

    def test_keeps_digits(self):
        assert tokenize("P569 is 1912") == ["p569", "is", "1912"]


class TestLevenshtein:
    @pytest.mark.parametrize(
        "a,b,expected",
        [
            ("", "", 0),
            ("abc", "", 3),
            ("", "abc", 3),
            ("kitten", "sitting", 3),
            ("flaw", "lawn", 2),
            ("same", "same", 0),
        ],
    )
    def test_known_distances(self, a, b, expected):
        assert levenshtein(a, b) == expected

    @given(st.text(alphabet="abcd", max_size=12), st.text(alphabet="abcd", max_size=12))
    def test_matches_oracle(self, a, b):
        assert levenshtein(a, b) == oracle_levenshtein(a, b)

    @given(st.text(alphabet="abc", max_size=20), st.text(alphabet="abc", max_size=20))
    def test_small_and_vectorized_agree(self, a, b):
        if a and b:
            assert _levenshtein_small(a, b) == _levenshtein_rows(a, b)

    def test_large_inputs_use_vectorized_path(self):
        a = "ab" * 60
        b = "ba" * 55
        assert len(a) * len(b) > 4096
        assert levenshtein(a, b) == oracle_levenshtein(a, b)

    @given(st.text(alphabet="abc", max_size=15), st.text(alphabet="abc", max_size=15))
    def test_symmetry_and_bounds(self, a, b):
        d = levenshtein(a, b)
        assert d == levenshtein(b, a)
        assert abs(len(a) - len(b)) <= d <= max(len(a), len(b))


class TestNormalizedSimilarity:
    def test_both_empty_is_one(self):
        assert normalized_similarity("", "") == 1.0

    def test_identical(self):
        assert normalized_similarity("abc", "abc") == 1.0

    def test_disjoint(self):
        assert normalized_similarity("abc", "xyz") == 0.0

    @given(st.text(max_size=20), st.text(max_size=20))
    def test_in_unit_interval(self, a, b):
        assert 0.0 <= normalized_similarity(a, b) <= 1.0


class TestTokenSetSimilarity:
    def test_reordered_tokens_score_one(self):
        a = "the Eiffel Tower stands in Paris"
        b = "In Paris stands the Eiffel tower."
        assert token_set_similarity(a, b) == 1.0

    def test_duplicate_tokens_collapse(self):
        assert token_set_similarity("go go go", "go") == 1.0

    def test_empty_text_scores_zero(self):
        assert token_set_similarity("", "words here") == 0.0
        assert token_set_similarity("words here", "") == 0.0
        assert token_set_similarity("", "") == 0.0
        assert token_set_similarity("...", "words") == 0.0

    def test_disjoint_token_sets_score_low(self):
        # No shared characters at all: every pairing bottoms out at zero.
        assert token_set_similarity("aaa", "zzz") == 0.0
        # Disjoint token sets still share letters across the difference
        # strings, so the score is small but not necessarily zero.
        assert token_set_similarity("alpha beta", "gamma delta") < 0.5

    def test_subset_scores_high(self):
        score = token_set_similarity("a museum in the valley", "museum valley")
        assert score == 1.0  # intersection pairing is exact for a token subset

    @given(st.text(max_size=30), st.text(max_size=30))
    def test_symmetric_and_bounded(self, a, b):
        score = token_set_similarity(a, b)
        assert 0.0 <= score <= 1.0
        assert score == token_set_similarity(b, a)


class TestPlainTokenSimilarity:
    def test_order_matters(self):
        reordered = plain_token_similarity("alpha beta", "beta alpha")
        assert reordered < 1.0
        assert plain_token_similarity("alpha beta", "alpha beta") == 1.0

    def test_empty_scores_zero(self):
        assert plain_token_similarity("", "x") == 0.0

    def test_normalizes_whitespace_and_case(self):
        assert plain_token_similarity("A  B", "a b") == 1.0


class TestCosine:
    def test_parallel_vectors(self):
        assert cosine(np.array([1.0, 2.0]), np.array([2.0, 4.0])) == pytest.approx(1.0)

    def test_orthogonal_vectors(self):
        assert cosine(np.array([1.0, 0.0]), np.array([0.0, 1.0])) == 0.0

    def test_opposite_vectors(self):
        assert cosine(np.array([1.0, 0.0]), np.array([-1.0, 0.0])) == pytest.approx(-1.0)

    def test_zero_vector_scores_zero(self):
        assert cosine(np.array([0.0, 0.0]), np.array([1.0, 1.0])) == 0.0

    @given(
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
        st.lists(st.floats(-10, 10), min_size=3, max_size=3),
    )
    def test_bounded(self, u, v):
        assert -1.0 - 1e-12 <= cosine(np.array(u), np.array(v)) <= 1.0 + 1e-12
