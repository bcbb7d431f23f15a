"""Lexical similarity primitives for the entity-level filter.

The token-set score compares two texts on the words they share: both are
tokenized into sets, and the sorted intersection/differences are recombined
into three string pairings whose best normalized Levenshtein similarity is
the score. This keeps the measure robust to word order and length
differences between a free-form response and an encyclopedia description.
"""

from __future__ import annotations

import re

import numpy as np

_TOKEN_RE = re.compile(r"[^0-9a-z]+")

# Below this size the plain two-row loop beats numpy's call overhead.
_SMALL_DP_CELLS = 4096


def tokenize(text: str) -> list[str]:
    """Lowercase and split on runs of non-alphanumeric characters."""
    return [t for t in _TOKEN_RE.split(text.lower()) if t]


def levenshtein(a: str, b: str) -> int:
    """Plain edit distance (unit-cost insert/delete/substitute)."""
    if a == b:
        return 0
    if not a:
        return len(b)
    if not b:
        return len(a)
    if len(a) * len(b) <= _SMALL_DP_CELLS:
        return _levenshtein_small(a, b)
    return _levenshtein_rows(a, b)


def _levenshtein_small(a: str, b: str) -> int:
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, 1):
        cur = [i]
        for j, cb in enumerate(b, 1):
            cur.append(min(prev[j] + 1, cur[j - 1] + 1, prev[j - 1] + (ca != cb)))
        prev = cur
    return prev[-1]


def _levenshtein_rows(a: str, b: str) -> int:
    # Row-vectorized DP. The left-to-right insertion dependency is resolved
    # through the identity row[j] - j = cummin(candidate[k] - k), k <= j.
    bcodes = np.array([ord(c) for c in b], dtype=np.int64)
    offsets = np.arange(len(b) + 1, dtype=np.int64)
    prev = offsets.copy()
    cand = np.empty(len(b) + 1, dtype=np.int64)
    for i, ca in enumerate(a, 1):
        np.minimum(prev[:-1] + (bcodes != ord(ca)), prev[1:] + 1, out=cand[1:])
        cand[0] = i
        prev = np.minimum.accumulate(cand - offsets) + offsets
    return int(prev[-1])


def normalized_similarity(a: str, b: str) -> float:
    """1 - distance/max(len); 1.0 when both strings are empty."""
    longest = max(len(a), len(b))
    if longest == 0:
        return 1.0
    return 1.0 - levenshtein(a, b) / longest


def token_set_similarity(a: str, b: str) -> float:
    """Token-set ratio in [0, 1].

    Scores the best of the three standard pairings built from the sorted
    token intersection and the two sorted differences. Returns 0.0 when
    either text has no tokens.
    """
    tokens_a = set(tokenize(a))
    tokens_b = set(tokenize(b))
    if not tokens_a or not tokens_b:
        return 0.0

    sect = " ".join(sorted(tokens_a & tokens_b))
    combined_ab = (sect + " " + " ".join(sorted(tokens_a - tokens_b))).strip()
    combined_ba = (sect + " " + " ".join(sorted(tokens_b - tokens_a))).strip()

    return max(
        normalized_similarity(sect, combined_ab),
        normalized_similarity(sect, combined_ba),
        normalized_similarity(combined_ab, combined_ba),
    )


def plain_token_similarity(a: str, b: str) -> float:
    """Config alternative: normalized Levenshtein over the full token strings."""
    tokens_a = tokenize(a)
    tokens_b = tokenize(b)
    if not tokens_a or not tokens_b:
        return 0.0
    return normalized_similarity(" ".join(tokens_a), " ".join(tokens_b))


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity in [-1, 1]; 0.0 if either vector is all zeros."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))
