"""Exact n-gram counting and rank/frequency tables."""

from __future__ import annotations

from collections.abc import Mapping
from dataclasses import dataclass
from typing import Iterable, Iterator

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .corpus import Corpus, TokenSentence

DEFAULT_CAP = 5_000_000


class NGramTable(Mapping):
    """Counts of n-grams, stored as lexicographically sorted key rows.

    Behaves as a read-only mapping from n-tuples to counts.  ``keys_array``
    has shape (U, n) and ``counts_array`` shape (U,).
    """

    def __init__(self, n: int, keys: np.ndarray, counts: np.ndarray, cap: int | None = None):
        keys = np.asarray(keys, dtype=np.int64).reshape(-1, n)
        counts = np.asarray(counts, dtype=np.int64).reshape(-1)
        if keys.shape[0] != counts.shape[0]:
            raise ValueError("keys and counts disagree in length")
        if counts.size and counts.min() < 1:
            raise ValueError("n-gram counts must be >= 1")
        self.n = n
        self.keys_array = keys
        self.counts_array = counts
        self.cap = cap
        self._index: dict[tuple[int, ...], int] | None = None

    @classmethod
    def from_counts(cls, counts: Mapping, n: int | None = None) -> "NGramTable":
        """Build from a ``{ngram: count}`` mapping; scalar keys are unigrams."""
        items = [((k,) if np.isscalar(k) else tuple(k), int(v)) for k, v in counts.items()]
        if n is None:
            n = len(items[0][0]) if items else 1
        items.sort()
        keys = np.array([k for k, _ in items], dtype=np.int64).reshape(-1, n)
        return cls(n, keys, np.array([v for _, v in items], dtype=np.int64))

    @property
    def total(self) -> int:
        return int(self.counts_array.sum())

    def __len__(self) -> int:
        return int(self.counts_array.size)

    def __iter__(self) -> Iterator[tuple[int, ...]]:
        return (tuple(int(t) for t in row) for row in self.keys_array)

    def __getitem__(self, key) -> int:
        if self._index is None:
            self._index = {k: i for i, k in enumerate(self)}
        if np.isscalar(key):
            key = (key,)
        return int(self.counts_array[self._index[tuple(key)]])

    def merge(self, other: "NGramTable") -> "NGramTable":
        """Sum two tables.  Associative and commutative, so shards can be merged in any order."""
        if other.n != self.n:
            raise ValueError("cannot merge tables of different order")
        keys = np.concatenate([self.keys_array, other.keys_array])
        counts = np.concatenate([self.counts_array, other.counts_array])
        uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
        summed = np.bincount(inverse.reshape(-1), weights=counts, minlength=len(uniq))
        return NGramTable(self.n, uniq, summed.astype(np.int64))

    def to_dict(self) -> dict[tuple[int, ...], int]:
        return {k: int(c) for k, c in zip(self, self.counts_array)}


def _windows(sentences: Iterable[TokenSentence], n: int, cap: int | None) -> np.ndarray:
    chunks = []
    taken = 0
    for s in sentences:
        if cap is not None and taken >= cap:
            break
        if len(s) < n:
            continue
        w = sliding_window_view(s.tokens, n)
        if cap is not None and taken + len(w) > cap:
            w = w[: cap - taken]
        chunks.append(w)
        taken += len(w)
    if not chunks:
        return np.zeros((0, n), dtype=np.int64)
    return np.concatenate(chunks)


def encode_rows(rows: np.ndarray, base: int | None = None) -> np.ndarray | None:
    """Pack n-gram rows into single int64 keys, or None if they would overflow.

    The packing is order preserving, so sorting keys sorts rows lexicographically.
    """
    n = rows.shape[1]
    if base is None:
        base = int(rows.max()) + 1 if rows.size else 1
    if n * np.log2(max(base, 2)) >= 62:
        return None
    keys = np.zeros(rows.shape[0], dtype=np.int64)
    for j in range(n):
        keys = keys * base + rows[:, j]
    return keys


def count_ngrams(corpus: Corpus | Iterable[TokenSentence], n: int, cap: int | None = DEFAULT_CAP) -> NGramTable:
    """Count n-grams over at most ``cap`` windows taken in corpus order."""
    if n < 1:
        raise ValueError("n must be >= 1")
    rows = _windows(corpus, n, cap)
    if rows.shape[0] == 0:
        return NGramTable(n, rows, np.zeros(0, dtype=np.int64), cap)
    base = int(rows.max()) + 1
    packed = encode_rows(rows, base)
    if packed is not None:
        uniq, counts = np.unique(packed, return_counts=True)
        keys = np.empty((uniq.size, n), dtype=np.int64)
        rest = uniq.copy()
        for j in range(n - 1, -1, -1):
            keys[:, j] = rest % base
            rest //= base
    else:
        keys, counts = np.unique(rows, axis=0, return_counts=True)
    return NGramTable(n, keys, counts, cap)


def total_windows(corpus: Iterable[TokenSentence], n: int) -> int:
    return sum(max(0, len(s) - n + 1) for s in corpus)


@dataclass
class RankFrequency:
    ranks: np.ndarray
    freqs: np.ndarray
    ngrams: np.ndarray
    norm_log_rank: np.ndarray
    norm_log_freq: np.ndarray

    def pairs(self) -> list[tuple[int, int]]:
        return [(int(r), int(f)) for r, f in zip(self.ranks, self.freqs)]


def _minmax(values: np.ndarray) -> np.ndarray:
    lo, hi = values.min(), values.max()
    if hi == lo:
        return np.zeros_like(values)
    return (values - lo) / (hi - lo)


def rank_frequency(table: NGramTable) -> RankFrequency:
    """Rank n-grams by descending count, ties broken lexicographically.

    The normalized coordinates are min-max rescaled log values (a constant
    axis maps to 0).
    """
    if len(table) == 0:
        raise ValueError("empty n-gram table")
    # keys_array is already lexicographically sorted, so a stable sort keeps tie order
    order = np.argsort(-table.counts_array, kind="stable")
    freqs = table.counts_array[order]
    ranks = np.arange(1, freqs.size + 1)
    return RankFrequency(
        ranks=ranks,
        freqs=freqs,
        ngrams=table.keys_array[order],
        norm_log_rank=_minmax(np.log(ranks.astype(float))),
        norm_log_freq=_minmax(np.log(freqs.astype(float))),
    )
