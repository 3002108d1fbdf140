"""Shannon entropy, Huffman codes and stream compression reports."""

from __future__ import annotations

import heapq
import math
from collections import Counter
from dataclasses import asdict, dataclass
from typing import Hashable, Mapping, Sequence

import numpy as np

DEFAULT_STREAM_CAP = 500_000


def shannon_entropy(dist: Mapping[Hashable, float] | Sequence[float]) -> float:
    """H = -sum p log2 p, in bits.  Zero-probability entries contribute nothing."""
    p = np.fromiter(dist.values() if isinstance(dist, Mapping) else dist, dtype=float)
    if p.size == 0 or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("not a probability distribution")
    p = p[p > 0]
    return float(max(0.0, -np.sum(p * np.log2(p))))


def entropy_from_counts(counts) -> float:
    c = np.asarray(counts, dtype=float)
    c = c[c > 0]
    p = c / c.sum()
    return float(max(0.0, -np.sum(p * np.log2(p))))


@dataclass
class HuffmanCode:
    codewords: dict
    lengths: dict
    avg_code_length: float

    def encode(self, stream) -> str:
        return "".join(self.codewords[t] for t in stream)

    def kraft_sum(self) -> float:
        return sum(2.0 ** -l for l in self.lengths.values())


def huffman_lengths(freqs: Mapping[Hashable, int]) -> dict:
    """Optimal code lengths.

    Heap entries are ordered by (count, tie key): leaves use the rank of the
    sorted symbol, merged nodes take fresh keys after all leaves, so the
    result does not depend on dict order or platform.
    """
    symbols = sorted(s for s, c in freqs.items() if c > 0)
    if not symbols:
        raise ValueError("need at least one symbol with positive count")
    if len(symbols) == 1:
        return {symbols[0]: 1}
    heap = [(freqs[s], i, (i,)) for i, s in enumerate(symbols)]
    heapq.heapify(heap)
    depth = [0] * len(symbols)
    next_key = len(symbols)
    while len(heap) > 1:
        c1, _, leaves1 = heapq.heappop(heap)
        c2, _, leaves2 = heapq.heappop(heap)
        for leaf in leaves1 + leaves2:
            depth[leaf] += 1
        heapq.heappush(heap, (c1 + c2, next_key, leaves1 + leaves2))
        next_key += 1
    return {s: depth[i] for i, s in enumerate(symbols)}


def canonical_codewords(lengths: Mapping[Hashable, int]) -> dict:
    """Canonical prefix code for the given lengths (shorter codes first, ties by symbol)."""
    code = 0
    prev_len = 0
    out = {}
    for sym, length in sorted(lengths.items(), key=lambda kv: (kv[1], kv[0])):
        code <<= length - prev_len
        out[sym] = format(code, f"0{length}b")
        code += 1
        prev_len = length
    return out


def build_huffman(freqs: Mapping[Hashable, int]) -> HuffmanCode:
    """Huffman code for a count table; a lone symbol gets a 1-bit code."""
    lengths = huffman_lengths(freqs)
    total = sum(freqs[s] for s in lengths)
    avg = sum(freqs[s] * l for s, l in lengths.items()) / total
    return HuffmanCode(canonical_codewords(lengths), lengths, avg)


@dataclass
class CompressionReport:
    avg_code_length: float
    entropy: float
    fixed_code_length: int
    orig_bits: int
    huff_bits: int
    comp_rate: float
    pct_reduction: float
    num_tokens: int
    unique_tokens: int

    def to_dict(self) -> dict:
        return asdict(self)


def compression_report(stream, cap: int | None = DEFAULT_STREAM_CAP) -> CompressionReport:
    """Huffman-compress the first ``cap`` tokens against a fixed-length code.

    Tokens may be ints or hashable n-gram tuples.  Entropy and the Huffman
    code use the same capped empirical distribution.
    """
    if isinstance(stream, np.ndarray):
        stream = stream.tolist()
    tokens = list(stream[:cap] if cap is not None else stream)
    if not tokens:
        raise ValueError("empty stream")
    counts = Counter(tokens)
    code = build_huffman(counts)
    n = len(tokens)
    huff_bits = sum(counts[s] * l for s, l in code.lengths.items())
    fixed = max(1, math.ceil(math.log2(len(counts))))
    orig_bits = n * fixed
    return CompressionReport(
        avg_code_length=huff_bits / n,
        entropy=entropy_from_counts(list(counts.values())),
        fixed_code_length=fixed,
        orig_bits=orig_bits,
        huff_bits=huff_bits,
        comp_rate=orig_bits / huff_bits,
        pct_reduction=100.0 * (1.0 - huff_bits / orig_bits),
        num_tokens=n,
        unique_tokens=len(counts),
    )
