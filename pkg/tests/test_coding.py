from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import kraft_feasible_min, min_prefix_code_cost
from tokenstat.coding import (
    build_huffman,
    canonical_codewords,
    compression_report,
    entropy_from_counts,
    huffman_lengths,
    shannon_entropy,
)


class TestEntropy:
    def test_uniform_256(self):
        assert shannon_entropy([1 / 256] * 256) == pytest.approx(8.0, abs=1e-12)

    def test_point_mass(self):
        assert shannon_entropy({"a": 1.0, "b": 0.0}) == 0.0

    def test_dyadic(self):
        assert shannon_entropy([0.5, 0.25, 0.25]) == 1.5

    def test_rejects_non_distribution(self):
        with pytest.raises(ValueError):
            shannon_entropy([0.5, 0.6])
        with pytest.raises(ValueError):
            shannon_entropy([1.5, -0.5])

    def test_counts_match_probabilities(self):
        c = np.array([5, 3, 2])
        assert entropy_from_counts(c) == pytest.approx(shannon_entropy(c / c.sum()), abs=1e-15)


class TestHuffman:
    def test_dyadic(self):
        code = build_huffman({"a": 2, "b": 1, "c": 1})
        assert code.lengths == {"a": 1, "b": 2, "c": 2}
        assert code.avg_code_length == 1.5

    def test_singleton(self):
        code = build_huffman({"a": 1})
        assert code.lengths == {"a": 1}
        assert code.encode("aaa") == "000"

    def test_zero_counts_dropped(self):
        assert set(build_huffman({1: 3, 2: 0, 3: 1}).lengths) == {1, 3}

    def test_deterministic_ties(self):
        a = huffman_lengths({s: 1 for s in "edcba"})
        b = huffman_lengths(dict(zip("abcde", [1] * 5)))
        assert a == b

    def test_canonical_prefix_free(self):
        words = list(canonical_codewords({"a": 1, "b": 2, "c": 3, "d": 3}).values())
        assert not any(x != y and y.startswith(x) for x in words for y in words)

    def test_brute_force_oracles_agree(self):
        rng = np.random.default_rng(5)
        for _ in range(30):
            f = rng.integers(1, 30, rng.integers(1, 6)).tolist()
            assert min_prefix_code_cost(f) == kraft_feasible_min(f)

    @settings(max_examples=60, deadline=None)
    @given(st.lists(st.integers(1, 50), min_size=1, max_size=5))
    def test_optimal_small_alphabets(self, freqs):
        code = build_huffman(dict(enumerate(freqs)))
        cost = sum(freqs[s] * l for s, l in code.lengths.items())
        assert cost == min_prefix_code_cost(freqs)

    @given(st.lists(st.integers(1, 10**6), min_size=2, max_size=60))
    def test_kraft_equality(self, freqs):
        assert build_huffman(dict(enumerate(freqs))).kraft_sum() == 1.0

    @given(st.lists(st.integers(1, 10**4), min_size=2, max_size=200))
    def test_shannon_bound(self, freqs):
        code = build_huffman(dict(enumerate(freqs)))
        h = entropy_from_counts(freqs)
        assert h <= code.avg_code_length < h + 1

    def test_singleton_exceeds_bound_by_decision(self):
        # a lone symbol still costs one bit while its entropy is 0
        assert build_huffman({0: 5}).avg_code_length == entropy_from_counts([5]) + 1

    def test_round_trip(self, rng):
        stream = rng.integers(0, 20, 500).tolist()
        code = build_huffman({s: stream.count(s) for s in set(stream)})
        bits = code.encode(stream)
        inverse = {w: s for s, w in code.codewords.items()}
        out, cur = [], ""
        for b in bits:
            cur += b
            if cur in inverse:
                out.append(inverse[cur])
                cur = ""
        assert out == stream and cur == ""


class TestCompressionReport:
    def test_single_token(self):
        r = compression_report([7] * 100)
        assert r.entropy == 0.0
        assert r.huff_bits == 100
        assert r.fixed_code_length == 1

    def test_arithmetic_identities(self, rng):
        r = compression_report(rng.zipf(1.6, 20_000) % 3000)
        assert r.orig_bits == r.num_tokens * math.ceil(math.log2(r.unique_tokens))
        assert r.comp_rate == pytest.approx(r.orig_bits / r.huff_bits, rel=1e-12)
        assert r.pct_reduction == pytest.approx(100 * (1 - r.huff_bits / r.orig_bits), rel=1e-12)
        assert r.avg_code_length == pytest.approx(r.huff_bits / r.num_tokens, rel=1e-12)

    def test_cap(self):
        r = compression_report(list(range(10)) * 10, cap=15)
        assert r.num_tokens == 15 and r.unique_tokens == 10

    def test_ngram_tuples(self):
        r = compression_report([(1, 2), (1, 2), (3, 4)])
        assert r.unique_tokens == 2

    def test_uniform_incompressible(self, rng):
        assert compression_report(rng.integers(0, 2**13, 200_000)).pct_reduction < 5

    def test_empty(self):
        with pytest.raises(ValueError):
            compression_report([])
