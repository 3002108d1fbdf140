from __future__ import annotations

import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from tokenstat.corpus import (
    Corpus,
    CorpusError,
    ScanOrder,
    TokenGrid,
    TokenSentence,
    from_token_lists,
    load_corpus,
    ngram_windows,
    scan_linearize,
    subsample,
    write_binary,
    write_jsonl,
)


def _write_lines(path, records):
    path.write_text("".join(json.dumps(r) + "\n" for r in records), encoding="utf-8")
    return path


class TestLoadJsonl:
    def test_two_lines(self, tmp_path):
        p = _write_lines(tmp_path / "c.jsonl", [{"id": "a", "tokens": [1, 2]}, {"id": "b", "tokens": [3]}])
        c = load_corpus(p)
        assert len(c) == 2
        assert c.num_tokens == 3
        np.testing.assert_array_equal(c.stream(), [1, 2, 3])

    def test_empty_tokens_reports_index(self, tmp_path):
        p = _write_lines(tmp_path / "c.jsonl", [{"id": "a", "tokens": [1]}, {"id": "b", "tokens": []}])
        with pytest.raises(CorpusError, match="empty token list") as info:
            load_corpus(p)
        assert info.value.index == 1

    def test_vocab_boundary(self, tmp_path):
        p = _write_lines(tmp_path / "c.jsonl", [{"id": "a", "tokens": [8191]}, {"id": "b", "tokens": [8192]}])
        with pytest.raises(CorpusError, match="out of range") as info:
            load_corpus(p, vocab_size=8192)
        assert info.value.index == 1
        assert load_corpus(p, vocab_size=8193).num_tokens == 2

    @pytest.mark.parametrize("record", [
        {"id": "a", "tokens": [1, "2"]},
        {"id": "a", "tokens": [-1]},
        {"tokens": [1]},
        {"id": "a", "tokens": [1], "labels": {"object": [1]}},
        [1, 2],
    ])
    def test_malformed_records(self, tmp_path, record):
        p = _write_lines(tmp_path / "c.jsonl", [record])
        with pytest.raises(CorpusError):
            load_corpus(p)

    def test_bad_json_line(self, tmp_path):
        p = tmp_path / "c.jsonl"
        p.write_text('{"id": "a", "tokens": [1]}\n{oops\n')
        with pytest.raises(CorpusError, match="record 1"):
            load_corpus(p)

    def test_duplicate_ids(self, tmp_path):
        p = _write_lines(tmp_path / "c.jsonl", [{"id": "a", "tokens": [1]}, {"id": "a", "tokens": [2]}])
        with pytest.raises(CorpusError, match="duplicate"):
            load_corpus(p)

    def test_labels(self, tmp_path):
        p = _write_lines(tmp_path / "c.jsonl", [{"id": "a", "tokens": [1], "labels": {"part": [3, 1, 3]}}])
        s = load_corpus(p).sentences[0]
        assert s.labels == {"part": frozenset({1, 3})}


class TestRoundTrip:
    def test_canonical_jsonl_is_stable(self, tmp_path):
        p = tmp_path / "a.jsonl"
        p.write_text('{"id":"x","labels":{"part":[1,4],"whole":[0]},"tokens":[5,6]}\n'
                     '{"id":"y","tokens":[7]}\n', encoding="utf-8")
        write_jsonl(load_corpus(p), tmp_path / "b.jsonl")
        q = tmp_path / "b.jsonl"
        write_jsonl(load_corpus(q), tmp_path / "c.jsonl")
        assert q.read_bytes() == (tmp_path / "c.jsonl").read_bytes()

    @settings(max_examples=30, deadline=None)
    @given(st.lists(st.lists(st.integers(0, 2**20), min_size=1, max_size=20), min_size=1, max_size=10))
    def test_jsonl_write_load_write(self, tmp_path_factory, lists):
        d = tmp_path_factory.mktemp("rt")
        write_jsonl(from_token_lists(lists), d / "a.jsonl")
        write_jsonl(load_corpus(d / "a.jsonl"), d / "b.jsonl")
        assert (d / "a.jsonl").read_bytes() == (d / "b.jsonl").read_bytes()

    def test_binary_round_trip(self, tmp_path):
        c = from_token_lists([[1, 2, 3], [4], [0, 9]], vocab_size=10)
        write_binary(c, tmp_path / "c.bin")
        back = load_corpus(tmp_path / "c.bin", format="bin")
        assert back.vocab_size == 10
        assert back.sentences == c.sentences

    def test_binary_declared_vocab_enforced(self, tmp_path):
        c = from_token_lists([[1, 2, 3]], vocab_size=None)
        write_binary(c, tmp_path / "c.bin")
        with pytest.raises(CorpusError, match="out of range"):
            load_corpus(tmp_path / "c.bin", format="binary", vocab_size=3)

    def test_binary_truncated(self, tmp_path):
        write_binary(from_token_lists([[1, 2, 3]]), tmp_path / "c.bin")
        data = (tmp_path / "c.bin").read_bytes()
        (tmp_path / "t.bin").write_bytes(data[:-2])
        with pytest.raises(CorpusError, match="truncated"):
            load_corpus(tmp_path / "t.bin", format="bin")

    def test_binary_magic(self, tmp_path):
        (tmp_path / "x.bin").write_bytes(b"NOPE\x00\x00\x00\x00")
        with pytest.raises(CorpusError, match="magic"):
            load_corpus(tmp_path / "x.bin", format="bin")


class TestScanLinearize:
    def test_square(self):
        s = scan_linearize(TokenGrid.from_rows([[1, 2], [3, 4]]))
        np.testing.assert_array_equal(s.tokens, [1, 2, 3, 4])

    def test_single_row(self):
        s = scan_linearize(TokenGrid.from_rows([[5, 6, 7, 8]]), ScanOrder.ROW_WISE)
        np.testing.assert_array_equal(s.tokens, [5, 6, 7, 8])

    def test_three_by_two(self):
        a, b, c, d, e, f = 10, 11, 12, 13, 14, 15
        s = scan_linearize(TokenGrid.from_rows([[a, b], [c, d], [e, f]]))
        np.testing.assert_array_equal(s.tokens, [a, b, c, d, e, f])

    def test_ragged(self):
        with pytest.raises(ValueError):
            TokenGrid.from_rows([[1, 2], [3]])

    @given(st.integers(1, 6), st.integers(1, 6), st.data())
    def test_preserves_multiset(self, h, w, data):
        cells = data.draw(st.lists(st.integers(0, 50), min_size=h * w, max_size=h * w))
        s = scan_linearize(TokenGrid(h, w, cells))
        assert len(s) == h * w
        assert sorted(s.tokens.tolist()) == sorted(cells)


class TestNgramWindows:
    def test_bigrams(self):
        assert ngram_windows([1, 2, 3], 2) == [(1, 2), (2, 3)]

    def test_unigrams(self):
        assert ngram_windows([1, 2, 3], 1) == [(1,), (2,), (3,)]

    def test_too_short(self):
        assert ngram_windows([1, 2], 3) == []

    def test_window_count(self):
        c = from_token_lists([[1, 2, 3], [4], [5, 6]])
        for n in (1, 2, 3):
            assert sum(len(ngram_windows(s, n)) for s in c) == sum(max(0, len(s) - n + 1) for s in c)


class TestSubsample:
    corpus = from_token_lists([[i] for i in range(20)])

    def test_full(self):
        assert {s.id for s in subsample(self.corpus, 20, 0)} == {s.id for s in self.corpus}

    def test_empty(self):
        assert len(subsample(self.corpus, 0, 0)) == 0

    def test_deterministic(self):
        a = subsample(self.corpus, 7, 42)
        b = subsample(self.corpus, 7, 42)
        assert [s.id for s in a] == [s.id for s in b]

    def test_too_many(self):
        with pytest.raises(ValueError):
            subsample(self.corpus, 21, 0)


class TestSentence:
    def test_tokens_read_only(self):
        s = TokenSentence("a", [1, 2])
        with pytest.raises(ValueError):
            s.tokens[0] = 5

    def test_corpus_vocab_check(self):
        with pytest.raises(CorpusError):
            Corpus("c", [TokenSentence("a", [4])], vocab_size=4)
