"""Tokenized corpora: data model, JSONL/binary I/O, linearization and windowing.

A corpus is a finite sequence of sentences, one per document (an image or a
caption).  Tokens are opaque non-negative integer ids; text tokenization and
image tokenization both happen upstream.
"""

from __future__ import annotations

import enum
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

GRANULARITIES = ("whole", "part", "subpart")

BINARY_MAGIC = b"TKS1"
_U32 = struct.Struct("<I")


class CorpusError(ValueError):
    """Raised for malformed corpus records; carries the record index."""

    def __init__(self, message: str, index: int | None = None):
        self.index = index
        if index is not None:
            message = f"record {index}: {message}"
        super().__init__(message)


def _frozen_tokens(tokens) -> np.ndarray:
    arr = np.array(tokens, dtype=np.int64).reshape(-1)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class TokenSentence:
    """One linearized document.

    ``tokens`` is a read-only int64 array; ``labels`` maps a granularity
    (``whole``, ``part``, ``subpart``) to the set of part-label ids present.
    """

    id: str
    tokens: np.ndarray
    labels: Mapping[str, frozenset[int]] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "tokens", _frozen_tokens(self.tokens))
        object.__setattr__(
            self, "labels", {g: frozenset(int(v) for v in s) for g, s in self.labels.items()}
        )
        if self.tokens.size == 0:
            raise CorpusError(f"sentence {self.id!r}: empty token list")
        if self.tokens.min() < 0:
            raise CorpusError(f"sentence {self.id!r}: negative token id")
        for g in self.labels:
            if g not in GRANULARITIES:
                raise CorpusError(f"sentence {self.id!r}: unknown granularity {g!r}")

    def __len__(self) -> int:
        return int(self.tokens.size)

    def __eq__(self, other) -> bool:
        if not isinstance(other, TokenSentence):
            return NotImplemented
        return (
            self.id == other.id
            and np.array_equal(self.tokens, other.tokens)
            and dict(self.labels) == dict(other.labels)
        )

    def __hash__(self) -> int:
        return hash((self.id, self.tokens.tobytes()))


@dataclass(frozen=True)
class TokenGrid:
    """A 2-D token field as produced by an image tokenizer, row-major cells."""

    height: int
    width: int
    cells: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "cells", tuple(int(c) for c in self.cells))
        if self.height < 1 or self.width < 1:
            raise ValueError("grid dimensions must be positive")
        if len(self.cells) != self.height * self.width:
            raise ValueError(
                f"grid has {len(self.cells)} cells, expected {self.height}x{self.width}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "TokenGrid":
        widths = {len(r) for r in rows}
        if len(widths) != 1:
            raise ValueError("ragged grid rows")
        return cls(len(rows), widths.pop(), tuple(c for r in rows for c in r))


class ScanOrder(enum.Enum):
    """Linearization order for token grids.  Only row-wise scanning exists."""

    ROW_WISE = "row"


@dataclass
class Corpus:
    name: str
    sentences: list[TokenSentence]
    vocab_size: int | None = None

    def __post_init__(self):
        seen: set[str] = set()
        for i, s in enumerate(self.sentences):
            if s.id in seen:
                raise CorpusError(f"duplicate sentence id {s.id!r}", i)
            seen.add(s.id)
            if self.vocab_size is not None and s.tokens.max() >= self.vocab_size:
                raise CorpusError(
                    f"token id {int(s.tokens.max())} out of range for vocab_size {self.vocab_size}", i
                )

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[TokenSentence]:
        return iter(self.sentences)

    @property
    def num_tokens(self) -> int:
        return sum(len(s) for s in self.sentences)

    def stream(self) -> np.ndarray:
        """All tokens concatenated in corpus order."""
        if not self.sentences:
            return np.zeros(0, dtype=np.int64)
        return np.concatenate([s.tokens for s in self.sentences])


def scan_linearize(grid: TokenGrid, order: ScanOrder = ScanOrder.ROW_WISE, id: str = "") -> TokenSentence:
    """Turn a token grid into a sentence: rows top-to-bottom, each left-to-right."""
    if order is not ScanOrder.ROW_WISE:
        raise ValueError(f"unsupported scan order {order}")
    cells = np.asarray(grid.cells, dtype=np.int64).reshape(grid.height, grid.width)
    return TokenSentence(id, cells.reshape(-1))


def ngram_windows(sentence: TokenSentence | Sequence[int], n: int) -> list[tuple[int, ...]]:
    """Overlapping n-grams of a single sentence; never crosses sentence boundaries."""
    if n < 1:
        raise ValueError("n must be >= 1")
    tokens = sentence.tokens if isinstance(sentence, TokenSentence) else np.asarray(sentence)
    return [tuple(int(t) for t in tokens[i : i + n]) for i in range(max(0, len(tokens) - n + 1))]


def subsample(corpus: Corpus, k: int, seed: int) -> Corpus:
    """Uniform sample of ``k`` sentences without replacement, in corpus order."""
    if k < 0 or k > len(corpus):
        raise ValueError(f"cannot sample {k} sentences from a corpus of {len(corpus)}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(len(corpus), size=k, replace=False))
    return Corpus(corpus.name, [corpus.sentences[i] for i in idx], corpus.vocab_size)


# --- serialization ---------------------------------------------------------


def _record_to_sentence(rec, index: int) -> TokenSentence:
    if not isinstance(rec, dict):
        raise CorpusError("record is not a JSON object", index)
    if "id" not in rec or "tokens" not in rec:
        raise CorpusError("record needs 'id' and 'tokens'", index)
    tokens = rec["tokens"]
    if not isinstance(tokens, list) or not all(
        isinstance(t, int) and not isinstance(t, bool) for t in tokens
    ):
        raise CorpusError("'tokens' must be a list of integers", index)
    if not tokens:
        raise CorpusError("empty token list", index)
    labels = rec.get("labels") or {}
    if not isinstance(labels, dict):
        raise CorpusError("'labels' must be an object", index)
    try:
        return TokenSentence(str(rec["id"]), tokens, {g: set(v) for g, v in labels.items()})
    except (CorpusError, TypeError) as exc:
        raise CorpusError(str(exc), index) from None


def iter_jsonl(path: str | Path, vocab_size: int | None = None) -> Iterator[TokenSentence]:
    """Stream sentences from a JSONL file, validating each record."""
    with open(path, encoding="utf-8") as fh:
        index = 0
        for line in fh:
            if not line.strip():
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusError(f"malformed JSON: {exc.msg}", index) from None
            sent = _record_to_sentence(rec, index)
            if vocab_size is not None and sent.tokens.max() >= vocab_size:
                raise CorpusError(
                    f"token id {int(sent.tokens.max())} out of range for vocab_size {vocab_size}", index
                )
            yield sent
            index += 1


def iter_binary(path: str | Path, vocab_size: int | None = None) -> Iterator[TokenSentence]:
    with open(path, "rb") as fh:
        if fh.read(4) != BINARY_MAGIC:
            raise CorpusError("bad magic bytes, expected TKS1")
        (declared,) = _U32.unpack(_read_exact(fh, 4, None))
        limit = vocab_size if vocab_size is not None else (declared or None)
        index = 0
        while True:
            head = fh.read(4)
            if not head:
                return
            if len(head) < 4:
                raise CorpusError("truncated record header", index)
            (id_len,) = _U32.unpack(head)
            sid = _read_exact(fh, id_len, index).decode("utf-8")
            (count,) = _U32.unpack(_read_exact(fh, 4, index))
            tokens = np.frombuffer(_read_exact(fh, 4 * count, index), dtype="<u4").astype(np.int64)
            if count == 0:
                raise CorpusError("empty token list", index)
            if limit is not None and tokens.max() >= limit:
                raise CorpusError(
                    f"token id {int(tokens.max())} out of range for vocab_size {limit}", index
                )
            yield TokenSentence(sid, tokens)
            index += 1


def _read_exact(fh, size: int, index: int | None) -> bytes:
    buf = fh.read(size)
    if len(buf) != size:
        raise CorpusError("truncated record", index)
    return buf


def binary_vocab_size(path: str | Path) -> int | None:
    with open(path, "rb") as fh:
        if fh.read(4) != BINARY_MAGIC:
            raise CorpusError("bad magic bytes, expected TKS1")
        (declared,) = _U32.unpack(_read_exact(fh, 4, None))
    return declared or None


def load_corpus(
    path: str | Path, format: str = "jsonl", vocab_size: int | None = None, name: str | None = None
) -> Corpus:
    """Read a corpus file.  ``format`` is ``jsonl`` or ``binary`` (alias ``bin``)."""
    path = Path(path)
    if format == "jsonl":
        sentences = list(iter_jsonl(path, vocab_size))
    elif format in ("binary", "bin"):
        if vocab_size is None:
            vocab_size = binary_vocab_size(path)
        sentences = list(iter_binary(path, vocab_size))
    else:
        raise ValueError(f"unknown corpus format {format!r}")
    return Corpus(name or path.stem, sentences, vocab_size)


def sentence_to_json(sentence: TokenSentence) -> str:
    """Canonical JSONL line: compact separators, sorted label keys and ids."""
    rec: dict = {"id": sentence.id, "tokens": [int(t) for t in sentence.tokens]}
    if sentence.labels:
        rec["labels"] = {g: sorted(sentence.labels[g]) for g in sorted(sentence.labels)}
    return json.dumps(rec, separators=(",", ":"), ensure_ascii=False)


def write_jsonl(corpus: Corpus | Iterable[TokenSentence], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for s in corpus:
            fh.write(sentence_to_json(s))
            fh.write("\n")


def write_binary(corpus: Corpus, path: str | Path) -> None:
    """Length-prefixed little-endian format.  Labels are not stored."""
    with open(path, "wb") as fh:
        fh.write(BINARY_MAGIC)
        fh.write(_U32.pack(corpus.vocab_size or 0))
        for s in corpus:
            sid = s.id.encode("utf-8")
            fh.write(_U32.pack(len(sid)))
            fh.write(sid)
            fh.write(_U32.pack(len(s)))
            fh.write(s.tokens.astype("<u4").tobytes())


def from_token_lists(token_lists: Iterable[Sequence[int]], name: str = "corpus", vocab_size: int | None = None) -> Corpus:
    """Convenience constructor: ids are the zero-padded list index."""
    sentences = [TokenSentence(f"{i:08d}", toks) for i, toks in enumerate(token_lists)]
    return Corpus(name, sentences, vocab_size)
