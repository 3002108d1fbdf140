"""Deterministic synthetic corpora used as fixtures and recovery oracles."""

from __future__ import annotations

import numpy as np
from scipy import special

from .corpus import Corpus, TokenSentence

_TABLE_SIZE = 1 << 16


def sample_discrete_power_law(alpha: float, size: int, rng: np.random.Generator, xmin: int = 1) -> np.ndarray:
    """Exact inverse-CDF draws from p(x) = x^-alpha / zeta(alpha, xmin), x >= xmin.

    The survival function P(X >= x) = zeta(alpha, x) / zeta(alpha, xmin) is
    tabulated for the bulk; the rare draws beyond the table are resolved by
    integer bisection.
    """
    if alpha <= 1:
        raise ValueError("alpha must exceed 1")
    z0 = special.zeta(alpha, xmin)
    xs = np.arange(xmin, xmin + _TABLE_SIZE, dtype=float)
    surv = special.zeta(alpha, xs) / z0  # decreasing, surv[0] == 1
    u = rng.random(size)
    # X = largest x with surv(x) >= u
    out = np.searchsorted(-surv, -u, side="right") - 1 + xmin
    out = out.astype(np.int64)
    far = u < surv[-1]
    if far.any():
        uf = u[far]
        lo = np.full(uf.size, float(xmin + _TABLE_SIZE - 1))
        hi = lo * 2
        while True:
            big = special.zeta(alpha, hi) / z0 >= uf
            if not big.any():
                break
            lo = np.where(big, hi, lo)
            hi = np.where(big, hi * 2, hi)
        while np.any(hi - lo > 1):
            mid = np.floor((lo + hi) / 2)
            ok = special.zeta(alpha, mid) / z0 >= uf
            lo = np.where(ok, mid, lo)
            hi = np.where(ok, hi, mid)
        out[far] = lo.astype(np.int64)
    return out


def yule_process(num_tokens: int, alpha: float, rng: np.random.Generator) -> np.ndarray:
    """Simon's preferential-attachment process.

    Each step introduces a fresh token with probability p = 1 - 1/alpha;
    otherwise a uniformly chosen earlier occurrence is copied, so an existing
    token is reused with probability proportional to its count.  The limiting
    frequency distribution is Yule-Simon with shape ``alpha`` (needs alpha > 1).
    """
    if alpha <= 1:
        raise ValueError("the Simon process reaches shape alpha > 1 only")
    p_new = 1.0 - 1.0 / alpha
    stream = np.empty(num_tokens, dtype=np.int64)
    new = rng.random(num_tokens) < p_new
    new[0] = True
    picks = rng.random(num_tokens)
    next_id = 0
    for t in range(num_tokens):
        if new[t]:
            stream[t] = next_id
            next_id += 1
        else:
            stream[t] = stream[int(picks[t] * t)]
    return stream


def chunk_stream(stream: np.ndarray, sentence_length: int, name: str, vocab_size: int | None = None) -> Corpus:
    sentences = [
        TokenSentence(f"{i:08d}", stream[start : start + sentence_length])
        for i, start in enumerate(range(0, len(stream), sentence_length))
    ]
    return Corpus(name, sentences, vocab_size)


def zipfian_corpus(alpha: float, num_tokens: int, seed: int, sentence_length: int = 32) -> Corpus:
    """Token id ``r - 1`` has probability proportional to r^-alpha."""
    rng = np.random.default_rng(seed)
    ranks = sample_discrete_power_law(alpha, num_tokens, rng)
    return chunk_stream(ranks - 1, sentence_length, f"zipfian-{alpha}")


def uniform_corpus(vocab_size: int, num_tokens: int, seed: int, sentence_length: int = 32) -> Corpus:
    rng = np.random.default_rng(seed)
    stream = rng.integers(0, vocab_size, size=num_tokens)
    return chunk_stream(stream, sentence_length, f"uniform-{vocab_size}", vocab_size)


def yule_corpus(alpha: float, num_tokens: int, seed: int, sentence_length: int = 32) -> Corpus:
    rng = np.random.default_rng(seed)
    return chunk_stream(yule_process(num_tokens, alpha, rng), sentence_length, f"yule-{alpha}")


def grammar_corpus(num_sentences: int, seed: int, grammar=None, min_len: int = 2, max_len: int = 12) -> Corpus:
    """Sentences sampled from a PCFG (a small fixed grammar by default)."""
    from .grammar.pcfg import toy_grammar

    g = grammar if grammar is not None else toy_grammar()
    rng = np.random.default_rng(seed)
    sentences = []
    while len(sentences) < num_sentences:
        toks = g.sample(rng, max_len=max_len)
        if toks is None or len(toks) < min_len:
            continue
        sentences.append(TokenSentence(f"{len(sentences):08d}", toks))
    return Corpus("grammar", sentences, g.num_terminals)


SYNTH_KINDS = ("zipfian", "uniform", "yule", "grammar")


def synth_corpus(kind: str, seed: int, **params) -> Corpus:
    if kind == "zipfian":
        return zipfian_corpus(params.get("alpha", 2.0), params.get("num_tokens", 100_000), seed,
                              params.get("sentence_length", 32))
    if kind == "uniform":
        return uniform_corpus(params.get("vocab_size", 8192), params.get("num_tokens", 100_000), seed,
                              params.get("sentence_length", 32))
    if kind == "yule":
        return yule_corpus(params.get("alpha", 1.5), params.get("num_tokens", 100_000), seed,
                           params.get("sentence_length", 32))
    if kind == "grammar":
        return grammar_corpus(params.get("num_sentences", 500), seed,
                              max_len=params.get("max_len", 12))
    raise ValueError(f"unknown synthetic corpus kind {kind!r}")
