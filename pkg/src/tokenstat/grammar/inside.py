"""Inside, outside and Viterbi charts for :class:`Pcfg`.

Charts are log-space arrays indexed ``[batch, start, width, symbol]`` and are
computed for a batch of equal-length sentences at once.  Sums over split
points and child pairs are done in probability space after shifting each
vector by its maximum, which keeps the expensive contraction a matrix product.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .pcfg import Pcfg
from .trees import ParseTree

NEG_INF = -np.inf
_CHUNK_FLOATS = 4_000_000


def _shift_exp(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """exp(x - max) along the last axis; fully -inf rows get shift 0."""
    m = x.max(axis=-1)
    m = np.where(np.isfinite(m), m, 0.0)
    return np.exp(x - m[..., None]), m


def _check_tokens(g: Pcfg, tokens: np.ndarray) -> None:
    if tokens.size and (tokens.min() < 0 or tokens.max() >= g.num_terminals):
        bad = tokens[(tokens < 0) | (tokens >= g.num_terminals)][0]
        raise ValueError(f"out-of-vocabulary token {int(bad)} (grammar has {g.num_terminals} terminals)")


def _split_index(n: int, w: int):
    """Index arrays for all spans of width ``w`` and their split points."""
    starts = np.arange(n - w + 1)[:, None]
    left_w = np.arange(1, w)[None, :]
    return starts, left_w, starts + left_w, w - left_w


def _span_outer(chart: np.ndarray, n: int, w: int):
    """Shifted sum over splits of outer(inside(left), inside(right)).

    Returns (pl, ml, pr, mr, O, M): the shifted children and their shifts,
    and O[b, m] (S x S) such that O * exp(M) = sum_k outer(exp(left_k), exp(right_k)).
    """
    i, a, j, c = _split_index(n, w)
    left = chart[:, i, a]            # (B, m, k, S)
    right = chart[:, j, c]
    pl, ml = _shift_exp(left)
    pr, mr = _shift_exp(right)
    # weights use the raw maxima so that empty children get weight exactly 0
    with np.errstate(invalid="ignore"):
        tot = left.max(axis=-1) + right.max(axis=-1)
    tot = np.where(np.isnan(tot), NEG_INF, tot)
    M = tot.max(axis=-1)
    M = np.where(np.isfinite(M), M, 0.0)
    wk = np.exp(tot - M[..., None])
    O = np.matmul(np.swapaxes(pl * wk[..., None], -1, -2), pr)   # (B, m, S, S)
    return pl, ml, pr, mr, O, M


def _log(x):
    with np.errstate(divide="ignore"):
        return np.log(x)


def inside_chart(g: Pcfg, batch: np.ndarray) -> np.ndarray:
    """Log inside chart for a (B, n) batch of sentences."""
    batch = np.atleast_2d(np.asarray(batch, dtype=np.int64))
    _check_tokens(g, batch)
    B, n = batch.shape
    N, S = g.num_nt, g.num_symbols
    chart = np.full((B, n, n + 1, S), NEG_INF)
    chart[:, np.arange(n), 1, N:] = _log(g.emit.T[batch])   # (B, n, P)
    rules_flat = g.rules.reshape(N, S * S)
    for w in range(2, n + 1):
        _, _, _, _, O, M = _span_outer(chart, n, w)
        vec = O.reshape(B, n - w + 1, S * S) @ rules_flat.T
        chart[:, : n - w + 1, w, :N] = _log(vec) + M[..., None]
    return chart


def _root_logprob(g: Pcfg, chart: np.ndarray) -> np.ndarray:
    n = chart.shape[1]
    x = _log(g.root) + chart[:, 0, n, : g.num_nt]
    p, m = _shift_exp(x)
    return _log(p.sum(axis=-1)) + m


def _chunks(B: int, n: int, S: int):
    size = max(1, _CHUNK_FLOATS // max(1, n * S * S))
    for lo in range(0, B, size):
        yield slice(lo, min(B, lo + size))


def inside_logprob_batch(g: Pcfg, batch: np.ndarray) -> np.ndarray:
    batch = np.atleast_2d(np.asarray(batch, dtype=np.int64))
    out = np.empty(batch.shape[0])
    for sl in _chunks(batch.shape[0], batch.shape[1], g.num_symbols):
        out[sl] = _root_logprob(g, inside_chart(g, batch[sl]))
    return out


def inside_logprob(g: Pcfg, tokens) -> float:
    """log p(x | g).  Sentences shorter than two tokens have probability 0."""
    tokens = np.asarray(getattr(tokens, "tokens", tokens), dtype=np.int64)
    if tokens.size == 0:
        raise ValueError("empty sentence")
    return float(inside_logprob_batch(g, tokens[None, :])[0])


@dataclass
class ExpectedCounts:
    root: np.ndarray
    rules: np.ndarray
    emit: np.ndarray
    loglik: float
    num_sentences: int = 0

    @classmethod
    def zeros(cls, g: Pcfg) -> "ExpectedCounts":
        return cls(np.zeros_like(g.root), np.zeros_like(g.rules), np.zeros_like(g.emit), 0.0)

    def add(self, other: "ExpectedCounts") -> None:
        self.root += other.root
        self.rules += other.rules
        self.emit += other.emit
        self.loglik += other.loglik
        self.num_sentences += other.num_sentences


def expected_counts(g: Pcfg, batch: np.ndarray) -> ExpectedCounts:
    """Inside-outside posterior rule counts summed over a batch of equal-length sentences."""
    batch = np.atleast_2d(np.asarray(batch, dtype=np.int64))
    total = ExpectedCounts.zeros(g)
    for sl in _chunks(batch.shape[0], batch.shape[1], g.num_symbols):
        total.add(_expected_counts_chunk(g, batch[sl]))
    return total


def _expected_counts_chunk(g: Pcfg, batch: np.ndarray) -> ExpectedCounts:
    B, n = batch.shape
    N, S = g.num_nt, g.num_symbols
    chart = inside_chart(g, batch)
    logz = _root_logprob(g, chart)
    if not np.all(np.isfinite(logz)):
        bad = int(np.flatnonzero(~np.isfinite(logz))[0])
        raise ValueError(f"sentence {batch[bad].tolist()} has zero probability under the grammar")
    rules_flat = g.rules.reshape(N, S * S)
    outside = np.full_like(chart, NEG_INF)
    outside[:, 0, n, :N] = _log(g.root)
    acc = np.zeros((N, S * S))
    bidx = np.arange(B)[:, None, None]
    for w in range(n, 1, -1):
        m = n - w + 1
        pl, ml, pr, mr, O, M = _span_outer(chart, n, w)
        u, mu = _shift_exp(outside[:, :m, w, :N])                   # (B, m, N)
        # binary rule counts: sum over spans of outside(A) * O(B, C), scaled
        scale = np.exp(mu + M - logz[:, None])
        scale = np.where(np.isfinite(outside[:, :m, w, :N]).any(-1), scale, 0.0)
        acc += (u * scale[..., None]).reshape(B * m, N).T @ O.reshape(B * m, S * S)
        # push outside mass to the children
        G = (u @ rules_flat).reshape(B, m, S, S)                    # sum_A u_A P(A -> x y)
        to_left = np.matmul(pr, np.swapaxes(G, -1, -2))             # (B, m, k, S)
        to_right = np.matmul(pl, G)
        i, a, j, c = _split_index(n, w)
        left_log = _log(to_left) + (mu[..., None] + mr)[..., None]
        right_log = _log(to_right) + (mu[..., None] + ml)[..., None]
        outside[bidx, i, a] = np.logaddexp(outside[bidx, i, a], left_log)
        outside[bidx, j, c] = np.logaddexp(outside[bidx, j, c], right_log)
    rules = acc.reshape(N, S, S) * g.rules
    post_root = np.exp(_log(g.root) + chart[:, 0, n, :N] - logz[:, None]).sum(axis=0)
    leaf = np.exp(outside[:, np.arange(n), 1, N:] + chart[:, np.arange(n), 1, N:] - logz[:, None, None])
    emit = np.zeros_like(g.emit)
    for t in range(g.num_pt):
        emit[t] += np.bincount(batch.reshape(-1), weights=leaf[:, :, t].reshape(-1), minlength=g.num_terminals)
    return ExpectedCounts(post_root, rules, emit, float(logz.sum()), B)


def viterbi_parse(g: Pcfg, tokens) -> tuple[ParseTree, float]:
    """Best parse by max-product CKY and its log probability.

    Among equally good derivations the lexicographically smallest
    (rule id, split point) is chosen at every span; rule id is the flattened
    (B, C) child pair index.
    """
    x = np.asarray(getattr(tokens, "tokens", tokens), dtype=np.int64)
    _check_tokens(g, x)
    n = x.size
    N, S = g.num_nt, g.num_symbols
    with np.errstate(divide="ignore"):
        lrules = np.log(g.rules.reshape(N, S * S))
        lroot = np.log(g.root)
        lemit = np.log(g.emit)
    best = np.full((n, n + 1, S), NEG_INF)
    back_rule = np.zeros((n, n + 1, N), dtype=np.int64)
    back_split = np.zeros((n, n + 1, S * S), dtype=np.int64)
    best[np.arange(n), 1, N:] = lemit[:, x].T
    for w in range(2, n + 1):
        i, a, j, c = _split_index(n, w)
        left = best[i, a]                                   # (m, k, S)
        right = best[j, c]
        pair = left[..., :, None] + right[..., None, :]     # (m, k, S, S)
        pair = pair.reshape(n - w + 1, w - 1, S * S)
        ksel = np.argmax(pair, axis=1)                      # first max -> smallest split
        q = np.take_along_axis(pair, ksel[:, None, :], axis=1)[:, 0]   # (m, S*S)
        back_split[: n - w + 1, w] = ksel + 1
        step = max(1, _CHUNK_FLOATS // (N * S * S))
        for lo in range(0, n - w + 1, step):
            hi = min(n - w + 1, lo + step)
            scores = q[lo:hi, None, :] + lrules[None]       # (m, N, S*S)
            r = np.argmax(scores, axis=-1)                  # first max -> smallest rule id
            best[lo:hi, w, :N] = np.take_along_axis(scores, r[..., None], axis=-1)[..., 0]
            back_rule[lo:hi, w] = r
    if n == 1:
        raise ValueError("a single token cannot be derived (no unary rules below S)")
    top = lroot + best[0, n, :N]
    a_best = int(np.argmax(top))
    if not np.isfinite(top[a_best]):
        raise ValueError("sentence has zero probability under the grammar")

    def build(i: int, w: int, sym: int) -> ParseTree:
        if w == 1:
            return ParseTree.leaf(sym - N, int(x[i]))
        r = int(back_rule[i, w, sym])
        k = int(back_split[i, w, r])
        b, cc = divmod(r, S)
        return ParseTree.node(sym, build(i, k, b), build(i + k, w - k, cc))

    return build(0, n, a_best), float(top[a_best])
