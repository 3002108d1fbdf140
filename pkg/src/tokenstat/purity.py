"""Token / part-label co-occurrence metrics: part purity, token purity, PNMI.

Rows of a :class:`CoocMatrix` are part labels y, columns are tokens z.  All
probabilities are the empirical ones of the normalized matrix.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .corpus import GRANULARITIES, TokenSentence


@dataclass
class CoocMatrix:
    counts: np.ndarray
    label_ids: np.ndarray
    token_ids: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        if self.counts.ndim != 2:
            raise ValueError("co-occurrence matrix must be 2-D")
        if np.any(self.counts < 0):
            raise ValueError("counts must be non-negative")
        self.label_ids = np.asarray(self.label_ids)
        self.token_ids = np.asarray(self.token_ids)

    @classmethod
    def from_array(cls, counts) -> "CoocMatrix":
        counts = np.asarray(counts, dtype=float)
        return cls(counts, np.arange(counts.shape[0]), np.arange(counts.shape[1]))

    @property
    def total(self) -> float:
        return float(self.counts.sum())

    @property
    def label_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=1)

    @property
    def token_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=0)

    def joint(self) -> np.ndarray:
        if self.total <= 0:
            raise ValueError("empty co-occurrence matrix")
        return self.counts / self.total

    def merge(self, other: "CoocMatrix") -> "CoocMatrix":
        labels = np.union1d(self.label_ids, other.label_ids)
        tokens = np.union1d(self.token_ids, other.token_ids)
        out = np.zeros((labels.size, tokens.size))
        for m in (self, other):
            r = np.searchsorted(labels, m.label_ids)
            c = np.searchsorted(tokens, m.token_ids)
            out[np.ix_(r, c)] += m.counts
        return CoocMatrix(out, labels, tokens)


def build_part_cooc(sentences: Iterable[TokenSentence], granularity: str = "part") -> CoocMatrix:
    """Every (label present in the image, token occurrence) pair adds one."""
    if granularity not in GRANULARITIES:
        raise ValueError(f"unknown granularity {granularity!r}")
    label_rows, token_cols, weights = [], [], []
    for s in sentences:
        if granularity not in s.labels:
            raise ValueError(f"sentence {s.id!r} has no {granularity!r} labels")
        labels = sorted(s.labels[granularity])
        if not labels:
            continue
        toks, mult = np.unique(s.tokens, return_counts=True)
        for y in labels:
            label_rows.append(np.full(toks.size, y, dtype=np.int64))
            token_cols.append(toks)
            weights.append(mult)
    if not label_rows:
        return CoocMatrix(np.zeros((0, 0)), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    ys = np.concatenate(label_rows)
    zs = np.concatenate(token_cols)
    w = np.concatenate(weights)
    label_ids, r = np.unique(ys, return_inverse=True)
    token_ids, c = np.unique(zs, return_inverse=True)
    counts = np.zeros((label_ids.size, token_ids.size))
    np.add.at(counts, (r.reshape(-1), c.reshape(-1)), w)
    return CoocMatrix(counts, label_ids, token_ids)


def part_purity(m: CoocMatrix) -> float:
    """E_z[p(y*(z) | z)] = sum_z max_y p(y, z)."""
    # summing counts before the single division keeps integer inputs exact
    return float(m.counts.max(axis=0).sum() / _total(m))


def token_purity(m: CoocMatrix) -> float:
    """E_y[p(z*(y) | y)] = sum_y max_z p(y, z)."""
    return float(m.counts.max(axis=1).sum() / _total(m))


def _total(m: CoocMatrix) -> float:
    if m.total <= 0:
        raise ValueError("empty co-occurrence matrix")
    return m.total


def _entropy(p: np.ndarray, axis=None) -> np.ndarray:
    """-sum p log p (nats) over ``axis``, with 0 log 0 = 0."""
    out = np.zeros_like(p)
    nz = p > 0
    out[nz] = p[nz] * np.log(p[nz])
    return -out.sum(axis=axis)


def pnmi(m: CoocMatrix) -> float:
    """1 - H(y|z) / H(y); raises if the labels carry no entropy.

    H(y|z) is accumulated from the conditionals p(y|z), so a deterministic
    mapping gives exactly 0 and PNMI exactly 1.
    """
    total = _total(m)
    h_y = float(_entropy(m.label_marginal / total))
    if h_y <= 0:
        raise ValueError("PNMI undefined: a single part label has zero entropy")
    nz = m.token_marginal
    used = nz > 0
    cond = m.counts[:, used] / nz[used]
    h_y_given_z = float(np.dot(nz[used] / total, _entropy(cond, axis=0)))
    value = 1.0 - h_y_given_z / h_y
    return float(min(max(value, 0.0), 1.0))


def purity_report(m: CoocMatrix) -> dict:
    pp, vtp = part_purity(m), token_purity(m)
    out = {"part_purity": pp, "token_purity": vtp, "part_purity_pct": 100 * pp,
           "token_purity_pct": 100 * vtp, "num_labels": int(m.counts.shape[0]),
           "num_tokens": int(m.counts.shape[1]), "total": m.total}
    try:
        v = pnmi(m)
        out.update(pnmi=v, pnmi_pct=100 * v)
    except ValueError as exc:
        out.update(pnmi=None, pnmi_pct=None, pnmi_error=str(exc))
    return out
