"""Windowed, symmetric token co-occurrence counts."""

from __future__ import annotations

from typing import Iterable

import numpy as np
from scipy import sparse

from ..corpus import TokenSentence

WEIGHTINGS = ("uniform", "inverse-distance")


def build_window_cooc(
    sentences: Iterable[TokenSentence],
    window: int = 10,
    weighting: str = "inverse-distance",
    vocab_size: int | None = None,
) -> sparse.csr_matrix:
    """Symmetric V x V matrix of co-occurrence weights within ``window`` positions.

    Each pair at offset d (1 <= d <= window) inside a sentence adds w to both
    X[a, b] and X[b, a], with w = 1 or 1/d.  Pairs never span sentences.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if weighting not in WEIGHTINGS:
        raise ValueError(f"unknown weighting {weighting!r}")
    rows, cols, vals = [], [], []
    max_tok = -1
    for s in sentences:
        t = s.tokens
        max_tok = max(max_tok, int(t.max()))
        for d in range(1, min(window, len(t) - 1) + 1):
            a, b = t[:-d], t[d:]
            w = 1.0 if weighting == "uniform" else 1.0 / d
            rows.append(a)
            cols.append(b)
            vals.append(np.full(a.size, w))
    size = vocab_size if vocab_size is not None else max_tok + 1
    if not rows:
        return sparse.csr_matrix((size, size))
    x = sparse.coo_matrix(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))), shape=(size, size)
    ).tocsr()
    x.sum_duplicates()
    # adding the transpose keeps X exactly symmetric under floating point
    return (x + x.T).tocsr()
