"""Token innovation: Heaps' law curves and the Yule-Simon distribution."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import optimize, special

from .corpus import Corpus, TokenSentence
from .ngrams import encode_rows

# --- Heaps ------------------------------------------------------------------


@dataclass
class HeapsFit:
    """V(N) = k * N**beta."""

    k: float
    beta: float

    def predict(self, n):
        return self.k * np.asarray(n, dtype=float) ** self.beta


def heaps_curve(corpus: Corpus | Sequence[TokenSentence], n: int = 1, stride: int = 1) -> list[tuple[int, int]]:
    """Distinct n-grams seen after every ``stride`` documents.

    The final document count is always included, so the last point equals
    the number of distinct n-grams in the corpus.
    """
    if stride < 1:
        raise ValueError("stride must be >= 1")
    if n < 1:
        raise ValueError("n must be >= 1")
    sentences = list(corpus)
    num_docs = len(sentences)
    if num_docs == 0:
        return []
    rows, doc_of_row = [], []
    for d, s in enumerate(sentences):
        if len(s) >= n:
            w = sliding_window_view(s.tokens, n)
            rows.append(w)
            doc_of_row.append(np.full(len(w), d, dtype=np.int64))
    new_per_doc = np.zeros(num_docs, dtype=np.int64)
    if rows:
        allrows = np.concatenate(rows)
        docs = np.concatenate(doc_of_row)
        packed = encode_rows(allrows)
        if packed is not None:
            _, first = np.unique(packed, return_index=True)
        else:
            _, first = np.unique(allrows, axis=0, return_index=True)
        new_per_doc = np.bincount(docs[first], minlength=num_docs)
    unique_so_far = np.cumsum(new_per_doc)
    points = list(range(stride, num_docs + 1, stride))
    if not points or points[-1] != num_docs:
        points.append(num_docs)
    return [(p, int(unique_so_far[p - 1])) for p in points]


def fit_heaps(curve: Iterable[tuple[float, float]]) -> HeapsFit:
    """Least squares on log V against log N."""
    pts = np.asarray(list(curve), dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 3:
        raise ValueError("need at least 3 curve points")
    if np.any(pts <= 0):
        raise ValueError("curve points must be positive")
    beta, logk = np.polyfit(np.log(pts[:, 0]), np.log(pts[:, 1]), 1)
    if abs(beta) < 1e-3:
        warnings.warn("vocabulary does not grow: Heaps exponent is ~0", RuntimeWarning, stacklevel=2)
    return HeapsFit(float(math.exp(logk)), float(beta))


# --- Yule-Simon -------------------------------------------------------------

ALPHA_UPPER = 1e4
GRAD_TOL = 1e-6


@dataclass
class YuleSimonFit:
    alpha: float
    nll: float
    converged: bool
    grad: float = float("nan")


def yule_simon_logpmf(alpha: float, m):
    """log(alpha * B(m, alpha + 1)) via log-gamma."""
    m = np.asarray(m, dtype=float)
    return (
        math.log(alpha)
        + special.gammaln(m)
        + special.gammaln(alpha + 1.0)
        - special.gammaln(m + alpha + 1.0)
    )


def yule_simon_pmf(alpha: float, m):
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    m_arr = np.asarray(m)
    if np.any(m_arr < 1) or np.any(m_arr != np.floor(m_arr)):
        raise ValueError("m must be an integer >= 1")
    out = np.exp(yule_simon_logpmf(alpha, m_arr))
    return float(out) if out.ndim == 0 else out


def frequency_histogram(counts: Iterable[int]) -> dict[int, int]:
    """Map each count value m to the number of types occurring m times."""
    values, mult = np.unique(np.asarray(list(counts), dtype=np.int64), return_counts=True)
    return {int(v): int(c) for v, c in zip(values, mult)}


def _nll_and_grad(alpha: float, m: np.ndarray, w: np.ndarray) -> tuple[float, float]:
    nll = -float(np.dot(w, yule_simon_logpmf(alpha, m)))
    dlog = 1.0 / alpha + special.digamma(alpha + 1.0) - special.digamma(m + alpha + 1.0)
    return nll, -float(np.dot(w, dlog))


def fit_yule_simon(freq_histogram: Mapping[int, float], max_iter: int = 500) -> YuleSimonFit:
    """Maximum-likelihood shape of a Yule-Simon law.

    ``freq_histogram`` maps an occurrence count m >= 1 to its multiplicity
    (fractional multiplicities are allowed).  L-BFGS-B starts at alpha = 1
    with alpha bounded in (0, ALPHA_UPPER]; invalid alphas get an infinite
    objective.  The stationary point is then polished by bracketing the root
    of the score, so a converged fit has |dNLL/dalpha| < GRAD_TOL.
    """
    if not freq_histogram:
        raise ValueError("empty histogram")
    m = np.array(sorted(freq_histogram), dtype=float)
    w = np.array([freq_histogram[k] for k in sorted(freq_histogram)], dtype=float)
    if m.min() < 1:
        raise ValueError("counts must be >= 1")

    def objective(x):
        a = float(x[0])
        if not (a > 0 and math.isfinite(a)):
            return math.inf, np.array([0.0])
        f, g = _nll_and_grad(a, m, w)
        return f, np.array([g])

    res = optimize.minimize(
        objective, x0=[1.0], jac=True, method="L-BFGS-B",
        bounds=[(1e-8, ALPHA_UPPER)], options={"maxiter": max_iter, "gtol": 1e-12, "ftol": 1e-15},
    )
    alpha = float(res.x[0])
    nll, grad = _nll_and_grad(alpha, m, w)
    if abs(grad) >= GRAD_TOL:
        alpha = _polish(alpha, m, w)
        nll, grad = _nll_and_grad(alpha, m, w)
    at_bound = alpha >= ALPHA_UPPER * (1 - 1e-9)
    return YuleSimonFit(alpha, nll, bool(abs(grad) < GRAD_TOL and not at_bound), grad)


def _polish(alpha: float, m: np.ndarray, w: np.ndarray) -> float:
    """Root of the score near ``alpha``; NLL is unimodal in alpha for these data."""
    score = lambda a: _nll_and_grad(a, m, w)[1]
    lo, hi = alpha, alpha
    g = score(alpha)
    for _ in range(200):
        if g > 0:
            lo = max(lo / 2, 1e-12)
            if score(lo) < 0:
                break
        else:
            hi = min(hi * 2, ALPHA_UPPER)
            if score(hi) > 0 or hi == ALPHA_UPPER:
                break
    else:
        return alpha
    if g > 0:
        hi = alpha
    else:
        lo = alpha
    if score(lo) * score(hi) > 0:
        return hi if g < 0 else alpha
    return float(optimize.brentq(score, lo, hi, xtol=1e-14, rtol=4 * np.finfo(float).eps, maxiter=500))
