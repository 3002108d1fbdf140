"""Discrete power-law and lognormal fits to frequency data.

The power law is fit by maximum likelihood with the lower cutoff ``xmin``
selected by minimizing the Kolmogorov-Smirnov distance, in the style of
Clauset, Shalizi & Newman (2009).  The lognormal is the usual MLE on log
counts, with its likelihood evaluated on the discretized (binned at +-0.5)
density so the two mean log-likelihoods are comparable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np
from scipy import optimize, special

MIN_TAIL = 10
ALPHA_BOUNDS = (1.0 + 1e-6, 50.0)


@dataclass
class PowerLawFit:
    """Discrete power law p(x) = x^-alpha / zeta(alpha, xmin) for x >= xmin.

    ``sigma`` is the standard error of ``alpha``, (alpha - 1) / sqrt(n_tail).
    """

    alpha: float
    sigma: float
    xmin: int
    mean_loglik: float
    n_tail: int
    ks_distance: float

    def to_dict(self) -> dict:
        return {
            "alpha": self.alpha,
            "sigma": self.sigma,
            "xmin": self.xmin,
            "mean_loglik": self.mean_loglik,
            "n_tail": self.n_tail,
            "ks_distance": self.ks_distance,
        }


class LognormalFit(NamedTuple):
    mu: float
    sigma: float
    mean_loglik: float

    @property
    def degenerate(self) -> bool:
        return self.sigma == 0.0


def _as_counts(freqs) -> np.ndarray:
    x = np.asarray(freqs, dtype=np.int64).reshape(-1)
    if x.size == 0:
        raise ValueError("empty input")
    if x.min() < 1:
        raise ValueError("frequencies must be >= 1")
    return x


def power_law_loglik(alpha: float, xmin: int, n: int, sum_log: float) -> float:
    return -alpha * sum_log - n * math.log(special.zeta(alpha, xmin))


def _mle_alpha(xmin: int, n: int, sum_log: float) -> float:
    res = optimize.minimize_scalar(
        lambda a: -power_law_loglik(a, xmin, n, sum_log),
        bounds=ALPHA_BOUNDS,
        method="bounded",
        options={"xatol": 1e-9},
    )
    return float(res.x)


def _ks(values: np.ndarray, mult: np.ndarray, alpha: float, xmin: int) -> float:
    """KS distance between the empirical and fitted CDF over the tail."""
    emp = np.cumsum(mult) / mult.sum()
    fit = 1.0 - special.zeta(alpha, values + 1.0) / special.zeta(alpha, xmin)
    return float(np.max(np.abs(emp - fit)))


def fit_power_law(freqs: Sequence[int], xmin: int | None = None, max_candidates: int | None = None) -> PowerLawFit:
    """Fit a discrete power law.

    With ``xmin=None`` every distinct value leaving at least ``MIN_TAIL``
    observations in the tail is tried, and the one with the smallest KS
    distance wins.  ``max_candidates`` limits the scan to the smallest values.
    """
    x = _as_counts(freqs)
    values, mult = np.unique(x, return_counts=True)
    if values.size < 2:
        raise ValueError("degenerate input: a single distinct value")
    # tail statistics for "x >= values[i]" via reverse cumulative sums
    tail_n = np.cumsum(mult[::-1])[::-1]
    tail_log = np.cumsum((mult * np.log(values))[::-1])[::-1]

    if xmin is not None:
        idx = np.searchsorted(values, xmin)
        if idx >= values.size or tail_n[idx] < MIN_TAIL:
            raise ValueError(f"fewer than {MIN_TAIL} observations >= xmin={xmin}")
        candidates = [int(idx)]
    else:
        # the largest value alone cannot identify alpha
        candidates = [i for i in range(values.size - 1) if tail_n[i] >= MIN_TAIL]
        if max_candidates is not None:
            candidates = candidates[:max_candidates]
        if not candidates:
            raise ValueError(f"fewer than {MIN_TAIL} observations above every candidate xmin")

    best = None
    for i in candidates:
        xm = int(values[i])
        n = int(tail_n[i])
        alpha = _mle_alpha(xm, n, float(tail_log[i]))
        d = _ks(values[i:].astype(float), mult[i:], alpha, xm)
        if best is None or d < best[0]:
            best = (d, i, alpha)

    d, i, alpha = best
    xm, n = int(values[i]), int(tail_n[i])
    ll = power_law_loglik(alpha, xm, n, float(tail_log[i]))
    return PowerLawFit(
        alpha=alpha,
        sigma=(alpha - 1.0) / math.sqrt(n),
        xmin=xm,
        mean_loglik=ll / n,
        n_tail=n,
        ks_distance=d,
    )


def power_law_logpmf(x, alpha: float, xmin: int) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    return -alpha * np.log(x) - math.log(special.zeta(alpha, xmin))


def _log_diff_ndtr(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """log(Phi(b) - Phi(a)) for a < b, stable in both tails."""
    out = np.empty(np.broadcast(a, b).shape)
    a, b = np.broadcast_arrays(a, b)
    upper = a > 0
    # right tail: Phi(b) - Phi(a) = Q(a) - Q(b), Q(t) = Phi(-t)
    la, lb = special.log_ndtr(-a[upper]), special.log_ndtr(-b[upper])
    out[upper] = la + np.log1p(-np.exp(lb - la))
    la, lb = special.log_ndtr(a[~upper]), special.log_ndtr(b[~upper])
    out[~upper] = lb + np.log1p(-np.exp(la - lb))
    return out


def lognormal_logpmf(x, mu: float, sigma: float, xmin: int = 1) -> np.ndarray:
    """Discretized lognormal: mass of [x - 0.5, x + 0.5), renormalized to x >= xmin."""
    x = np.asarray(x, dtype=float)
    lo = (np.log(x - 0.5) - mu) / sigma
    hi = (np.log(x + 0.5) - mu) / sigma
    norm = special.log_ndtr(-(math.log(xmin - 0.5) - mu) / sigma)
    return _log_diff_ndtr(lo, hi) - norm


def fit_lognormal(freqs: Sequence[int], xmin: int = 1) -> LognormalFit:
    """Lognormal MLE on log counts of the observations >= ``xmin``.

    A single repeated value gives ``sigma == 0`` (``.degenerate``) and a
    mean log-likelihood of 0, the limit of a point mass.
    """
    x = _as_counts(freqs)
    x = x[x >= xmin]
    if x.size == 0:
        raise ValueError(f"no observations >= xmin={xmin}")
    logs = np.log(x.astype(float))
    mu = float(logs.mean())
    # a constant sample can leave a rounding-level std; treat it as exactly 0
    sigma = float(logs.std()) if np.ptp(x) > 0 else 0.0
    if sigma == 0.0:
        return LognormalFit(mu, 0.0, 0.0)
    ll = lognormal_logpmf(x, mu, sigma, xmin)
    return LognormalFit(mu, sigma, float(ll.mean()))


@dataclass
class LikelihoodRatio:
    """Sign of ``R`` favours the power law (> 0) or the lognormal (< 0)."""

    R: float
    p: float
    xmin: int


def compare_power_law_lognormal(freqs: Sequence[int], xmin: int = 1) -> LikelihoodRatio:
    """Vuong log-likelihood ratio test on the observations >= ``xmin``."""
    x = _as_counts(freqs)
    x = x[x >= xmin]
    pl = fit_power_law(x, xmin=xmin)
    ln = fit_lognormal(x, xmin=xmin)
    if ln.degenerate:
        raise ValueError("degenerate input for the lognormal")
    diff = power_law_logpmf(x, pl.alpha, xmin) - lognormal_logpmf(x, ln.mu, ln.sigma, xmin)
    R = float(diff.sum())
    sd = float(diff.std())
    p = float(special.erfc(abs(R) / (math.sqrt(2 * diff.size) * sd))) if sd > 0 else 0.0
    return LikelihoodRatio(R, p, xmin)
