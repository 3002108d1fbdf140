"""Leading-digit (Benford) analysis of n-gram counts."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .ngrams import NGramTable

DIGITS = np.arange(1, 10)


def benford_expected() -> np.ndarray:
    """P(d) = log10(1 + 1/d) for d = 1..9."""
    return np.log10(1.0 + 1.0 / DIGITS)


@dataclass
class BenfordReport:
    observed: np.ndarray
    expected: np.ndarray
    digit_counts: np.ndarray
    tv_distance: float
    chi2: float

    def to_dict(self) -> dict:
        return {
            "digits": DIGITS.tolist(),
            "observed": self.observed.tolist(),
            "expected": self.expected.tolist(),
            "digit_counts": self.digit_counts.tolist(),
            "tv_distance": self.tv_distance,
            "chi2": self.chi2,
        }


def leading_digits(counts) -> np.ndarray:
    """Decimal leading digit of each positive integer.

    int64 arrays are handled arithmetically; anything else (Python big
    integers, say) goes through the decimal string.
    """
    if isinstance(counts, np.ndarray) and counts.dtype.kind in "iu":
        c = counts.astype(np.int64)
        if c.size and c.min() < 1:
            raise ValueError("counts must be positive")
        p = np.power(10, np.floor(np.log10(c)).astype(np.int64))
        # float log10 can be off by one near powers of ten
        p = np.where(p > c, p // 10, p)
        p = np.where(p <= c // 10, p * 10, p)   # avoids overflow of p * 10 near 1e18
        return c // p
    out = []
    for v in counts:
        v = int(v)
        if v < 1:
            raise ValueError("counts must be positive")
        out.append(int(str(v)[0]))
    return np.array(out, dtype=np.int64)


def benford_digits(table: NGramTable | Iterable[int]) -> BenfordReport:
    """Compare the leading digits of the counts with Benford's law."""
    counts = table.counts_array if isinstance(table, NGramTable) else list(table)
    d = leading_digits(counts)
    if d.size == 0:
        raise ValueError("empty table")
    digit_counts = np.bincount(d, minlength=10)[1:]
    observed = digit_counts / digit_counts.sum()
    expected = benford_expected()
    tv = 0.5 * float(np.abs(observed - expected).sum())
    chi2 = float(d.size * np.sum((observed - expected) ** 2 / expected))
    return BenfordReport(observed, expected, digit_counts, tv, chi2)
