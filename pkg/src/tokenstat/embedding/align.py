"""Comparing embedding spaces: whitening, k-means quantization, Procrustes and Hausdorff."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Mapping

import numpy as np


def whiten(m: np.ndarray, center: bool = False) -> np.ndarray:
    """Divide each column by its population standard deviation.

    The mean is left in place unless ``center`` is true.
    """
    m = np.asarray(m, dtype=float)
    if m.ndim != 2:
        raise ValueError("whiten expects a 2-D matrix")
    sd = m.std(axis=0)
    zero = np.flatnonzero(sd == 0)
    if zero.size:
        raise ValueError(f"zero-variance column(s) {zero.tolist()}")
    out = m - m.mean(axis=0) if center else m
    return out / sd


def _sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    d = (a * a).sum(1)[:, None] + (b * b).sum(1)[None, :] - 2.0 * a @ b.T
    return np.maximum(d, 0.0)


@dataclass
class KMeansResult:
    centers: np.ndarray
    labels: np.ndarray
    inertia: list[float]
    iterations: int


def _kmeans_pp(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    idx = [int(rng.integers(n))]
    d2 = ((x - x[idx[0]]) ** 2).sum(1)
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0:
            # every point already coincides with a center; take unused rows in order
            used = set(idx)
            idx.append(next(i for i in range(n) if i not in used))
        else:
            idx.append(int(rng.choice(n, p=d2 / total)))
        d2 = np.minimum(d2, ((x - x[idx[-1]]) ** 2).sum(1))
    return x[idx].copy()


def kmeans(points: np.ndarray, k: int = 256, seed: int = 0, iters: int = 100) -> KMeansResult:
    """Lloyd iterations from a seeded k-means++ start.

    ``inertia[t]`` is the within-cluster sum of squares after the assignment
    step of iteration t; it never increases.  Empty clusters keep their
    previous center.
    """
    x = np.asarray(points, dtype=float)
    if x.ndim != 2:
        raise ValueError("points must be a 2-D array")
    if x.shape[0] < k:
        raise ValueError(f"need at least k={k} points, got {x.shape[0]}")
    rng = np.random.default_rng(seed)
    centers = _kmeans_pp(x, k, rng)
    labels = np.full(x.shape[0], -1)
    inertia: list[float] = []
    it = 0
    for it in range(1, iters + 1):
        d = _sq_dists(x, centers)
        new = d.argmin(axis=1)
        inertia.append(float(((x - centers[new]) ** 2).sum()))
        if np.array_equal(new, labels):
            break
        labels = new
        counts = np.bincount(labels, minlength=k)
        sums = np.zeros_like(centers)
        np.add.at(sums, labels, x)
        filled = counts > 0
        centers[filled] = sums[filled] / counts[filled, None]
    return KMeansResult(centers, labels, inertia, it)


def procrustes_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Residual sum of squares after optimal translation, scaling and rotation.

    Both sets are centered and scaled to unit Frobenius norm; the rotation is
    restricted to det(R) = +1, so mirror images are not matched.  The result
    lies in [0, 1] and is symmetric in its arguments.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    a = a - a.mean(axis=0)
    b = b - b.mean(axis=0)
    na, nb = np.linalg.norm(a), np.linalg.norm(b)
    if na == 0 or nb == 0:
        raise ValueError("degenerate point set (all points identical)")
    a, b = a / na, b / nb
    u, s, vt = np.linalg.svd(a.T @ b)
    if np.linalg.det(u) * np.linalg.det(vt) < 0:
        s = s.copy()
        s[-1] = -s[-1]
    return float(min(1.0, max(0.0, 1.0 - s.sum() ** 2)))


def directed_hausdorff(a: np.ndarray, b: np.ndarray, block: int = 256) -> float:
    """max over a in A of min over b in B of ||a - b||.

    Rows of A are processed in blocks; a row's running minimum stops being
    refined once it drops below the current maximum, since it can no longer
    change the answer.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    if a.shape[0] == 0 or b.shape[0] == 0:
        raise ValueError("point sets must be non-empty")
    if a.shape[1] != b.shape[1]:
        raise ValueError("point sets have different dimensions")
    best = 0.0
    for lo in range(0, a.shape[0], block):
        rows = a[lo : lo + block]
        mins = np.full(rows.shape[0], np.inf)
        for blo in range(0, b.shape[0], block):
            live = mins > best
            if not live.any():
                break
            diff = rows[live, None, :] - b[None, blo : blo + block, :]
            mins[live] = np.minimum(mins[live], (diff * diff).sum(-1).min(axis=1))
        best = max(best, float(mins.max()))
    return float(np.sqrt(best))


def greedy_match(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pair rows of ``a`` and ``b`` by repeatedly taking the closest unpaired pair.

    Returns ``perm`` with ``b[perm[i]]`` paired to ``a[i]``.  Ties go to the
    smallest (i, j).
    """
    if a.shape != b.shape:
        raise ValueError("greedy matching needs equally many points of equal dimension")
    n = a.shape[0]
    d = _sq_dists(a, b)
    order = np.lexsort((np.tile(np.arange(n), n), np.repeat(np.arange(n), n), d.ravel()))
    perm = np.full(n, -1)
    used_a = np.zeros(n, bool)
    used_b = np.zeros(n, bool)
    left = n
    for flat in order:
        i, j = divmod(int(flat), n)
        if not used_a[i] and not used_b[j]:
            perm[i] = j
            used_a[i] = used_b[j] = True
            left -= 1
            if left == 0:
                break
    return perm


@dataclass
class AlignmentReport:
    procrustes_distance: float
    procrustes_similarity: float
    hausdorff_ab: float
    hausdorff_ba: float
    num_centers: int
    pairing: str = "greedy-nearest-center"

    def to_dict(self) -> dict:
        return asdict(self)


def quantize(space: np.ndarray, k: int = 256, seed: int = 0, iters: int = 100,
             center: bool = False) -> np.ndarray:
    """Whitened k-means centers of one embedding space."""
    return kmeans(whiten(space, center), k, seed, iters).centers


def compare_centers(ca: np.ndarray, cb: np.ndarray) -> AlignmentReport:
    """Procrustes on greedily paired centers plus both directed Hausdorff distances."""
    perm = greedy_match(ca, cb)
    dist = procrustes_distance(ca, cb[perm])
    return AlignmentReport(dist, 1.0 - dist, directed_hausdorff(ca, cb), directed_hausdorff(cb, ca),
                           ca.shape[0])


def align_spaces(a: np.ndarray, b: np.ndarray, k: int = 256, seed: int = 0, iters: int = 100,
                 center: bool = False) -> AlignmentReport:
    """Whiten both spaces, quantize each to ``k`` centers, pair and compare.

    Both spaces must share a dimension.  ``k`` is lowered to the smaller
    point count when needed.
    """
    a, b = np.asarray(a, float), np.asarray(b, float)
    if a.shape[1] != b.shape[1]:
        raise ValueError(f"embedding dimensions differ: {a.shape[1]} vs {b.shape[1]}")
    k = min(k, a.shape[0], b.shape[0])
    return compare_centers(quantize(a, k, seed, iters, center), quantize(b, k, seed, iters, center))


def write_distance_csv(path: str | Path, names: list[str], dist: Mapping[tuple[str, str], float] | np.ndarray,
                       similarity: bool = True) -> None:
    """Square matrix with names as header; similarity = 1 - distance and a zero diagonal."""
    n = len(names)
    if isinstance(dist, np.ndarray):
        mat = np.asarray(dist, float)
    else:
        mat = np.zeros((n, n))
        for (x, y), v in dist.items():
            mat[names.index(x), names.index(y)] = v
    if mat.shape != (n, n):
        raise ValueError("distance matrix shape does not match names")
    out = 1.0 - mat if similarity else mat.copy()
    np.fill_diagonal(out, 0.0)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([""] + list(names))
        for name, row in zip(names, out):
            w.writerow([name] + [repr(float(v)) for v in row])
