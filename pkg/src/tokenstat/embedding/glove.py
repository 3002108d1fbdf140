"""GloVe: weighted least-squares factorization of log co-occurrence counts."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import sparse

logger = logging.getLogger(__name__)


class GloveDivergence(FloatingPointError):
    pass


@dataclass
class EmbeddingMatrix:
    """Main vectors ``w``, context vectors ``wc`` and their biases."""

    w: np.ndarray
    wc: np.ndarray
    b: np.ndarray
    bc: np.ndarray
    losses: list[float] = field(default_factory=list)

    def __post_init__(self):
        v, d = self.w.shape
        if self.wc.shape != (v, d) or self.b.shape != (v,) or self.bc.shape != (v,):
            raise ValueError("inconsistent embedding dimensions")

    @property
    def vocab_size(self) -> int:
        return self.w.shape[0]

    @property
    def dim(self) -> int:
        return self.w.shape[1]

    def vectors(self) -> np.ndarray:
        """w + wc, the usual exported representation."""
        return self.w + self.wc

    def flat(self) -> np.ndarray:
        return np.concatenate([self.w.ravel(), self.wc.ravel(), self.b, self.bc])

    @classmethod
    def from_flat(cls, theta: np.ndarray, v: int, d: int) -> "EmbeddingMatrix":
        n = v * d
        return cls(theta[:n].reshape(v, d), theta[n : 2 * n].reshape(v, d),
                   theta[2 * n : 2 * n + v], theta[2 * n + v :])

    @classmethod
    def random(cls, v: int, d: int, seed: int) -> "EmbeddingMatrix":
        rng = np.random.default_rng(seed)
        u = lambda *shape: (rng.random(shape) - 0.5) / d
        return cls(u(v, d), u(v, d), u(v), u(v))


def weighting(x: np.ndarray, xmax: float = 100.0, a: float = 0.75) -> np.ndarray:
    """f(x) = min(1, (x / xmax)^a)."""
    return np.minimum(1.0, (x / xmax) ** a)


def glove_loss_grad(params: EmbeddingMatrix, X: sparse.spmatrix, xmax: float = 100.0, a: float = 0.75):
    """J = sum over X_ij > 0 of f(X_ij) (w_i . wc_j + b_i + bc_j - log X_ij)^2 and its gradients.

    Returns ``(loss, grads)`` with ``grads`` an :class:`EmbeddingMatrix` of
    partial derivatives.
    """
    X = sparse.csr_matrix(X)
    X.eliminate_zeros()
    coo = X.tocoo()
    i, j, x = coo.row, coo.col, coo.data
    f = weighting(x, xmax, a)
    r = np.einsum("nd,nd->n", params.w[i], params.wc[j]) + params.b[i] + params.bc[j] - np.log(x)
    loss = float(np.sum(f * r * r))
    g = sparse.csr_matrix((2.0 * f * r, (i, j)), shape=X.shape)
    grads = EmbeddingMatrix(
        w=np.asarray(g @ params.wc),
        wc=np.asarray(g.T @ params.w),
        b=np.asarray(g.sum(axis=1)).ravel(),
        bc=np.asarray(g.sum(axis=0)).ravel(),
    )
    return loss, grads


def glove_train(
    X: sparse.spmatrix,
    dim: int = 100,
    epochs: int = 50,
    lr: float = 0.05,
    xmax: float = 100.0,
    a: float = 0.75,
    seed: int = 0,
) -> EmbeddingMatrix:
    """Full-batch AdaGrad over the nonzero entries of ``X``.

    Deterministic for a given seed.  ``losses`` holds the objective before
    each epoch followed by the final value.  A non-finite loss raises
    :class:`GloveDivergence`.
    """
    X = sparse.csr_matrix(X)
    X.eliminate_zeros()
    if X.nnz == 0:
        raise ValueError("co-occurrence matrix has no nonzero entries")
    v = X.shape[0]
    params = EmbeddingMatrix.random(v, dim, seed)
    theta = params.flat()
    gradsq = np.zeros_like(theta)
    losses = []
    for epoch in range(epochs + 1):
        loss, grads = glove_loss_grad(EmbeddingMatrix.from_flat(theta, v, dim), X, xmax, a)
        if not np.isfinite(loss):
            raise GloveDivergence(
                f"non-finite loss at epoch {epoch} (lr={lr}, last finite loss "
                f"{losses[-1] if losses else None})"
            )
        losses.append(loss)
        if epoch == epochs:
            break
        gvec = grads.flat()
        gradsq += gvec * gvec
        theta = theta - lr * gvec / (np.sqrt(gradsq) + 1e-12)
        logger.debug("glove epoch %d loss %.6f", epoch, loss)
    out = EmbeddingMatrix.from_flat(theta, v, dim)
    out.losses = losses
    return out


def write_vectors(path: str | Path, ids, vectors: np.ndarray) -> None:
    """Text format, one row per token: ``id v1 v2 ... vd``."""
    with open(path, "w", encoding="utf-8") as fh:
        for tok, row in zip(ids, vectors):
            fh.write(str(tok) + " " + " ".join(repr(float(v)) for v in row) + "\n")


def read_vectors(path: str | Path) -> tuple[list[str], np.ndarray]:
    ids, rows = [], []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh):
            parts = line.split()
            if not parts:
                continue
            try:
                rows.append([float(p) for p in parts[1:]])
            except ValueError:
                raise ValueError(f"{path}:{lineno + 1}: non-numeric vector entry") from None
            ids.append(parts[0])
    if not rows:
        raise ValueError(f"{path}: no vectors")
    dims = {len(r) for r in rows}
    if len(dims) != 1:
        raise ValueError(f"{path}: rows have differing dimensions {sorted(dims)}")
    return ids, np.array(rows)
