"""Token co-occurrence embeddings and cross-space alignment."""

from .align import (
    AlignmentReport,
    KMeansResult,
    align_spaces,
    compare_centers,
    directed_hausdorff,
    greedy_match,
    kmeans,
    procrustes_distance,
    quantize,
    whiten,
    write_distance_csv,
)
from .cooc import WEIGHTINGS, build_window_cooc
from .glove import (
    EmbeddingMatrix,
    GloveDivergence,
    glove_loss_grad,
    glove_train,
    read_vectors,
    weighting,
    write_vectors,
)

__all__ = [
    "AlignmentReport", "EmbeddingMatrix", "GloveDivergence", "KMeansResult", "WEIGHTINGS",
    "align_spaces", "build_window_cooc", "compare_centers", "directed_hausdorff", "glove_loss_grad", "glove_train",
    "greedy_match", "kmeans", "procrustes_distance", "quantize", "read_vectors", "weighting", "whiten",
    "write_distance_csv", "write_vectors",
]
