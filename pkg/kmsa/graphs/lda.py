import numpy as np

from kmsa.core import GraphError

from .base_utils import GraphPair, zero_diagonal


def lda_graph(labels) -> GraphPair:
    """
    S_ij = +1/n_{l_i} stessa classe, -1/n_{l_i} altrimenti, poi (S + S^T)/2.
    B = I - 11^T/N, vincolo M = K B K.
    """
    if labels is None:
        raise GraphError("lda recipe requires labels")
    labels = np.asarray(labels).ravel()
    N = labels.shape[0]
    if N == 0:
        raise GraphError("lda recipe requires at least one labelled sample")

    # compattazione degli id in 0..C-1
    classes, compact, counts = np.unique(labels, return_inverse=True, return_counts=True)
    if np.any(counts == 0) or compact.max() >= classes.size:
        raise GraphError(f"label compaction failed for classes {classes.tolist()}")

    same = compact[:, None] == compact[None, :]
    delta = np.where(same, 1.0, -1.0)
    S = delta / counts[compact][:, None]
    S = zero_diagonal(0.5 * (S + S.T))
    B = np.eye(N) - np.full((N, N), 1.0 / N)
    return GraphPair(S=S, B=B, uses_kbk=True, meta={"recipe": "lda", "classes": int(classes.size)})
