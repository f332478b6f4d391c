import numpy as np

from .base_utils import GraphPair, zero_diagonal


def pca_graph(N: int) -> GraphPair:
    """S_ij = -1/N fuori diagonale, vincolo M = K."""
    S = zero_diagonal(np.full((N, N), -1.0 / N))
    return GraphPair(S=S, B=np.eye(N), uses_kbk=False, meta={"recipe": "pca"})
