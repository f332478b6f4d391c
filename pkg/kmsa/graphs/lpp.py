import logging
from typing import Optional

import numpy as np
from scipy.spatial.distance import pdist, squareform

from .base_utils import GraphPair, zero_diagonal

logger = logging.getLogger(__name__)


def default_heat(X: np.ndarray) -> float:
    """Mediana delle distanze al quadrato (1 se nulla)."""
    sq = pdist(np.asarray(X, dtype=np.float64).T, metric="sqeuclidean")
    med = float(np.median(sq)) if sq.size else 0.0
    return med if med > 0 else 1.0


def knn_mask(sq_dists: np.ndarray, k: int) -> np.ndarray:
    """mask[i, j] = True se j è tra i k vicini di i (sé escluso, parità -> indice minore)."""
    N = sq_dists.shape[0]
    mask = np.zeros((N, N), dtype=bool)
    for i in range(N):
        order = np.argsort(sq_dists[i], kind="stable")
        order = order[order != i][:k]
        mask[i, order] = True
    return mask


def lpp_graph(X: np.ndarray, k: int, t: Optional[float] = None) -> GraphPair:
    """Pesi di calore sul grafo kNN simmetrizzato con OR, B = matrice dei gradi."""
    X = np.asarray(X, dtype=np.float64)
    if t is None:
        t = default_heat(X)
    sq = squareform(pdist(X.T, metric="sqeuclidean"))
    mask = knn_mask(sq, k)
    mask = mask | mask.T
    S = zero_diagonal(np.where(mask, np.exp(-sq / t), 0.0))
    B = np.diag(S.sum(axis=1))
    logger.debug("[GRAPH] lpp: k=%d t=%.6g archi=%d", k, t, int(mask.sum()) // 2)
    return GraphPair(S=S, B=B, uses_kbk=True, meta={"recipe": "lpp", "k": k, "t": float(t)})
