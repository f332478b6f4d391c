import logging
from dataclasses import dataclass, field

import numpy as np
from scipy import linalg

from kmsa.core import NumericError

logger = logging.getLogger(__name__)


# ======================
# 📐 Coppia (S, B)
# ======================
@dataclass(frozen=True, eq=False)
class GraphPair:
    """
    S: similarità N x N con diagonale nulla.
    B: matrice di vincolo (identità, gradi o centratura).
    uses_kbk: True -> M = K B K, False -> M = K.
    meta: informazioni di costruzione (es. warning del lasso).
    """
    S: np.ndarray
    B: np.ndarray
    uses_kbk: bool
    meta: dict = field(default_factory=dict)


def zero_diagonal(S: np.ndarray) -> np.ndarray:
    S = np.array(S, dtype=np.float64, copy=True)
    np.fill_diagonal(S, 0.0)
    return S


# ======================
# 🧮 Laplaciana e vincolo
# ======================
def laplacian(S: np.ndarray) -> np.ndarray:
    """P = E - S con E_ii = somma fuori diagonale della riga i."""
    S = np.asarray(S, dtype=np.float64)
    off = S - np.diag(np.diag(S))
    return np.diag(off.sum(axis=1)) - off


def constraint_matrix(K: np.ndarray, pair: GraphPair, ridge: float) -> np.ndarray:
    """
    M = K B K (uses_kbk) oppure K, più ridge * trace(M)/N * I.
    Verifica la definitezza positiva con Cholesky.
    """
    K = np.asarray(K, dtype=np.float64)
    N = K.shape[0]
    M = K @ pair.B @ K if pair.uses_kbk else K.copy()
    M = 0.5 * (M + M.T)
    shift = ridge * np.trace(M) / N
    if shift:
        M = M + shift * np.eye(N)
    try:
        linalg.cholesky(M, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError(
            f"constraint matrix is not positive definite (ridge={ridge:g}); "
            "the kernel is degenerate, try a larger ridge"
        ) from exc
    return M
