import logging
import warnings

import numpy as np

from kmsa.core import ConvergenceWarning

from .base_utils import GraphPair, zero_diagonal

logger = logging.getLogger(__name__)

LASSO_TOL = 1e-6


def soft_threshold(x, t):
    return np.sign(x) * np.maximum(np.abs(x) - t, 0.0)


def lasso_column(G: np.ndarray, i: int, lam: float, max_iters: int, tol: float = LASSO_TOL):
    """
    min_c 1/2 ||x_i - X c||^2 + lam ||c||_1 con c_i = 0, per discesa coordinata ciclica.
    G = X^T X. Restituisce (c, convergito).
    """
    N = G.shape[0]
    c = np.zeros(N)
    diag = np.diag(G)
    for _ in range(max_iters):
        max_step = 0.0
        for j in range(N):
            if j == i or diag[j] <= 0:
                continue
            # correlazione col residuo parziale (senza la coordinata j)
            rho = G[j, i] - G[j] @ c + diag[j] * c[j]
            new = soft_threshold(rho, lam) / diag[j]
            max_step = max(max_step, abs(new - c[j]))
            c[j] = new
        if max_step < tol:
            return c, True
    return c, False


def sparse_coefficients(X: np.ndarray, lam: float, max_iters: int):
    """Matrice M: colonna i = codifica lasso di x_i sugli altri campioni."""
    X = np.asarray(X, dtype=np.float64)
    G = X.T @ X
    N = G.shape[0]
    M = np.zeros((N, N))
    unconverged = []
    for i in range(N):
        M[:, i], ok = lasso_column(G, i, lam, max_iters)
        if not ok:
            unconverged.append(i)
    return M, unconverged


def spp_graph(X: np.ndarray, lam: float, max_iters: int = 200) -> GraphPair:
    """S = M + M^T + M^T M (diagonale azzerata), B = I, vincolo M = K."""
    M, unconverged = sparse_coefficients(X, lam, max_iters)
    S = zero_diagonal(M + M.T + M.T @ M)
    N = S.shape[0]
    meta = {"recipe": "spp", "lam": float(lam), "coefficients": M, "warnings": []}
    if unconverged:
        msg = (
            f"lasso coordinate descent hit max_iters={max_iters} on "
            f"{len(unconverged)} of {N} columns without reaching {LASSO_TOL:g}"
        )
        meta["warnings"].append(msg)
        meta["unconverged_columns"] = unconverged
        logger.warning("[GRAPH] %s", msg)
        warnings.warn(msg, ConvergenceWarning, stacklevel=2)
    return GraphPair(S=S, B=np.eye(N), uses_kbk=False, meta=meta)
