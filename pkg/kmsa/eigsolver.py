# ======================================
# 🔢 EIGSOLVER — Problema generalizzato simmetrico-definito H u = xi M u
# ======================================

import numpy as np
from scipy import linalg

from kmsa.core import DimensionError, NumericError

RESIDUAL_TOL = 1e-6


def fix_signs(V: np.ndarray) -> np.ndarray:
    """Rende positiva la componente di modulo massimo di ogni colonna (parità -> indice minore)."""
    V = np.array(V, copy=True)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def generalized_eigh(H: np.ndarray, M: np.ndarray, d: int):
    """
    Le d coppie con autovalore più piccolo di H u = xi M u.

    Riduzione di Cholesky: M = L L^T, C = L^-1 H L^-T, eigh(C), u = L^-T z.
    Restituisce (autovalori crescenti, vettori N x d) con V^T M V = I.
    """
    H = np.asarray(H, dtype=np.float64)
    M = np.asarray(M, dtype=np.float64)
    N = H.shape[0]
    if H.shape != (N, N) or M.shape != (N, N):
        raise DimensionError(f"H {H.shape} and M {M.shape} must be square and equal")
    if not 0 <= d <= N:
        raise DimensionError(f"d={d} must lie in [0, {N}]")

    H = 0.5 * (H + H.T)
    M = 0.5 * (M + M.T)
    try:
        L = linalg.cholesky(M, lower=True)
    except linalg.LinAlgError as exc:
        raise NumericError("Cholesky factorization of the constraint matrix failed") from exc

    tmp = linalg.solve_triangular(L, H, lower=True)
    C = linalg.solve_triangular(L, tmp.T, lower=True)
    C = 0.5 * (C + C.T)
    values, Z = linalg.eigh(C)
    values, Z = values[:d], Z[:, :d]
    V = linalg.solve_triangular(L.T, Z, lower=False)
    V = fix_signs(V)

    _check_residuals(H, M, values, V)
    return values, V


def _check_residuals(H, M, values, V):
    if V.size == 0:
        return
    h_norm = np.linalg.norm(H, "fro")
    m_norm = np.linalg.norm(M, "fro")
    R = H @ V - (M @ V) * values
    res = np.linalg.norm(R, axis=0)
    bound = RESIDUAL_TOL * (h_norm + np.abs(values) * m_norm) * np.linalg.norm(V, axis=0)
    bad = np.flatnonzero(res > bound)
    if bad.size:
        i = int(bad[0])
        raise NumericError(
            f"eigenpair {i} backward error {res[i]:.3e} exceeds bound {bound[i]:.3e}"
        )
