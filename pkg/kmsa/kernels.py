# ======================================
# 🌀 KERNELS — Matrici di kernel per vista
# ======================================

import logging
from dataclasses import replace

import numpy as np
from scipy.spatial.distance import cdist, pdist

from kmsa.core import KernelSpec, NumericError

logger = logging.getLogger(__name__)


def median_heuristic_bandwidth(X: np.ndarray) -> float:
    """Mediana delle distanze euclidee tra coppie di colonne (1 se tutte nulle)."""
    X = np.asarray(X, dtype=np.float64)
    dists = pdist(X.T, metric="euclidean")
    if dists.size == 0:
        return 1.0
    med = float(np.median(dists))
    return med if med > 0 else 1.0


def resolve_kernel(X: np.ndarray, spec: KernelSpec) -> KernelSpec:
    """Fissa la bandwidth mediana sui dati di training, così transform usa la stessa."""
    if spec.uses_median:
        sigma = median_heuristic_bandwidth(X)
        logger.debug("[KERNEL] bandwidth mediana = %.6g", sigma)
        return replace(spec, bandwidth=sigma)
    return spec


def cross_kernel(X: np.ndarray, Z: np.ndarray, spec: KernelSpec) -> np.ndarray:
    """k(x_i, z_q) per ogni colonna di X (righe) e di Z (colonne)."""
    X = np.asarray(X, dtype=np.float64)
    Z = np.asarray(Z, dtype=np.float64)
    spec = resolve_kernel(X, spec)

    if spec.kind == "gaussian":
        sigma = float(spec.bandwidth)
        sq = cdist(X.T, Z.T, metric="sqeuclidean")
        K = np.exp(-sq / (2.0 * sigma * sigma))
    elif spec.kind == "linear":
        K = X.T @ Z
    elif spec.kind == "polynomial":
        with np.errstate(over="ignore", invalid="ignore"):
            K = (X.T @ Z + spec.offset) ** spec.degree
    else:
        raise NumericError(f"unknown kernel kind {spec.kind!r}")

    if not np.all(np.isfinite(K)):
        bad = np.argwhere(~np.isfinite(K))[0]
        raise NumericError(f"non-finite kernel entry at ({bad[0]}, {bad[1]}) for {spec.kind} kernel")
    return K


def center_cross(K_cross: np.ndarray, K_train: np.ndarray) -> np.ndarray:
    """
    Centra un kernel incrociato rispetto alla media di training nello spazio delle feature.
    Con K_cross = K_train restituisce H K H.
    """
    row_mean = K_train.mean(axis=1)[:, None]
    col_mean = K_cross.mean(axis=0)[None, :]
    return K_cross - row_mean - col_mean + K_train.mean()


def build_kernel(X: np.ndarray, spec: KernelSpec, center: bool = False) -> np.ndarray:
    """Matrice N x N simmetrica; se center, H K H con H = I - 11^T/N."""
    K = cross_kernel(X, X, spec)
    K = 0.5 * (K + K.T)
    if center:
        K = center_cross(K, K)
        K = 0.5 * (K + K.T)
    return K
