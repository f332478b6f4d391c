# ======================================
# 🗄️ MODEL MANAGER — Persistenza di modelli e report
# ======================================

import json
import logging
import os
from dataclasses import asdict

import numpy as np

from kmsa.core import (
    FormatError,
    IoError,
    KernelSpec,
    KmsaError,
    KmsaModel,
    VersionError,
    ViewState,
    config_from_dict,
    config_to_dict,
)
from kmsa.data_manager import ensure_dir, read_matrix, write_matrix

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
MANIFEST_FILE = "manifest.json"
MATRICES = ("U", "Y", "K", "P", "M")


def _matrix_path(path: str, name: str, v: int) -> str:
    return os.path.join(path, f"{name}_{v + 1}.csv")


def save_model(model: KmsaModel, path: str) -> None:
    """
    Directory con manifest.json (versione, config, alpha, traccia, kernel risolti)
    e una matrice CSV per ogni U, Y, K, P, M di ogni vista.
    """
    try:
        ensure_dir(path)
        manifest = {
            "format_version": FORMAT_VERSION,
            "config": config_to_dict(model.config),
            "alpha": [float(a) for a in model.alpha],
            "objective_trace": [float(g) for g in model.objective_trace],
            "kernels": [asdict(k) for k in model.kernels],
            "view_names": list(model.view_names),
            "divergence": None if model.divergence is None else np.asarray(model.divergence).tolist(),
            "warnings": list(model.warnings),
            "n_samples": int(model.states[0].K.shape[0]),
            "d": int(model.config.d),
        }
        with open(os.path.join(path, MANIFEST_FILE), "w", encoding="utf-8") as f:
            json.dump(manifest, f, indent=2, sort_keys=True)

        for v, (state, Y) in enumerate(zip(model.states, model.embeddings)):
            write_matrix(_matrix_path(path, "U", v), state.U)
            write_matrix(_matrix_path(path, "Y", v), Y)
            write_matrix(_matrix_path(path, "K", v), state.K)
            write_matrix(_matrix_path(path, "P", v), state.P)
            write_matrix(_matrix_path(path, "M", v), state.M)
    except OSError as exc:
        raise IoError(f"cannot write model to {path}: {exc}") from exc
    logger.info("[SAVE] modello salvato in %s (%d viste)", path, model.n_views)


def load_model(path: str) -> KmsaModel:
    manifest_path = os.path.join(path, MANIFEST_FILE)
    if not os.path.exists(manifest_path):
        raise IoError(f"model manifest not found: {manifest_path}")
    try:
        with open(manifest_path, "r", encoding="utf-8") as f:
            manifest = json.load(f)
    except json.JSONDecodeError as exc:
        raise FormatError(f"{manifest_path}: invalid JSON ({exc})") from exc
    except OSError as exc:
        raise IoError(f"cannot read {manifest_path}: {exc}") from exc

    version = manifest.get("format_version")
    if version != FORMAT_VERSION:
        raise VersionError(f"model format version {version!r} is not supported (expected {FORMAT_VERSION})")

    try:
        config = config_from_dict(manifest["config"])
        alpha = np.asarray(manifest["alpha"], dtype=np.float64)
        kernels = tuple(KernelSpec(**k) for k in manifest["kernels"])
    except (KeyError, TypeError, KmsaError) as exc:
        raise FormatError(f"{manifest_path}: malformed manifest ({exc})") from exc

    N, d = manifest.get("n_samples"), manifest.get("d")
    states, embeddings = [], []
    for v in range(alpha.size):
        mats = {name: read_matrix(_matrix_path(path, name, v)) for name in MATRICES}
        if mats["U"].shape != (N, d) or mats["K"].shape != (N, N):
            raise FormatError(f"view {v + 1}: matrix shapes do not match the manifest (N={N}, d={d})")
        states.append(ViewState(K=mats["K"], P=mats["P"], M=mats["M"], U=mats["U"]))
        embeddings.append(mats["Y"])

    divergence = manifest.get("divergence")
    return KmsaModel(
        states=tuple(states),
        alpha=alpha,
        objective_trace=tuple(manifest["objective_trace"]),
        embeddings=tuple(embeddings),
        config=config,
        kernels=kernels,
        view_names=tuple(manifest.get("view_names", ())),
        divergence=None if divergence is None else np.asarray(divergence, dtype=np.float64),
        warnings=tuple(manifest.get("warnings", ())),
    )


def save_report(report: dict, path: str) -> None:
    """Report JSON con chiavi ordinate."""
    try:
        ensure_dir(os.path.dirname(path) or ".")
        with open(path, "w", encoding="utf-8") as f:
            json.dump(report, f, indent=2, sort_keys=True)
    except OSError as exc:
        raise IoError(f"cannot write report {path}: {exc}") from exc
    logger.info("[SAVE] report scritto in %s", path)
