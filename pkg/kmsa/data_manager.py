# ======================================
# 💾 DATA MANAGER — Dataset multivista su CSV e generatore sintetico
# ======================================

import glob
import logging
import os
import re
from dataclasses import dataclass

import numpy as np
import pandas as pd
from pandas.errors import EmptyDataError, ParserError

from kmsa.core import FormatError, IoError, MultiviewDataset

logger = logging.getLogger(__name__)

VIEW_PATTERN = re.compile(r"^view_(\d+)\.csv$")
LABELS_FILE = "labels.csv"
FLOAT_FORMAT = "%.17g"
NON_FINITE = {"nan", "+nan", "-nan", "inf", "+inf", "-inf", "infinity", "+infinity", "-infinity"}


# ======================
# 📁 Gestione directory
# ======================
def ensure_dir(path: str) -> str:
    """Crea la directory se non esiste"""
    os.makedirs(path, exist_ok=True)
    return path


def view_files(dir_path: str) -> list:
    """File view_<k>.csv ordinati per k crescente."""
    if not os.path.isdir(dir_path):
        raise IoError(f"dataset directory not found: {dir_path}")
    found = []
    for path in glob.glob(os.path.join(dir_path, "view_*.csv")):
        match = VIEW_PATTERN.match(os.path.basename(path))
        if match:
            found.append((int(match.group(1)), path))
    if not found:
        raise IoError(f"no view_<k>.csv files in {dir_path}")
    return [p for _, p in sorted(found)]


# ======================
# 📥 Lettura CSV
# ======================
def _is_number(cell) -> bool:
    try:
        float(str(cell).strip())
        return True
    except ValueError:
        return False


def read_matrix(path: str) -> np.ndarray:
    """
    Legge un CSV (una riga per campione) in una matrice N x D.
    Un'intestazione viene riconosciuta se la prima cella non è numerica.
    """
    try:
        raw = pd.read_csv(path, header=None, dtype=str, skip_blank_lines=True, keep_default_na=False)
    except FileNotFoundError as exc:
        raise IoError(f"cannot open {path}") from exc
    except EmptyDataError as exc:
        raise FormatError(f"{path}: file is empty") from exc
    except ParserError as exc:
        raise FormatError(f"{path}: ragged rows ({exc})") from exc
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc

    if raw.shape[0] and not _is_number(raw.iat[0, 0]):
        raw = raw.iloc[1:].reset_index(drop=True)

    cells = raw.to_numpy()
    values = np.empty(cells.shape, dtype=np.float64)
    for (i, j), cell in np.ndenumerate(cells):
        text = "" if pd.isna(cell) else str(cell).strip()
        if text == "":
            raise FormatError(f"{path}: ragged row {i + 1} (missing cell in column {j + 1})")
        if text.lower() in NON_FINITE:
            raise FormatError(f"{path}: non-finite value {text!r} at row {i + 1}, column {j + 1}")
        try:
            values[i, j] = float(text)
        except ValueError:
            raise FormatError(f"{path}: non-numeric cell {text!r} at row {i + 1}, column {j + 1}") from None
    return values


def read_labels(path: str) -> np.ndarray:
    try:
        raw = pd.read_csv(path, header=None, dtype=str, keep_default_na=False)
    except EmptyDataError as exc:
        raise FormatError(f"{path}: labels file is empty") from exc
    except (ParserError, OSError) as exc:
        raise FormatError(f"{path}: cannot parse labels ({exc})") from exc
    if raw.shape[1] != 1:
        raise FormatError(f"{path}: expected one integer per line, found {raw.shape[1]} columns")
    labels = []
    for i, cell in enumerate(raw.iloc[:, 0]):
        try:
            labels.append(int(str(cell).strip()))
        except ValueError:
            raise FormatError(f"{path}: non-integer label {cell!r} at line {i + 1}") from None
    return np.asarray(labels, dtype=np.int64)


def load_views(dir_path: str):
    """Matrici D_v x N (trasposte dai file) ed etichette opzionali, senza vincoli su N."""
    paths = view_files(dir_path)
    views = [read_matrix(p).T for p in paths]
    counts = [v.shape[1] for v in views]
    if len(set(counts)) > 1:
        desc = ", ".join(f"{os.path.basename(p)}={c}" for p, c in zip(paths, counts))
        raise FormatError(f"views have different row counts: {desc}")

    labels = None
    labels_path = os.path.join(dir_path, LABELS_FILE)
    if os.path.exists(labels_path):
        labels = read_labels(labels_path)
        if labels.shape[0] != counts[0]:
            raise FormatError(f"{LABELS_FILE} has {labels.shape[0]} lines but views have {counts[0]} rows")
    names = tuple(os.path.splitext(os.path.basename(p))[0] for p in paths)
    return views, labels, names


def load_dataset(dir_path: str) -> MultiviewDataset:
    views, labels, names = load_views(dir_path)
    data = MultiviewDataset(tuple(views), labels, names)
    logger.info("[LOAD] %s: m=%d N=%d D=%s etichette=%s", dir_path, data.n_views, data.n_samples,
                data.dims, labels is not None)
    return data


# ======================
# 📤 Scrittura CSV
# ======================
def write_matrix(path: str, A: np.ndarray, header=None) -> None:
    pd.DataFrame(np.asarray(A, dtype=np.float64)).to_csv(
        path, header=header if header is not None else False, index=False, float_format=FLOAT_FORMAT
    )


def save_dataset(data: MultiviewDataset, dir_path: str) -> None:
    """Scrive view_<k>.csv (una riga per campione) e labels.csv."""
    ensure_dir(dir_path)
    for k, X in enumerate(data.views, start=1):
        write_matrix(os.path.join(dir_path, f"view_{k}.csv"), X.T)
    if data.labels is not None:
        pd.DataFrame(data.labels).to_csv(os.path.join(dir_path, LABELS_FILE), header=False, index=False)
    logger.info("[SAVE] dataset scritto in %s (%d viste)", dir_path, data.n_views)


# ======================
# 🎲 Dati sintetici
# ======================
@dataclass(frozen=True)
class SyntheticSpec:
    classes: int = 3
    per_class: int = 20
    informative_views: int = 3
    noise_views: int = 1
    latent_dim: int = 2
    noise_scale: float = 0.5
    view_dim: int = 10
    separation: float = 4.0
    seed: int = 0


def generate_synthetic(spec: SyntheticSpec) -> MultiviewDataset:
    """
    Centri latenti per classe; ogni vista informativa è una mappa lineare casuale
    dei punti latenti più rumore gaussiano; le viste di rumore non dipendono dalle etichette.
    """
    for name in ("classes", "per_class", "informative_views", "latent_dim", "view_dim"):
        if getattr(spec, name) < 1:
            raise ValueError(f"{name} must be >= 1")
    if spec.noise_views < 0:
        raise ValueError("noise_views must be >= 0")

    rng = np.random.default_rng(spec.seed)
    labels = np.repeat(np.arange(spec.classes), spec.per_class)
    N = labels.size
    centers = spec.separation * rng.standard_normal((spec.latent_dim, spec.classes))
    Z = centers[:, labels] + rng.standard_normal((spec.latent_dim, N))

    views, names = [], []
    for v in range(spec.informative_views):
        A = rng.standard_normal((spec.view_dim, spec.latent_dim))
        views.append(A @ Z + spec.noise_scale * rng.standard_normal((spec.view_dim, N)))
        names.append(f"view_{v + 1}")
    for v in range(spec.noise_views):
        views.append(rng.standard_normal((spec.view_dim, N)))
        names.append(f"view_{spec.informative_views + v + 1}")
    return MultiviewDataset(tuple(views), labels, tuple(names))
