# ======================================
# 🧩 CORE — Tipi di dominio, errori e validazione della configurazione
# ======================================

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields, replace
from functools import cached_property
from typing import Any, Optional, Sequence, Union

import numpy as np

logger = logging.getLogger(__name__)

KERNEL_KINDS = ("gaussian", "linear", "polynomial")
GRAPH_KINDS = ("pca", "lpp", "lda", "spp")
MEDIAN_HEURISTIC = "median-heuristic"
REAL_FIELDS = ("r", "kappa", "eta", "tol", "ridge")


# ======================
# ⚠️ Errori e warning
# ======================
class KmsaError(Exception):
    """Base di tutti gli errori del pacchetto."""


@dataclass(frozen=True)
class ConfigIssue:
    code: str
    message: str


class ConfigError(KmsaError):
    """Uno o più vincoli violati; `issues` porta un codice per ogni violazione."""

    def __init__(self, issues: Sequence[ConfigIssue]):
        self.issues = list(issues)
        super().__init__("; ".join(i.message for i in self.issues))

    @property
    def codes(self) -> list[str]:
        return [i.code for i in self.issues]


class DimensionError(KmsaError):
    pass


class GraphError(KmsaError):
    pass


class NumericError(KmsaError):
    pass


class WeightDomainError(KmsaError):
    pass


class EvalError(KmsaError):
    pass


class IoError(KmsaError):
    pass


class FormatError(KmsaError):
    pass


class VersionError(KmsaError):
    pass


class ConvergenceWarning(UserWarning):
    pass


class NonMonotoneWarning(UserWarning):
    pass


class WeightDomainWarning(UserWarning):
    pass


# ======================
# 📦 Specifiche di kernel e grafo
# ======================
@dataclass(frozen=True)
class KernelSpec:
    """
    kind: gaussian | linear | polynomial.
    bandwidth: sigma del gaussiano, oppure "median-heuristic" (anche None).
    """
    kind: str = "gaussian"
    bandwidth: Union[float, str, None] = MEDIAN_HEURISTIC
    degree: int = 2
    offset: float = 1.0

    @property
    def uses_median(self) -> bool:
        return self.kind == "gaussian" and (self.bandwidth is None or self.bandwidth == MEDIAN_HEURISTIC)


@dataclass(frozen=True)
class GraphRecipe:
    """
    kind: pca | lpp | lda | spp.
    k, t: vicini e parametro di calore (lpp; t=None -> mediana delle distanze al quadrato).
    lam, max_iters: peso l1 e iterazioni del lasso (spp).
    """
    kind: str = "pca"
    k: int = 5
    t: Optional[float] = None
    lam: float = 0.1
    max_iters: int = 200


# ======================
# 📁 Dataset multivista
# ======================
@dataclass(frozen=True, eq=False)
class MultiviewDataset:
    """m matrici D_v x N (colonne = campioni), etichette opzionali."""
    views: tuple
    labels: Optional[np.ndarray] = None
    view_names: Optional[tuple] = None

    def __post_init__(self):
        views = tuple(np.atleast_2d(np.asarray(v, dtype=np.float64)) for v in self.views)
        object.__setattr__(self, "views", views)
        if self.labels is not None:
            object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64).ravel())
        if self.view_names is None:
            object.__setattr__(self, "view_names", tuple(f"view_{k + 1}" for k in range(len(views))))
        else:
            object.__setattr__(self, "view_names", tuple(str(n) for n in self.view_names))

    @property
    def n_views(self) -> int:
        return len(self.views)

    @property
    def n_samples(self) -> int:
        return self.views[0].shape[1] if self.views else 0

    @property
    def dims(self) -> list[int]:
        return [v.shape[0] for v in self.views]

    def subset(self, idx) -> "MultiviewDataset":
        """Sotto-dataset sulle colonne `idx` (usato dagli split di valutazione)."""
        idx = np.asarray(idx, dtype=np.int64)
        labels = None if self.labels is None else self.labels[idx]
        return MultiviewDataset(tuple(v[:, idx] for v in self.views), labels, self.view_names)


# ======================
# ⚙️ Configurazione
# ======================
@dataclass(frozen=True)
class KmsaConfig:
    d: int = 10
    r: float = 3.0
    kappa: float = 0.1
    eta: float = -1.0
    kernel: tuple = (KernelSpec(),)
    graph: tuple = (GraphRecipe(),)
    max_iters: int = 30
    tol: float = 1e-6
    ridge: float = 1e-8
    center_kernel: bool = False
    seed: int = 0
    learn_weights: bool = True

    def __post_init__(self):
        if isinstance(self.kernel, KernelSpec):
            object.__setattr__(self, "kernel", (self.kernel,))
        else:
            object.__setattr__(self, "kernel", tuple(self.kernel))
        if isinstance(self.graph, GraphRecipe):
            object.__setattr__(self, "graph", (self.graph,))
        else:
            object.__setattr__(self, "graph", tuple(self.graph))

    def kernel_for(self, v: int) -> KernelSpec:
        return self.kernel[0] if len(self.kernel) == 1 else self.kernel[v]

    def graph_for(self, v: int) -> GraphRecipe:
        return self.graph[0] if len(self.graph) == 1 else self.graph[v]

    def with_recipe(self, kind: str) -> "KmsaConfig":
        """Stessa configurazione con la ricetta `kind` su tutte le viste."""
        return replace(self, graph=tuple(replace(g, kind=kind) for g in self.graph))


def config_to_dict(cfg: KmsaConfig) -> dict:
    out = {f.name: getattr(cfg, f.name) for f in fields(cfg)}
    out["kernel"] = [asdict(k) for k in cfg.kernel]
    out["graph"] = [asdict(g) for g in cfg.graph]
    return out


def config_from_dict(raw: dict, base: Optional[KmsaConfig] = None) -> KmsaConfig:
    """
    Costruisce una KmsaConfig da un dizionario (file JSON).
    Le chiavi omesse prendono il valore di `base` (KmsaConfig() se None).
    """
    base = base or KmsaConfig()
    known = {f.name for f in fields(KmsaConfig)}
    unknown = sorted(set(raw) - known)
    if unknown:
        raise ConfigError([ConfigIssue("unknown_key", f"unknown config key(s): {', '.join(unknown)}")])

    values: dict[str, Any] = {}
    for name, value in raw.items():
        if name == "kernel":
            values[name] = tuple(_build_spec(KernelSpec, item, "kernel") for item in _as_list(value))
        elif name == "graph":
            values[name] = tuple(_build_spec(GraphRecipe, item, "graph") for item in _as_list(value))
        else:
            values[name] = value
    return replace(base, **values)


def _as_list(value):
    return value if isinstance(value, (list, tuple)) else [value]


def _build_spec(cls, item, label):
    if isinstance(item, cls):
        return item
    if not isinstance(item, dict):
        raise ConfigError([ConfigIssue(f"{label}_malformed", f"{label} entry must be an object, got {item!r}")])
    allowed = {f.name for f in fields(cls)}
    extra = sorted(set(item) - allowed)
    if extra:
        raise ConfigError([ConfigIssue("unknown_key", f"unknown {label} key(s): {', '.join(extra)}")])
    return cls(**item)


# ======================
# 🧮 Stato per vista e modello
# ======================
@dataclass(frozen=True, eq=False)
class ViewState:
    K: np.ndarray
    P: np.ndarray
    M: np.ndarray
    U: np.ndarray

    @cached_property
    def kpk(self) -> np.ndarray:
        """K P K simmetrizzata (termine di grafo dell'obiettivo)."""
        H = self.K @ self.P @ self.K
        return 0.5 * (H + H.T)

    def with_U(self, U: np.ndarray) -> "ViewState":
        state = ViewState(self.K, self.P, self.M, U)
        # kpk non dipende da U: lo si porta dietro senza ricalcolarlo
        if "kpk" in self.__dict__:
            state.__dict__["kpk"] = self.__dict__["kpk"]
        return state


@dataclass(frozen=True, eq=False)
class KmsaModel:
    states: tuple
    alpha: np.ndarray
    objective_trace: tuple
    embeddings: tuple
    config: KmsaConfig
    kernels: tuple = ()
    view_names: tuple = ()
    divergence: Optional[np.ndarray] = None
    warnings: tuple = field(default_factory=tuple)

    @property
    def n_views(self) -> int:
        return len(self.states)

    @property
    def n_iterations(self) -> int:
        return len(self.objective_trace) - 1


# ======================
# ✅ Validazione
# ======================
def validate_config(cfg: KmsaConfig, data: MultiviewDataset) -> None:
    """
    Controlla congiuntamente configurazione e dataset.
    Solleva ConfigError con tutti i vincoli violati (un codice per vincolo).
    """
    issues: list[ConfigIssue] = []

    def add(code, message):
        issues.append(ConfigIssue(code, message))

    m = data.n_views
    if m < 1:
        add("no_views", "dataset must contain at least one view")
    N = data.n_samples
    if m >= 1:
        counts = [v.shape[1] for v in data.views]
        if len(set(counts)) > 1:
            add("view_sample_mismatch", f"views disagree on sample count: {counts}")
        if N < 2:
            add("too_few_samples", f"need at least 2 samples, got {N}")
        for k, v in enumerate(data.views):
            if v.shape[0] < 1:
                add("empty_view", f"view {k + 1} has no features")
            elif not np.all(np.isfinite(v)):
                add("non_finite_view", f"view {k + 1} contains non-finite values")

    if data.labels is not None and data.labels.shape[0] != N:
        add("labels_length", f"labels length {data.labels.shape[0]} does not match N={N}")

    if not _is_int(cfg.d) or cfg.d < 1:
        add("d_not_positive", "d must be a positive integer")
    elif N >= 1 and cfg.d > N:
        add("d_exceeds_n", f"d={cfg.d} must not exceed N={N}")

    # tipo prima del range: "3" o null non arrivano ai confronti
    numeric = {}
    for name in REAL_FIELDS:
        value = getattr(cfg, name)
        numeric[name] = _is_real(value)
        if not numeric[name]:
            add(f"{name}_invalid", f"{name} must be a number, got {value!r}")
    if numeric["r"] and not cfg.r > 1:
        add("r_not_above_one", "r must exceed 1")
    if numeric["kappa"] and not cfg.kappa >= 0:
        add("kappa_negative", "kappa must be non-negative")
    if numeric["eta"] and not cfg.eta < 0:
        add("eta_not_negative", "eta must be negative")
    if numeric["tol"] and not cfg.tol > 0:
        add("tol_not_positive", "tol must be positive")
    if numeric["ridge"] and not cfg.ridge >= 0:
        add("ridge_negative", "ridge must be non-negative")
    if not _is_int(cfg.max_iters) or cfg.max_iters < 0:
        add("max_iters_invalid", "max_iters must be a non-negative integer")
    if not _is_int(cfg.seed):
        add("seed_invalid", f"seed must be an integer, got {cfg.seed!r}")
    for name in ("center_kernel", "learn_weights"):
        if not isinstance(getattr(cfg, name), (bool, np.bool_)):
            add(f"{name}_invalid", f"{name} must be true or false, got {getattr(cfg, name)!r}")

    if len(cfg.kernel) not in (1, m):
        add("kernel_count_mismatch", f"{len(cfg.kernel)} kernel specs for {m} views")
    else:
        for k, spec in enumerate(cfg.kernel):
            _check_kernel(spec, k, add)

    if len(cfg.graph) not in (1, m):
        add("graph_count_mismatch", f"{len(cfg.graph)} graph recipes for {m} views")
    else:
        for k, recipe in enumerate(cfg.graph):
            _check_graph(recipe, k, N, data.labels, add)

    if issues:
        logger.debug("[CONFIG] %d violazioni: %s", len(issues), [i.code for i in issues])
        raise ConfigError(issues)


def _is_real(value) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, (bool, np.bool_))


def _is_int(value) -> bool:
    return isinstance(value, (int, np.integer)) and not isinstance(value, (bool, np.bool_))


def _check_kernel(spec: KernelSpec, k: int, add) -> None:
    where = f"kernel[{k}]"
    if spec.kind not in KERNEL_KINDS:
        add("kernel_kind_unknown", f"{where}: unknown kernel kind {spec.kind!r}")
        return
    if spec.kind == "gaussian" and not spec.uses_median:
        if not _is_real(spec.bandwidth) or not spec.bandwidth > 0:
            add("bandwidth_not_positive", f"{where}: bandwidth must be positive or {MEDIAN_HEURISTIC!r}")
    if spec.kind == "polynomial":
        if not _is_int(spec.degree) or spec.degree < 1:
            add("degree_invalid", f"{where}: polynomial degree must be an integer >= 1")
        if not _is_real(spec.offset):
            add("offset_invalid", f"{where}: polynomial offset must be a number, got {spec.offset!r}")
        elif not spec.offset >= 0:
            add("offset_negative", f"{where}: polynomial offset must be non-negative")


def _check_graph(recipe: GraphRecipe, k: int, N: int, labels, add) -> None:
    where = f"graph[{k}]"
    if recipe.kind not in GRAPH_KINDS:
        add("graph_kind_unknown", f"{where}: unknown graph recipe {recipe.kind!r}")
        return
    if recipe.kind == "lda":
        if labels is None:
            add("lda_requires_labels", f"{where}: lda recipe requires labels")
    elif recipe.kind == "lpp":
        if not _is_int(recipe.k) or not 1 <= recipe.k < max(N, 1):
            add("lpp_k_out_of_range", f"{where}: lpp needs 1 <= k < N (k={recipe.k!r}, N={N})")
        if recipe.t is not None and (not _is_real(recipe.t) or not recipe.t > 0):
            add("lpp_t_not_positive", f"{where}: lpp heat parameter t must be positive")
    elif recipe.kind == "spp":
        if not _is_real(recipe.lam) or not recipe.lam > 0:
            add("spp_lambda_not_positive", f"{where}: spp lambda must be positive")
        if not _is_int(recipe.max_iters) or recipe.max_iters < 1:
            add("spp_max_iters_invalid", f"{where}: spp max_iters must be a positive integer")
