# ======================================
# 🔁 OPTIMIZER — Ottimizzazione alternata di U^v e dei pesi alpha
# ======================================

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field, replace
from itertools import combinations
from typing import Sequence

import numpy as np

from kmsa.core import (
    DimensionError,
    KmsaConfig,
    KmsaModel,
    MultiviewDataset,
    NonMonotoneWarning,
    NumericError,
    ViewState,
    WeightDomainError,
    WeightDomainWarning,
    validate_config,
)
from kmsa.eigsolver import generalized_eigh
from kmsa.graphs import build_graph, constraint_matrix, laplacian
from kmsa.kernels import build_kernel, center_cross, cross_kernel, resolve_kernel

logger = logging.getLogger(__name__)

MONOTONE_SLACK = 1e-8
TRACE_FLOOR = 1e-12


@dataclass(frozen=True, eq=False)
class OptState:
    states: tuple
    alpha: np.ndarray
    iter: int = 0
    objective_trace: tuple = ()
    notes: tuple = field(default_factory=tuple)

    def with_view(self, v: int, U: np.ndarray) -> "OptState":
        states = list(self.states)
        states[v] = states[v].with_U(U)
        return replace(self, states=tuple(states))


# ======================
# 📉 Funzione obiettivo
# ======================
def coupling(Ua: np.ndarray, Ub: np.ndarray) -> float:
    """tr(Ua^T Ub Ub^T Ua) = ||Ua^T Ub||_F^2."""
    G = Ua.T @ Ub
    return float(np.sum(G * G))


def objective_terms(state: OptState, cfg: KmsaConfig) -> dict:
    """I tre termini dell'obiettivo: grafo pesato, regolarizzatore su alpha, co-regolarizzatore."""
    a_r = state.alpha ** cfg.r
    graph = sum(float(a_r[v] * np.trace(s.U.T @ s.kpk @ s.U)) for v, s in enumerate(state.states))
    reg = cfg.kappa * float(a_r.sum())
    coreg = 0.0
    for v, w in combinations(range(len(state.states)), 2):
        coreg += (a_r[v] + a_r[w]) / (2.0 * cfg.eta) * coupling(state.states[v].U, state.states[w].U)
    return {"graph": graph, "regularizer": reg, "coregularizer": coreg}


def objective(state: OptState, cfg: KmsaConfig) -> float:
    terms = objective_terms(state, cfg)
    return terms["graph"] + terms["regularizer"] + terms["coregularizer"]


def objective_lower_bound(state: OptState, cfg: KmsaConfig) -> float:
    """m * min_v alpha_v^r tr(U^T KPK U) + C(m,2)/(2 eta) * max_{b<c} (alpha_b^r + alpha_c^r) tr(...)."""
    a_r = state.alpha ** cfg.r
    m = len(state.states)
    per_view = [a_r[v] * np.trace(s.U.T @ s.kpk @ s.U) for v, s in enumerate(state.states)]
    bound = m * float(min(per_view))
    pairs = list(combinations(range(m), 2))
    if pairs:
        worst = max((a_r[b] + a_r[c]) * coupling(state.states[b].U, state.states[c].U) for b, c in pairs)
        bound += len(pairs) / (2.0 * cfg.eta) * worst
    return bound


# ======================
# 🧱 Aggiornamento di U^v
# ======================
def build_h(state: OptState, v: int, cfg: KmsaConfig) -> np.ndarray:
    """H^v = K P K + sum_{w != v} (1 + (alpha_w/alpha_v)^r) / (2 eta) U^w U^w^T."""
    a_v = float(state.alpha[v])
    if not a_v > 0:
        raise NumericError(f"view weight alpha[{v}] underflowed to {a_v!r}")
    H = state.states[v].kpk.copy()
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        for w, s in enumerate(state.states):
            if w == v:
                continue
            # (alpha_w / alpha_v)^r in scala logaritmica: overflow -> inf, non OverflowError
            ratio = np.exp(cfg.r * (np.log(state.alpha[w]) - np.log(a_v)))
            coef = (1.0 + ratio) / (2.0 * cfg.eta)
            H += coef * (s.U @ s.U.T)
    if not np.all(np.isfinite(H)):
        raise NumericError(
            f"H for view {v + 1} is not finite: weight ratio overflow with alpha={state.alpha.tolist()}"
        )
    return 0.5 * (H + H.T)


def update_view(state: OptState, v: int, cfg: KmsaConfig) -> np.ndarray:
    H = build_h(state, v, cfg)
    _, U = generalized_eigh(H, state.states[v].M, cfg.d)
    return U


# ======================
# ⚖️ Aggiornamento dei pesi
# ======================
def weight_traces(state: OptState, cfg: KmsaConfig) -> np.ndarray:
    """T_v = tr(U^T KPK U) + kappa + sum_{w != v} ||U_v^T U_w||^2 / (2 eta), così obiettivo = sum alpha_v^r T_v."""
    m = len(state.states)
    T = np.empty(m)
    for v, s in enumerate(state.states):
        T[v] = np.trace(s.U.T @ s.kpk @ s.U) + cfg.kappa
        for w, o in enumerate(state.states):
            if w != v:
                T[v] += coupling(s.U, o.U) / (2.0 * cfg.eta)
    return T


def weights_from_traces(traces: Sequence[float], r: float) -> np.ndarray:
    """alpha_v proporzionale a (1/T_v)^(1/(r-1)); richiede T_v > 0."""
    T = np.asarray(traces, dtype=np.float64)
    if np.any(~(T > 0)):
        raise WeightDomainError(f"weight update undefined for non-positive trace terms {T.tolist()}")
    # normalizzare per il minimo evita overflow quando r -> 1
    ratio = T.min() / T
    w = np.maximum(ratio ** (1.0 / (r - 1.0)), np.finfo(np.float64).tiny)
    return w / w.sum()


def clamp_traces(traces: Sequence[float]) -> np.ndarray:
    T = np.asarray(traces, dtype=np.float64)
    scale = float(np.max(np.abs(T))) if T.size else 0.0
    floor = TRACE_FLOOR * scale if scale > 0 else TRACE_FLOOR
    return np.where(T > 0, T, floor)


def update_weights(state: OptState, cfg: KmsaConfig):
    """
    Aggiornamento in forma chiusa dei pesi.
    Restituisce (alpha, note): tracce non positive vengono portate al floor con un warning.
    """
    T = weight_traces(state, cfg)
    notes = []
    try:
        alpha = weights_from_traces(T, cfg.r)
    except WeightDomainError as exc:
        msg = f"iteration {state.iter}: {exc}; clamped to floor"
        notes.append(msg)
        logger.warning("[WEIGHTS] %s", msg)
        warnings.warn(msg, WeightDomainWarning, stacklevel=2)
        alpha = weights_from_traces(clamp_traces(T), cfg.r)
    return alpha, notes


# ======================
# 🏋️ Fit (Algoritmo alternato)
# ======================
def init_states(data: MultiviewDataset, cfg: KmsaConfig):
    """Kernel, grafo e vincolo per vista; U iniziale dal problema a vista singola."""
    states, kernels, notes = [], [], []
    for v, X in enumerate(data.views):
        spec = resolve_kernel(X, cfg.kernel_for(v))
        K = build_kernel(X, spec, cfg.center_kernel)
        pair = build_graph(cfg.graph_for(v), X, data.labels)
        notes.extend(f"view {v + 1}: {w}" for w in pair.meta.get("warnings", []))
        P = laplacian(pair.S)
        M = constraint_matrix(K, pair, cfg.ridge)
        state = ViewState(K=K, P=P, M=M, U=np.zeros((K.shape[0], cfg.d)))
        _, U = generalized_eigh(state.kpk, M, cfg.d)
        states.append(state.with_U(U))
        kernels.append(spec)
    return tuple(states), tuple(kernels), notes


def fit(data: MultiviewDataset, cfg: KmsaConfig) -> KmsaModel:
    validate_config(cfg, data)
    m = data.n_views
    logger.info("[FIT] avvio: m=%d N=%d d=%d ricette=%s", m, data.n_samples, cfg.d,
                [cfg.graph_for(v).kind for v in range(m)])

    states, kernels, notes = init_states(data, cfg)
    state = OptState(states=states, alpha=np.full(m, 1.0 / m), iter=0)
    trace = [objective(state, cfg)]

    for it in range(1, cfg.max_iters + 1):
        state = replace(state, iter=it)
        for v in range(m):
            state = state.with_view(v, update_view(state, v, cfg))

        if cfg.learn_weights:
            alpha, weight_notes = update_weights(state, cfg)
            notes.extend(weight_notes)
            if weight_notes:
                # pesi da tracce clampate: confronto dell'obiettivo prima/dopo
                before = objective(state, cfg)
                candidate = replace(state, alpha=alpha)
                if objective(candidate, cfg) <= before:
                    state = candidate
                else:
                    msg = f"iteration {it}: clamped weights would increase the objective; kept previous alpha"
                    notes.append(msg)
                    logger.warning("[WEIGHTS] %s", msg)
            else:
                state = replace(state, alpha=alpha)

        g = objective(state, cfg)
        prev = trace[-1]
        if g > prev + MONOTONE_SLACK * max(1.0, abs(prev)):
            msg = f"iteration {it}: objective increased from {prev:.12g} to {g:.12g}"
            notes.append(msg)
            logger.warning("[FIT] %s", msg)
            warnings.warn(msg, NonMonotoneWarning, stacklevel=2)
        bound = objective_lower_bound(state, cfg)
        if g < bound - MONOTONE_SLACK * max(1.0, abs(bound)):
            logger.warning("[FIT] iter %d: G=%.10g sotto il limite inferiore %.10g", it, g, bound)
        trace.append(g)
        logger.debug("[FIT] iter %d: G=%.10g alpha=%s", it, g, np.round(state.alpha, 4).tolist())

        if abs(g - prev) <= cfg.tol * (1.0 + abs(prev)):
            logger.info("[FIT] convergenza dopo %d iterazioni", it)
            break

    embeddings = tuple(s.U.T @ s.K for s in state.states)
    return KmsaModel(
        states=state.states,
        alpha=state.alpha,
        objective_trace=tuple(float(x) for x in trace),
        embeddings=embeddings,
        config=cfg,
        kernels=kernels,
        view_names=data.view_names,
        divergence=divergence_matrix(state.states),
        warnings=tuple(notes),
    )


# ======================
# 🧭 Transform e diagnostica
# ======================
def transform(model: KmsaModel, new_points: Sequence[np.ndarray], data: MultiviewDataset) -> list:
    """Immerge nuovi punti: y = U^T k_new, con k_new calcolato contro i campioni di training."""
    if len(new_points) != model.n_views or data.n_views != model.n_views:
        raise DimensionError(f"expected {model.n_views} views, got {len(new_points)} new / {data.n_views} training")
    out = []
    for v, (Z, X, s) in enumerate(zip(new_points, data.views, model.states)):
        Z = np.asarray(Z, dtype=np.float64)
        if Z.ndim != 2 or Z.shape[0] != X.shape[0]:
            raise DimensionError(f"view {v + 1}: new points have {Z.shape[0] if Z.ndim else 0} features, "
                                 f"training has {X.shape[0]}")
        if X.shape[1] != s.U.shape[0]:
            raise DimensionError(f"view {v + 1}: training data has {X.shape[1]} samples, model has {s.U.shape[0]}")
        spec = model.kernels[v] if model.kernels else model.config.kernel_for(v)
        if Z.shape[1] == 0:
            out.append(np.zeros((s.U.shape[1], 0)))
            continue
        k_new = cross_kernel(X, Z, spec)
        if model.config.center_kernel:
            K_raw = cross_kernel(X, X, spec)
            k_new = center_cross(k_new, 0.5 * (K_raw + K_raw.T))
        out.append(s.U.T @ k_new)
    return out


def view_divergence(Ui: np.ndarray, Uj: np.ndarray) -> float:
    """|| L_i/||L_i||_F^2 - L_j/||L_j||_F^2 ||_F^2 con L = U^T U (diagnostica)."""
    Li, Lj = Ui.T @ Ui, Uj.T @ Uj
    ni, nj = np.sum(Li * Li), np.sum(Lj * Lj)
    if ni == 0 or nj == 0:
        return float("nan")
    D = Li / ni - Lj / nj
    return float(np.sum(D * D))


def divergence_matrix(states: Sequence[ViewState]) -> np.ndarray:
    m = len(states)
    D = np.zeros((m, m))
    for i, j in combinations(range(m), 2):
        D[i, j] = D[j, i] = view_divergence(states[i].U, states[j].U)
    return D
