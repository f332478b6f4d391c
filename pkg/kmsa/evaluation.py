# ======================================
# 📊 EVALUATION — Classificazione kNN e metriche di retrieval
# ======================================

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.spatial.distance import cdist

from kmsa.core import DimensionError, EvalError

logger = logging.getLogger(__name__)

TASKS = ("classification", "retrieval")


@dataclass
class RetrievalMetrics:
    """Medie sulle query per ogni cutoff, più mAP."""
    cutoffs: list
    precision: list
    recall: list
    f1: list
    mAP: float

    def as_dict(self) -> dict:
        out = {"mAP": self.mAP}
        for n, p, r, f in zip(self.cutoffs, self.precision, self.recall, self.f1):
            out[f"P@{n}"] = p
            out[f"R@{n}"] = r
            out[f"F1@{n}"] = f
        return out

    def curve(self) -> list:
        """Punti (recall, precision) per la curva PR."""
        return [(r, p) for r, p in zip(self.recall, self.precision)]


@dataclass
class EvalReport:
    task: str
    per_view: list
    best_view: int
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise EvalError(f"unknown task {self.task!r}")


def f1_score(p: float, r: float) -> float:
    return 2.0 * p * r / (p + r) if p + r > 0 else 0.0


def _check_pair(a: np.ndarray, b: np.ndarray, a_labels, b_labels, what: str):
    if a.ndim != 2 or b.ndim != 2 or a.shape[0] != b.shape[0]:
        raise DimensionError(f"{what}: embedding dimensions differ ({a.shape} vs {b.shape})")
    if len(a_labels) != a.shape[1] or len(b_labels) != b.shape[1]:
        raise DimensionError(f"{what}: labels do not match sample counts")


# ======================
# 🏷️ Classificazione
# ======================
def knn_classify(train, train_labels, test, test_labels, k: int = 1) -> float:
    """
    Accuratezza kNN con distanza euclidea.
    Vicini in ordine di distanza (parità -> indice di training minore);
    voto di maggioranza, parità -> etichetta del vicino più vicino.
    """
    train = np.asarray(train, dtype=np.float64)
    test = np.asarray(test, dtype=np.float64)
    train_labels = np.asarray(train_labels).ravel()
    test_labels = np.asarray(test_labels).ravel()
    _check_pair(train, test, train_labels, test_labels, "knn_classify")
    if test.shape[1] == 0:
        raise EvalError("knn_classify: empty test set")
    if not 1 <= k <= train.shape[1]:
        raise EvalError(f"knn_classify: k={k} outside [1, {train.shape[1]}]")

    D = cdist(test.T, train.T, metric="euclidean")
    order = np.argsort(D, axis=1, kind="stable")[:, :k]
    correct = 0
    for q in range(test.shape[1]):
        votes = train_labels[order[q]]
        if k == 1:
            pred = votes[0]
        else:
            values, counts = np.unique(votes, return_counts=True)
            top = values[counts == counts.max()]
            # primo vicino con un'etichetta tra le più votate
            pred = next(lab for lab in votes if lab in top)
        correct += int(pred == test_labels[q])
    return correct / test.shape[1]


# ======================
# 🔎 Retrieval
# ======================
def average_precision(relevant_sorted: np.ndarray) -> float:
    """Media della precisione ai rank dei documenti rilevanti."""
    rel = np.asarray(relevant_sorted, dtype=bool)
    if not rel.any():
        return 0.0
    hits = np.cumsum(rel)
    ranks = np.flatnonzero(rel) + 1
    return float(np.mean(hits[rel] / ranks))


def retrieval_metrics(queries, gallery, query_labels, gallery_labels,
                      top_n: Sequence[int]) -> RetrievalMetrics:
    """Ordina la gallery per distanza l1 (parità -> indice minore) e calcola P/R/F1@n e mAP."""
    queries = np.asarray(queries, dtype=np.float64)
    gallery = np.asarray(gallery, dtype=np.float64)
    query_labels = np.asarray(query_labels).ravel()
    gallery_labels = np.asarray(gallery_labels).ravel()
    _check_pair(queries, gallery, query_labels, gallery_labels, "retrieval_metrics")
    Q, G = queries.shape[1], gallery.shape[1]
    if Q == 0 or G == 0:
        raise EvalError("retrieval_metrics: empty query or gallery set")
    if not top_n or min(top_n) < 1:
        raise EvalError("retrieval_metrics: cutoffs must be positive")
    cutoffs = sorted({min(int(n), G) for n in top_n})

    D = cdist(queries.T, gallery.T, metric="cityblock")
    P = np.zeros((Q, len(cutoffs)))
    R = np.zeros((Q, len(cutoffs)))
    F = np.zeros((Q, len(cutoffs)))
    ap = np.zeros(Q)
    for q in range(Q):
        order = np.argsort(D[q], kind="stable")
        rel = gallery_labels[order] == query_labels[q]
        total = int(rel.sum())
        if total == 0:
            raise EvalError(f"query {q} (class {query_labels[q]}) has no relevant gallery items")
        hits = np.cumsum(rel)
        for c, n in enumerate(cutoffs):
            P[q, c] = hits[n - 1] / n
            R[q, c] = hits[n - 1] / total
            F[q, c] = f1_score(P[q, c], R[q, c])
        ap[q] = average_precision(rel)

    return RetrievalMetrics(
        cutoffs=cutoffs,
        precision=P.mean(axis=0).tolist(),
        recall=R.mean(axis=0).tolist(),
        f1=F.mean(axis=0).tolist(),
        mAP=float(ap.mean()),
    )


# ======================
# 🗂️ Report per vista
# ======================
def build_report(task: str, per_view: list, headline: Optional[str] = None) -> EvalReport:
    """Sceglie la vista migliore secondo la metrica principale (accuracy o mAP)."""
    if not per_view:
        raise EvalError("no per-view metrics to report")
    headline = headline or ("accuracy" if task == "classification" else "mAP")
    scores = [rec[headline] for rec in per_view]
    best = int(np.argmax(scores))
    details = {"headline": headline}
    if task == "retrieval":
        details["pr_curve"] = [rec.get("curve", []) for rec in per_view]
    logger.info("[EVAL] %s: vista migliore %d (%s=%.4f)", task, best + 1, headline, scores[best])
    return EvalReport(task=task, per_view=per_view, best_view=best, details=details)
