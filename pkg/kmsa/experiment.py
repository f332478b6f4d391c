# ======================================
# 🧪 EXPERIMENT — Protocollo a split casuali ripetuti
# ======================================

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import replace
from typing import Sequence

import numpy as np

from kmsa.core import ConfigError, ConfigIssue, KmsaConfig, MultiviewDataset
from kmsa.evaluation import build_report, knn_classify, retrieval_metrics
from kmsa.optimizer import fit, transform

logger = logging.getLogger(__name__)

DEFAULT_TOP_N = (5, 10, 20, 50)


def stratified_split(labels: np.ndarray, train_frac: float, seed: int):
    """
    Split casuale per classe: almeno un campione di training per classe
    e, se la classe ne ha almeno due, almeno uno di test.
    """
    if not 0 < train_frac < 1:
        raise ConfigError([ConfigIssue("train_frac_out_of_range", "train fraction must lie in (0, 1)")])
    rng = np.random.default_rng(seed)
    train, test = [], []
    for c in np.unique(labels):
        idx = np.flatnonzero(labels == c)
        idx = idx[rng.permutation(idx.size)]
        n_train = int(round(train_frac * idx.size))
        n_train = min(max(n_train, 1), max(idx.size - 1, 1))
        train.extend(idx[:n_train])
        test.extend(idx[n_train:])
    return np.sort(np.asarray(train, dtype=np.int64)), np.sort(np.asarray(test, dtype=np.int64))


def run_repeat(data: MultiviewDataset, cfg: KmsaConfig, task: str, train_frac: float, seed: int,
               top_n: Sequence[int] = DEFAULT_TOP_N, k: int = 1) -> dict:
    """Un giro: split, fit sul training, embedding del test, metriche per vista."""
    train_idx, test_idx = stratified_split(data.labels, train_frac, seed)
    train, test = data.subset(train_idx), data.subset(test_idx)
    model = fit(train, replace(cfg, seed=seed))
    test_emb = transform(model, test.views, train)

    per_view = []
    for v in range(data.n_views):
        if task == "classification":
            acc = knn_classify(model.embeddings[v], train.labels, test_emb[v], test.labels, k=k)
            per_view.append({"accuracy": acc})
        else:
            metrics = retrieval_metrics(test_emb[v], model.embeddings[v], test.labels, train.labels, top_n)
            record = metrics.as_dict()
            record["curve"] = metrics.curve()
            per_view.append(record)

    report = build_report(task, per_view)
    best = report.per_view[report.best_view]
    logger.info("[EVAL] seed=%d vista migliore=%d alpha=%s", seed, report.best_view + 1,
                np.round(model.alpha, 4).tolist())
    return {
        "seed": seed,
        "best_view": report.best_view,
        "best": {key: val for key, val in best.items() if key != "curve"},
        "per_view": report.per_view,
        "alpha": [float(a) for a in model.alpha],
        "iterations": model.n_iterations,
        "details": report.details,
    }


def run_experiment(data: MultiviewDataset, cfg: KmsaConfig, task: str, repeats: int, train_frac: float,
                   seed: int, top_n: Sequence[int] = DEFAULT_TOP_N, workers: int = 1) -> dict:
    """
    Ripete il protocollo `repeats` volte con seed = seed + i.
    I risultati sono riuniti nell'ordine degli indici, quindi deterministici.
    """
    if data.labels is None:
        raise ConfigError([ConfigIssue("eval_requires_labels", "evaluation requires labels.csv")])
    if repeats < 1:
        raise ConfigError([ConfigIssue("repeats_invalid", "repeats must be >= 1")])

    seeds = [seed + i for i in range(repeats)]

    def one(s):
        return run_repeat(data, cfg, task, train_frac, s, top_n)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            runs = list(pool.map(one, seeds))
    else:
        runs = [one(s) for s in seeds]

    keys = [key for key in runs[0]["best"]]
    mean = {key: float(np.mean([run["best"][key] for run in runs])) for key in keys}
    return {
        "task": task,
        "repeats": repeats,
        "train_frac": train_frac,
        "seed": seed,
        "learn_weights": cfg.learn_weights,
        "runs": runs,
        "mean": mean,
    }
