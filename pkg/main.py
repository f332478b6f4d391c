# ======================================
# 🌿 MAIN — CLI per Kernelized Multiview Subspace Analysis
# ======================================

import argparse
import json
import logging
import os
import sys
from dataclasses import replace

import numpy as np
import pandas as pd

from config import settings
from kmsa.core import (
    ConfigError,
    ConfigIssue,
    DimensionError,
    EvalError,
    FormatError,
    GraphError,
    IoError,
    KmsaConfig,
    NumericError,
    VersionError,
    WeightDomainError,
    config_from_dict,
)
from kmsa.data_manager import (
    LABELS_FILE,
    FLOAT_FORMAT,
    SyntheticSpec,
    ensure_dir,
    generate_synthetic,
    load_dataset,
    load_views,
    save_dataset,
    write_matrix,
)
from kmsa.experiment import DEFAULT_TOP_N, run_experiment
from kmsa.model_manager import load_model, save_model, save_report
from kmsa.optimizer import fit, transform

logger = logging.getLogger("kmsa.cli")

EXIT_OK, EXIT_CONFIG, EXIT_IO, EXIT_NUMERIC = 0, 1, 2, 3
TASKS = {"classify": "classification", "retrieve": "retrieval"}


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """Errori di utilizzo -> exit 1 con il testo d'uso su stderr."""

    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: {message}")


def exit_code_for(exc: Exception) -> int:
    if isinstance(exc, (IoError, FormatError, VersionError)):
        return EXIT_IO
    if isinstance(exc, (NumericError, WeightDomainError)):
        return EXIT_NUMERIC
    return EXIT_CONFIG


def summary(**pairs) -> None:
    """Riga riassuntiva key=value su stdout."""
    print(" ".join(f"{key}={value}" for key, value in pairs.items()))


# ======================
# ⚙️ Configurazione
# ======================
def load_config(path=None, recipe=None) -> KmsaConfig:
    """Default da config/defaults.json, poi il file --config, poi --recipe."""
    cfg = KmsaConfig()
    if os.path.exists(settings.DEFAULTS_PATH):
        cfg = config_from_dict(_read_json(settings.DEFAULTS_PATH), cfg)
    per_view_graph = False
    if path:
        raw = _read_json(path)
        per_view_graph = isinstance(raw.get("graph"), list) and len(raw["graph"]) > 1
        cfg = config_from_dict(raw, cfg)
    if recipe and not per_view_graph:
        cfg = cfg.with_recipe(recipe)
    return cfg


def _read_json(path):
    if not os.path.exists(path):
        raise IoError(f"config file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as f:
            raw = json.load(f)
    except json.JSONDecodeError as exc:
        raise ConfigError([ConfigIssue("config_malformed", f"{path}: invalid JSON ({exc})")]) from exc
    if not isinstance(raw, dict):
        raise ConfigError([ConfigIssue("config_malformed", f"{path}: top level must be an object")])
    return raw


def _require_labels(cfg: KmsaConfig, data, data_dir: str) -> None:
    if data.labels is None and any(g.kind == "lda" for g in cfg.graph):
        missing = os.path.join(data_dir, LABELS_FILE)
        raise ConfigError([ConfigIssue("lda_requires_labels", f"lda recipe requires labels: missing {missing}")])


def _write_embeddings(dir_path: str, embeddings, labels=None) -> None:
    """Una riga per campione, così la directory si rilegge con load_dataset."""
    ensure_dir(dir_path)
    for k, Y in enumerate(embeddings, start=1):
        write_matrix(os.path.join(dir_path, f"view_{k}.csv"), Y.T)
    if labels is not None:
        pd.DataFrame(labels).to_csv(os.path.join(dir_path, LABELS_FILE), header=False, index=False)


# ======================
# 🏋️ Comandi
# ======================
def cmd_fit(args) -> int:
    data = load_dataset(args.data)
    cfg = load_config(args.config, args.recipe)
    _require_labels(cfg, data, args.data)
    model = fit(data, cfg)

    out = ensure_dir(args.out)
    model_dir = os.path.join(out, "model")
    save_model(model, model_dir)
    save_dataset(data, os.path.join(model_dir, "train"))

    trace = pd.DataFrame({"iteration": np.arange(len(model.objective_trace)),
                          "objective": model.objective_trace})
    trace.to_csv(os.path.join(out, "trace.csv"), index=False, float_format=FLOAT_FORMAT)
    weights = pd.DataFrame({"view": list(data.view_names), "alpha": model.alpha})
    weights.to_csv(os.path.join(out, "weights.csv"), index=False, float_format=FLOAT_FORMAT)
    _write_embeddings(os.path.join(out, "embeddings"), model.embeddings, data.labels)

    # coordinate 2D per grafici esterni
    for k, Y in enumerate(model.embeddings, start=1):
        plot = pd.DataFrame({"x": Y[0], "y": Y[1] if Y.shape[0] > 1 else np.zeros(Y.shape[1])})
        if data.labels is not None:
            plot["label"] = data.labels
        plot.to_csv(os.path.join(out, f"plot_view_{k}.csv"), index=False, float_format=FLOAT_FORMAT)

    summary(command="fit", status="ok", views=data.n_views, samples=data.n_samples,
            iterations=model.n_iterations, objective=f"{model.objective_trace[-1]:.10g}",
            alpha=";".join(f"{a:.6g}" for a in model.alpha))
    return EXIT_OK


def cmd_transform(args) -> int:
    model = load_model(args.model)
    train = load_dataset(os.path.join(args.model, "train"))
    views, labels, _ = load_views(args.data)
    if len(views) != model.n_views:
        raise DimensionError(f"model has {model.n_views} views, {args.data} has {len(views)}")
    embedded = transform(model, views, train)
    _write_embeddings(args.out, embedded, labels)
    summary(command="transform", status="ok", views=len(embedded), samples=embedded[0].shape[1])
    return EXIT_OK


def cmd_eval(args) -> int:
    data = load_dataset(args.data)
    cfg = load_config(args.config, args.recipe)
    _require_labels(cfg, data, args.data)
    if data.labels is None:
        raise ConfigError([ConfigIssue("eval_requires_labels",
                                       f"evaluation requires labels: missing {os.path.join(args.data, LABELS_FILE)}")])
    if args.fixed_weights:
        cfg = replace(cfg, learn_weights=False)

    task = TASKS[args.task]
    report = run_experiment(data, cfg, task, args.repeats, args.train_frac, args.seed,
                            top_n=args.top_n, workers=settings.WORKERS)
    out = ensure_dir(args.out)
    save_report(report, os.path.join(out, "report.json"))

    rows = [{"repeat": i, "seed": run["seed"], "best_view": run["best_view"] + 1, **run["best"]}
            for i, run in enumerate(report["runs"])]
    rows.append({"repeat": "mean", "seed": "", "best_view": "", **report["mean"]})
    pd.DataFrame(rows).to_csv(os.path.join(out, "metrics.csv"), index=False, float_format=FLOAT_FORMAT)

    headline = "accuracy" if task == "classification" else "mAP"
    summary(command="eval", status="ok", task=args.task, repeats=args.repeats,
            **{f"mean_{headline}": f"{report['mean'][headline]:.6g}"})
    return EXIT_OK


def cmd_synth(args) -> int:
    spec = SyntheticSpec(classes=args.classes, per_class=args.per_class, informative_views=args.informative,
                         noise_views=args.noise, latent_dim=args.latent_dim, noise_scale=args.noise_scale,
                         view_dim=args.view_dim, seed=args.seed)
    try:
        data = generate_synthetic(spec)
    except ValueError as exc:
        raise ConfigError([ConfigIssue("synth_invalid", str(exc))]) from exc
    save_dataset(data, args.out)
    summary(command="synth", status="ok", views=data.n_views, samples=data.n_samples)
    return EXIT_OK


# ======================
# 🧭 Parser
# ======================
def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="kmsa", description="Kernelized multiview subspace analysis")
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    sub.required = True
    recipes = ["pca", "lpp", "lda", "spp"]

    p = sub.add_parser("fit", help="fit a model on a dataset directory")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--recipe", choices=recipes)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("transform", help="embed new samples with a fitted model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("eval", help="repeated random-split evaluation")
    p.add_argument("--task", required=True, choices=sorted(TASKS))
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--config")
    p.add_argument("--recipe", choices=recipes)
    p.add_argument("--repeats", type=int, default=20)
    p.add_argument("--train-frac", type=float, default=0.5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--top-n", type=int, nargs="+", default=list(DEFAULT_TOP_N))
    p.add_argument("--fixed-weights", action="store_true", help="keep every view weight at 1/m")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("synth", help="write a synthetic multiview dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--classes", type=int, default=3)
    p.add_argument("--per-class", type=int, default=20)
    p.add_argument("--informative", type=int, default=3)
    p.add_argument("--noise", type=int, default=1)
    p.add_argument("--latent-dim", type=int, default=2)
    p.add_argument("--noise-scale", type=float, default=0.5)
    p.add_argument("--view-dim", type=int, default=10)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(level=settings.LOG_LEVEL, format="%(levelname)s %(message)s", stream=sys.stderr)
    try:
        args = build_parser().parse_args(argv)
        logger.info("[CLI] comando %s", args.command)
        return args.func(args)
    except UsageError as e:
        print(f"⚠️ [CLI] {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (ConfigError, DimensionError, GraphError, EvalError, IoError, FormatError, VersionError,
            NumericError, WeightDomainError) as e:
        print(f"⚠️ [CLI] Errore: {e}", file=sys.stderr)
        return exit_code_for(e)


if __name__ == "__main__":
    sys.exit(main())
