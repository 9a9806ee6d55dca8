"""Command-line front end: train, eval, transform, sweep, synth.

Runs are driven by a flat key=value config file plus flag overrides, and are
deterministic given (config, seed). Data goes to files under the output
directory; diagnostics go to stderr. The only environment variable read is
``TWINAE_LOG_LEVEL``.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import os
import sys
from dataclasses import dataclass, fields, replace

import numpy as np

from .autoencoder import ae_encode, train_ae
from .data import Dataset, load_csv, minmax_apply, minmax_fit, stratified_split
from .metrics import (ConfusionMatrix, accuracy, f_score, far, mdr,
                      representation_quality)
from .nn import TrainingError, mlp_forward
from .serialize import load_model, save_model
from .tae import TaeModel, TrainConfig, infer_representation, train_tae
from .tree import fit_tree, tree_predict

log = logging.getLogger("twinae")

REPRESENTATIONS = ("raw", "ae-latent", "tae-latent", "tae-reconstruction")


@dataclass
class RunConfig:
    """Flat run configuration; every key can appear in the config file."""

    train_csv: str | None = None
    test_csv: str | None = None
    label_column: str | int = "label"
    header: bool = True
    representation: str = "tae-reconstruction"
    normal_class: str | None = None
    learning_rate: float = 1e-4
    epochs: int = 5000
    batch_size: int = 100
    early_stop_window: int = 10
    early_stop_threshold: float = 1.0
    validation_fraction: float = 0.3
    scale: float = 0.5
    d_z: int | None = None
    hidden: int | None = None
    activation: str = "relu"
    seed: int = 0
    max_depth_grid: tuple = (5, 10, 20, 50, 100)
    min_leaf: int = 1
    s_grid: tuple = (0.0001, 0.01, 0.1, 0.2, 0.5, 1.0, 5.0, 10.0, 20.0, 40.0, 80.0)
    d_z_grid: tuple | None = None
    out_dir: str = "runs/out"

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            learning_rate=self.learning_rate,
            epochs=self.epochs,
            batch_size=self.batch_size,
            early_stop_window=self.early_stop_window,
            early_stop_threshold=self.early_stop_threshold,
            validation_fraction=self.validation_fraction,
            scale=self.scale,
            d_z=self.d_z,
            hidden=self.hidden,
            activation=self.activation,
            seed=self.seed,
        )


def _to_bool(text: str) -> bool:
    lowered = text.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _to_int_or_none(text: str):
    return None if text.strip().lower() in ("", "none") else int(text)


def _to_label_column(text: str):
    text = text.strip()
    try:
        return int(text)
    except ValueError:
        return text


_PARSERS = {
    "train_csv": str,
    "test_csv": str,
    "label_column": _to_label_column,
    "header": _to_bool,
    "representation": str,
    "normal_class": str,
    "learning_rate": float,
    "epochs": int,
    "batch_size": int,
    "early_stop_window": int,
    "early_stop_threshold": float,
    "validation_fraction": float,
    "scale": float,
    "d_z": _to_int_or_none,
    "hidden": _to_int_or_none,
    "activation": str,
    "seed": int,
    "max_depth_grid": lambda t: tuple(int(x) for x in t.split(",") if x.strip()),
    "min_leaf": int,
    "s_grid": lambda t: tuple(float(x) for x in t.split(",") if x.strip()),
    "d_z_grid": lambda t: tuple(int(x) for x in t.split(",") if x.strip()),
    "out_dir": str,
}


def parse_config_file(path) -> dict:
    """Read a flat ``key = value`` file; ``#`` starts a comment line."""
    values = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            key = key.strip()
            if key not in _PARSERS:
                raise ValueError(f"{path}:{lineno}: unknown config key {key!r}")
            try:
                values[key] = _PARSERS[key](value.strip())
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: bad value for {key}: {exc}") from None
    return values


def build_run_config(args) -> RunConfig:
    values = {}
    if args.config:
        values.update(parse_config_file(args.config))
    for item in args.set or []:
        if "=" not in item:
            raise ValueError(f"--set expects key=value, got {item!r}")
        key, _, value = item.partition("=")
        key = key.strip()
        if key not in _PARSERS:
            raise ValueError(f"unknown config key {key!r}")
        values[key] = _PARSERS[key](value.strip())
    if getattr(args, "seed", None) is not None:
        values["seed"] = args.seed
    if getattr(args, "out", None) is not None:
        values["out_dir"] = args.out
    if getattr(args, "representation", None) is not None:
        values["representation"] = args.representation
    config = RunConfig(**values)
    if config.representation not in REPRESENTATIONS:
        raise ValueError(
            f"representation must be one of {REPRESENTATIONS}, got {config.representation!r}")
    return config


def _require_file(path, what: str):
    if path is None:
        raise ValueError(f"{what} is not set in the config")
    if not os.path.exists(path):
        raise ValueError(f"{what} does not exist: {path}")
    return path


def _load_normalized_train(config: RunConfig):
    train = load_csv(_require_file(config.train_csv, "train_csv"),
                     config.label_column, header=config.header)
    stats = minmax_fit(train)
    return minmax_apply(stats, train), stats


def _align_labels(data: Dataset, class_names) -> Dataset:
    """Remap a dataset's labels onto a model's class catalogue by name."""
    if not class_names or tuple(data.class_names) == tuple(class_names):
        return replace(data, class_names=tuple(class_names) or data.class_names)
    index = {name: i for i, name in enumerate(class_names)}
    try:
        mapping = np.array([index[name] for name in data.class_names])
    except KeyError as exc:
        raise ValueError(f"dataset class {exc.args[0]!r} is not in the model catalogue "
                         f"{tuple(class_names)}") from None
    return Dataset(X=data.X, labels=mapping[data.labels],
                   class_names=tuple(class_names), norm_stats=data.norm_stats)


def representation_matrix(kind: str, model, X) -> np.ndarray:
    if kind == "raw":
        return np.asarray(X, dtype=np.float64)
    if model is None:
        raise ValueError(f"representation {kind!r} needs a trained model")
    if kind == "tae-reconstruction":
        return infer_representation(model, X)
    if kind == "tae-latent":
        return mlp_forward(model.encoder, X).output
    if kind == "ae-latent":
        return ae_encode(model, X)
    raise ValueError(f"unknown representation {kind!r}")


def _write_csv(path, header, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def cmd_train(config: RunConfig) -> dict:
    """Train the selected model; writes model.json and loss_history.csv."""
    if config.representation == "raw":
        raise ValueError("representation 'raw' has nothing to train")
    data, stats = _load_normalized_train(config)
    os.makedirs(config.out_dir, exist_ok=True)
    model_path = os.path.join(config.out_dir, "model.json")
    history_path = os.path.join(config.out_dir, "loss_history.csv")

    if config.representation == "ae-latent":
        model, history = train_ae(data, config.train_config())
        save_model(model, model_path, norm_stats=stats)
        _write_csv(history_path, ["epoch", "loss"],
                   [(i + 1, loss) for i, loss in enumerate(history)])
        epochs_run = len(history)
    else:
        model, history = train_tae(data, config.train_config())
        save_model(model, model_path, norm_stats=stats)
        rows = [
            (i + 1, b.recon_x, b.recon_z_from_xhat, b.recon_z_from_x, b.shrink,
             b.total, history.val_total[i])
            for i, b in enumerate(history.epochs)
        ]
        _write_csv(history_path,
                   ["epoch", "recon_x", "recon_z_from_xhat", "recon_z_from_x",
                    "shrink", "total", "val_total"],
                   rows)
        epochs_run = len(history.epochs)
    log.info("trained %s for %d epochs -> %s", config.representation, epochs_run, model_path)
    return {"model": model_path, "history": history_path, "epochs_run": epochs_run}


def _select_tree(train_repr, train_labels, config: RunConfig):
    """Grid-search max_depth by stratified validation accuracy, then refit."""
    if not config.max_depth_grid:
        raise ValueError("max_depth_grid is empty")
    pool = Dataset(X=np.asarray(train_repr, dtype=np.float64),
                   labels=np.asarray(train_labels),
                   class_names=tuple(str(i) for i in range(int(np.max(train_labels)) + 1)))
    fit_part, val_part = stratified_split(pool, config.validation_fraction, config.seed)
    best_depth, best_acc = None, -1.0
    for depth in sorted(config.max_depth_grid):
        tree = fit_tree(fit_part.X, fit_part.labels, max_depth=depth, min_leaf=config.min_leaf)
        preds = tree_predict(tree, val_part.X)
        acc = float(np.mean(preds == val_part.labels))
        if acc > best_acc:
            best_depth, best_acc = depth, acc
    final = fit_tree(pool.X, pool.labels, max_depth=best_depth, min_leaf=config.min_leaf)
    return final, best_depth, best_acc


def _resolve_normal_class(config: RunConfig, class_names) -> int:
    if config.normal_class is not None:
        if config.normal_class not in class_names:
            raise ValueError(f"normal_class {config.normal_class!r} not in classes {class_names}")
        return class_names.index(config.normal_class)
    for candidate in ("normal", "Normal", "benign", "Benign"):
        if candidate in class_names:
            return class_names.index(candidate)
    return 0


def evaluate_representation(config: RunConfig, model, train: Dataset, test: Dataset) -> dict:
    """Fit the classifier grid on the chosen representation and score the test set."""
    train_repr = representation_matrix(config.representation, model, train.X)
    test_repr = representation_matrix(config.representation, model, test.X)
    tree, best_depth, val_acc = _select_tree(train_repr, train.labels, config)
    preds = tree_predict(tree, test_repr)
    cm = ConfusionMatrix.from_predictions(test.labels, preds, n_classes=len(test.class_names))
    normal_id = _resolve_normal_class(config, list(test.class_names))
    attack_ids = [c for c in range(len(test.class_names)) if c != normal_id]
    quality_raw = representation_quality(test.X, test.labels)
    quality_repr = representation_quality(test_repr, test.labels)
    ratio = (quality_repr.quality / quality_raw.quality
             if quality_raw.quality > 0 and not quality_repr.degenerate else float("inf"))
    return {
        "schema_version": 1,
        "representation": config.representation,
        "seed": config.seed,
        "classifier": {
            "grid": sorted(config.max_depth_grid),
            "best_max_depth": best_depth,
            "validation_accuracy": val_acc,
        },
        "metrics": {
            "accuracy": accuracy(cm),
            "f_score": f_score(cm, "macro"),
            "far": far(cm, normal_id),
            "mdr": mdr(cm, attack_ids),
        },
        "normal_class": test.class_names[normal_id],
        "confusion": {
            "class_names": list(test.class_names),
            "counts": cm.counts.tolist(),
        },
        "quality": {
            "raw": {"d_between": quality_raw.d_between, "d_within": quality_raw.d_within,
                    "quality": quality_raw.quality},
            "representation": {"d_between": quality_repr.d_between,
                               "d_within": quality_repr.d_within,
                               "quality": quality_repr.quality},
            "ratio": ratio,
        },
    }


def _report_text(report: dict) -> str:
    lines = [
        f"representation      {report['representation']}",
        f"best max_depth      {report['classifier']['best_max_depth']}"
        f" (validation accuracy {report['classifier']['validation_accuracy']:.4f})",
        "",
        "metric      value",
    ]
    for name, value in report["metrics"].items():
        lines.append(f"{name:<10}  {value:.6f}")
    lines.append("")
    lines.append(f"quality raw={report['quality']['raw']['quality']:.4f} "
                 f"repr={report['quality']['representation']['quality']:.4f} "
                 f"ratio={report['quality']['ratio']:.4f}")
    lines.append("")
    names = report["confusion"]["class_names"]
    width = max(len(n) for n in names) + 2
    lines.append("confusion (rows true, cols predicted)")
    lines.append(" " * width + "".join(f"{n:>{width}}" for n in names))
    for name, row in zip(names, report["confusion"]["counts"]):
        lines.append(f"{name:<{width}}" + "".join(f"{c:>{width}}" for c in row))
    return "\n".join(lines) + "\n"


def cmd_eval(config: RunConfig, model_path) -> dict:
    """Evaluate on the test split; writes report.json and report.txt."""
    loaded = None
    if config.representation != "raw":
        loaded = load_model(_require_file(model_path, "model file"))
    train = load_csv(_require_file(config.train_csv, "train_csv"),
                     config.label_column, header=config.header)
    test = load_csv(_require_file(config.test_csv, "test_csv"),
                    config.label_column, header=config.header)
    if loaded is not None and loaded.model.classes:
        train = _align_labels(train, loaded.model.classes)
        test = _align_labels(test, loaded.model.classes)
    else:
        test = _align_labels(test, train.class_names)
    stats = loaded.norm_stats if loaded is not None and loaded.norm_stats is not None \
        else minmax_fit(train)
    train = minmax_apply(stats, train)
    test = minmax_apply(stats, test)
    model = loaded.model if loaded is not None else None
    if model is not None and model.d_x != train.n_features:
        raise ValueError(f"model expects {model.d_x} features but data has {train.n_features}")
    report = evaluate_representation(config, model, train, test)
    os.makedirs(config.out_dir, exist_ok=True)
    json_path = os.path.join(config.out_dir, "report.json")
    with open(json_path, "w", encoding="utf-8") as fh:
        json.dump(report, fh, sort_keys=True, indent=1)
        fh.write("\n")
    text_path = os.path.join(config.out_dir, "report.txt")
    with open(text_path, "w", encoding="utf-8") as fh:
        fh.write(_report_text(report))
    log.info("evaluation report -> %s", json_path)
    return report


def _read_feature_csv(path, header: bool, label_column=None):
    """Features from a CSV that may or may not carry a label column."""
    if label_column is not None:
        ds = load_csv(path, label_column, header=header)
        return ds.X
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if header:
        rows = rows[1:]
    if not rows:
        return np.zeros((0, 0))
    try:
        return np.array([[float(v) for v in row] for row in rows], dtype=np.float64)
    except ValueError as exc:
        raise ValueError(f"{path}: non-numeric feature value ({exc})") from None


def cmd_transform(model_path, input_csv, output_csv, header: bool = True,
                  label_column=None) -> int:
    """Write the model's downstream representation, one row per input row."""
    loaded = load_model(_require_file(model_path, "model file"))
    X = _read_feature_csv(_require_file(input_csv, "input CSV"), header, label_column)
    model = loaded.model
    if X.shape[0] > 0:
        if X.shape[1] != model.d_x:
            raise ValueError(f"model expects {model.d_x} features but input has {X.shape[1]}")
        if loaded.norm_stats is not None:
            span = loaded.norm_stats.feature_max - loaded.norm_stats.feature_min
            safe = np.where(span == 0.0, 1.0, span)
            X = (X - loaded.norm_stats.feature_min) / safe
            X[:, span == 0.0] = 0.0
        rep = (infer_representation(model, X) if isinstance(model, TaeModel)
               else ae_encode(model, X))
    else:
        rep = np.zeros((0, model.d_z))
    _write_csv(output_csv, [f"z{i}" for i in range(model.d_z)],
               [tuple(float(v) for v in row) for row in rep])
    log.info("wrote %d representation rows -> %s", rep.shape[0], output_csv)
    return rep.shape[0]


def cmd_sweep(config: RunConfig) -> list:
    """Train/evaluate over the scale and latent-size grids; writes sweep.csv."""
    if not config.s_grid:
        raise ValueError("s_grid is empty")
    train = load_csv(_require_file(config.train_csv, "train_csv"),
                     config.label_column, header=config.header)
    test = load_csv(_require_file(config.test_csv, "test_csv"),
                    config.label_column, header=config.header)
    test = _align_labels(test, train.class_names)
    stats = minmax_fit(train)
    train = minmax_apply(stats, train)
    test = minmax_apply(stats, test)
    d_z_grid = config.d_z_grid
    if not d_z_grid:
        d_z_grid = (config.train_config().resolve_d_z(train.n_features),)
    rows = []
    eval_config = replace(config, representation="tae-reconstruction")
    for s in sorted(config.s_grid):
        for d_z in sorted(d_z_grid):
            try:
                cell = replace(config, scale=s, d_z=d_z)
                model, _ = train_tae(train, cell.train_config())
                report = evaluate_representation(eval_config, model, train, test)
                rows.append((s, d_z, "ok", report["metrics"]["accuracy"], ""))
            except (ValueError, TrainingError) as exc:
                log.warning("sweep cell S=%s d_z=%s failed: %s", s, d_z, exc)
                rows.append((s, d_z, "error", "", str(exc)))
    os.makedirs(config.out_dir, exist_ok=True)
    path = os.path.join(config.out_dir, "sweep.csv")
    _write_csv(path, ["s", "d_z", "status", "accuracy", "error"], rows)
    log.info("sweep table -> %s", path)
    return rows


def cmd_synth(args) -> str:
    from .data import synth_blobs

    data = synth_blobs(args.classes, args.per_class, args.dims,
                       args.radius, args.sigma, args.seed)
    header = [f"f{i}" for i in range(data.n_features)] + ["label"]
    rows = [tuple(float(v) for v in x) + (data.class_names[y],)
            for x, y in zip(data.X, data.labels)]
    out_dir = os.path.dirname(os.path.abspath(args.output))
    os.makedirs(out_dir, exist_ok=True)
    _write_csv(args.output, header, rows)
    log.info("synthetic dataset (%d rows) -> %s", len(rows), args.output)
    return args.output


def _add_common(parser):
    parser.add_argument("--config", help="flat key=value config file")
    parser.add_argument("--seed", type=int, help="override the run seed")
    parser.add_argument("--out", help="override the output directory")
    parser.add_argument("--representation", choices=REPRESENTATIONS,
                        help="override the representation choice")
    parser.add_argument("--set", action="append", metavar="KEY=VALUE",
                        help="override any config key (repeatable)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="twinae",
        description="Separable-representation learning pipeline for attack detection.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_train = sub.add_parser("train", help="train the selected model")
    _add_common(p_train)

    p_eval = sub.add_parser("eval", help="evaluate a trained model on a test set")
    _add_common(p_eval)
    p_eval.add_argument("--model", help="model file (defaults to <out_dir>/model.json)")

    p_tr = sub.add_parser("transform", help="emit the downstream representation for a CSV")
    p_tr.add_argument("--model", required=True)
    p_tr.add_argument("--input", required=True)
    p_tr.add_argument("--output", required=True)
    p_tr.add_argument("--label-column", default=None,
                      help="drop this label column from the input (name or index)")
    p_tr.add_argument("--no-header", action="store_true",
                      help="input CSV has no header row")

    p_sweep = sub.add_parser("sweep", help="train/evaluate across the S and d_z grids")
    _add_common(p_sweep)

    p_synth = sub.add_parser("synth", help="emit a synthetic overlapping-blobs dataset")
    p_synth.add_argument("--output", required=True)
    p_synth.add_argument("--classes", type=int, default=4)
    p_synth.add_argument("--per-class", type=int, default=400)
    p_synth.add_argument("--dims", type=int, default=6)
    p_synth.add_argument("--radius", type=float, default=1.0)
    p_synth.add_argument("--sigma", type=float, default=1.0)
    p_synth.add_argument("--seed", type=int, default=0)
    return parser


def main(argv=None) -> int:
    logging.basicConfig(
        level=os.environ.get("TWINAE_LOG_LEVEL", "WARNING").upper(),
        stream=sys.stderr, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        if args.command == "synth":
            cmd_synth(args)
            return 0
        if args.command == "transform":
            label_column = (_to_label_column(args.label_column)
                            if args.label_column is not None else None)
            cmd_transform(args.model, args.input, args.output,
                          header=not args.no_header, label_column=label_column)
            return 0
        config = build_run_config(args)
        if args.command == "train":
            cmd_train(config)
        elif args.command == "eval":
            model_path = args.model or os.path.join(config.out_dir, "model.json")
            cmd_eval(config, model_path)
        elif args.command == "sweep":
            cmd_sweep(config)
        return 0
    except (ValueError, OSError, TrainingError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
