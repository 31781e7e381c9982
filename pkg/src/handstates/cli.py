"""Command-line orchestration for the full pipeline and the experiment ladder.

Subcommands: ``synth`` (scripted corpus), ``extract`` (features CSV),
``train`` / ``eval`` (single model + report), ``search`` (random
hyperparameter search), ``xval`` (stratified k-fold) and ``ladder`` (the
eight-model comparison). Every subcommand is reproducible from its inputs,
flags and seed, and records an atomic run manifest with input/output hashes.

Flag precedence: explicit flags > ``--config key=value`` file > built-in
defaults.
"""

from __future__ import annotations

import argparse
import collections
import csv
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, manifest, metrics, synth
from .features import (
    CLASS_NAMES,
    NUM_CLASSES,
    LabeledDataset,
    PipelineConfig,
    build_dataset,
    load_dataset_csv,
    save_dataset_csv,
    sequence_dataset,
    stratified_split_indices,
)
from .nn import (
    ModelSpec,
    SearchSpace,
    TrainConfig,
    kfold_validate,
    random_search,
    train,
)
from .nn import checkpoint as ckpt_mod
from .nn.train import history_to_csv

GRABBING = 1  # class index reported as the hard transitional state


# ---------------------------------------------------------------------------
# small utilities


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return value


def _fraction(text: str) -> float:
    value = float(text)
    if not 0.0 < value < 1.0:
        raise argparse.ArgumentTypeError("must lie strictly between 0 and 1")
    return value


def _int_list(text: str) -> tuple[int, ...]:
    try:
        return tuple(int(part) for part in text.split(",") if part != "")
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated int list: {text!r}")


def _canvas(text: str) -> tuple[int, int]:
    try:
        w, h = (int(p) for p in text.lower().split("x"))
        return w, h
    except ValueError:
        raise argparse.ArgumentTypeError(f"canvas must look like 128x96, got {text!r}")


def sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            digest.update(chunk)
    return digest.hexdigest()


def sha256_tree(root: Path) -> str:
    """Combined digest of every file under ``root`` (sorted relative paths)."""
    digest = hashlib.sha256()
    for path in sorted(p for p in root.rglob("*") if p.is_file()):
        digest.update(str(path.relative_to(root)).encode())
        digest.update(sha256_file(path).encode())
    return digest.hexdigest()


def atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(f".{path.name}.tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def write_run_manifest(
    out_dir: Path,
    command: str,
    args: argparse.Namespace,
    inputs: dict[str, str],
    outputs: list[Path],
    started: float,
) -> None:
    snapshot = {
        k: (list(v) if isinstance(v, tuple) else v)
        for k, v in sorted(vars(args).items())
        if k != "func"
    }
    doc = {
        "command": command,
        "config": snapshot,
        "inputs": inputs,
        "outputs": {str(p): f"sha256:{sha256_file(p)}" for p in outputs},
        "seed": getattr(args, "seed", None),
        "wall_time_s": round(time.time() - started, 3),
        "version": __version__,
    }
    atomic_write_text(out_dir / "run_manifest.json", json.dumps(doc, indent=2, sort_keys=True) + "\n")


def parse_config_file(path: str) -> dict[str, str]:
    """key=value lines; '#' starts a comment; keys may use '-' or '_'."""
    overrides: dict[str, str] = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
        key, value = line.split("=", 1)
        overrides[key.strip().replace("-", "_")] = value.strip()
    return overrides


# ---------------------------------------------------------------------------
# shared dataset plumbing


def _load_features(path: str) -> LabeledDataset:
    ds = load_dataset_csv(path)
    if len(ds) == 0:
        raise ValueError(f"{path}: feature CSV contains no rows")
    return ds


def _model_arrays(ds: LabeledDataset, spec: ModelSpec) -> tuple[np.ndarray, np.ndarray]:
    if spec.kind == "mlp":
        return ds.features, ds.labels
    return sequence_dataset(ds, spec.seq_length)


def _split_for_training(
    x: np.ndarray,
    y: np.ndarray,
    test_fraction: float,
    val_fraction: float,
    seed: int,
):
    """(train, val, test) arrays via nested stratified splits."""
    train_idx, test_idx = stratified_split_indices(y, test_fraction, seed)
    dataset_classes = set(np.unique(y).tolist())
    train_classes = set(np.unique(y[train_idx]).tolist())
    missing = dataset_classes - train_classes
    if missing:
        names = ", ".join(CLASS_NAMES[c] for c in sorted(missing))
        raise ValueError(f"class absent from training split: {names}")
    inner_train, inner_val = stratified_split_indices(y[train_idx], val_fraction, seed + 1)
    tr = train_idx[inner_train]
    va = train_idx[inner_val]
    return (x[tr], y[tr]), (x[va], y[va]), (x[test_idx], y[test_idx])


def _spec_from_args(args: argparse.Namespace) -> ModelSpec:
    batchnorm = {"auto": None, "on": True, "off": False}[args.batchnorm]
    return ModelSpec(
        kind=args.arch,
        hidden=tuple(args.hidden),
        rnn_units=args.units,
        rnn_layers=args.layers,
        seq_length=args.seq_length if args.arch != "mlp" else 1,
        dropout_p=args.dropout,
        l2_lambda=args.l2,
        use_batchnorm=batchnorm,
    )


def _train_cfg_from_args(args: argparse.Namespace, seed: int | None = None) -> TrainConfig:
    return TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch_size,
        epochs=args.epochs,
        seed=args.seed if seed is None else seed,
        class_weighting=args.class_weight,
        standardize_features=not args.no_standardize,
        early_stop_patience=args.patience if args.patience > 0 else None,
    )


def _evaluate_checkpoint(ckpt, x_test, y_test):
    _, preds = ckpt_mod.predict(ckpt, x_test)
    cm = metrics.confusion_matrix(y_test, preds, NUM_CLASSES)
    return cm, metrics.classification_report(cm)


def _write_eval_files(out: Path, cm, report) -> list[Path]:
    metrics.write_report_files(report, list(CLASS_NAMES), out)
    metrics.write_confusion_csv(cm, list(CLASS_NAMES), out / "confusion.csv")
    return [out / "report.txt", out / "report.json", out / "confusion.csv"]


# ---------------------------------------------------------------------------
# subcommands


def cmd_synth(args: argparse.Namespace) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    durations = synth.PhaseDurations(
        idle=args.idle,
        approach=args.approach,
        grab=args.grab,
        hold=args.hold,
        release=args.release,
        retreat=args.retreat,
    )
    cfg = synth.ScenarioConfig(
        canvas=args.canvas,
        object_rect=tuple(args.object_rect),
        hand_radius=args.hand_radius,
        durations=durations,
        approach_speed=args.approach_speed,
        jitter_sigma=args.jitter,
        noise_flip_prob=args.mask_noise,
        contact_epsilon=args.epsilon,
    )
    episodes = synth.generate_corpus(cfg, args.episodes, args.seed)
    manifest_paths = [
        manifest.write_episode(episode, out / episode.episode_id)
        for episode in episodes
    ]

    pipeline = PipelineConfig(contact_epsilon=args.epsilon)
    dataset = build_dataset(episodes, pipeline)
    histogram = collections.Counter(int(label) for label in dataset.labels)
    print(f"wrote {len(episodes)} episodes to {out}")
    print("window-label histogram:")
    for c, name in enumerate(CLASS_NAMES):
        print(f"  {name}: {histogram.get(c, 0)}")

    write_run_manifest(out, "synth", args, inputs={}, outputs=manifest_paths, started=started)
    return 0


def cmd_extract(args: argparse.Namespace) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    cfg = PipelineConfig(
        sharpness_threshold=args.tau_sharp,
        diff_threshold=args.tau_diff,
        window_length=args.window,
        stride=args.stride,
        contact_epsilon=args.epsilon,
    )
    episodes = manifest.read_corpus(args.manifest_dir)
    dataset = build_dataset(episodes, cfg)
    features_path = out / "features.csv"
    save_dataset_csv(dataset, features_path)
    print(f"extracted {len(dataset)} feature rows -> {features_path}")

    inputs = {args.manifest_dir: f"sha256:{sha256_tree(Path(args.manifest_dir))}"}
    write_run_manifest(out, "extract", args, inputs, [features_path], started)
    return 0


def _run_training(
    args: argparse.Namespace,
    spec: ModelSpec,
    cfg: TrainConfig,
    ds: LabeledDataset,
    out: Path,
) -> tuple[Path, list[Path], dict]:
    """Split, train, evaluate on the held-out test set, write artifacts."""
    x, y = _model_arrays(ds, spec)
    train_ds, val_ds, test_ds = _split_for_training(
        x, y, args.test_fraction, args.val_fraction, args.seed
    )
    meta = {
        "split": {
            "test_fraction": args.test_fraction,
            "val_fraction": args.val_fraction,
            "seed": args.seed,
        }
    }
    ckpt, history = train(spec, train_ds, val_ds, cfg, meta=meta)
    cm, report = _evaluate_checkpoint(ckpt, test_ds[0], test_ds[1])

    ckpt_path = out / "checkpoint.json"
    ckpt_mod.save(ckpt, ckpt_path)
    history_to_csv(history, out / "history.csv")
    outputs = [ckpt_path, out / "history.csv"]
    outputs += _write_eval_files(out, cm, report)
    summary = {
        "accuracy": report.accuracy,
        "weighted_f1": report.weighted_f1,
        "grabbing_f1": float(report.f1[GRABBING]),
    }
    return ckpt_path, outputs, summary


def cmd_train(args: argparse.Namespace) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load_features(args.features)
    spec = _spec_from_args(args)
    cfg = _train_cfg_from_args(args)
    _, outputs, summary = _run_training(args, spec, cfg, ds, out)
    print((out / "report.txt").read_text())
    print(
        f"test accuracy {summary['accuracy']:.4f}, "
        f"weighted F1 {summary['weighted_f1']:.4f}, "
        f"grabbing F1 {summary['grabbing_f1']:.4f}"
    )
    inputs = {args.features: f"sha256:{sha256_file(Path(args.features))}"}
    write_run_manifest(out, "train", args, inputs, outputs, started)
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ckpt = ckpt_mod.load(args.checkpoint)
    ds = _load_features(args.features)
    x, y = _model_arrays(ds, ckpt.spec)

    split = ckpt.meta.get("split", {})
    test_fraction = args.test_fraction or split.get("test_fraction", 0.2)
    seed = args.seed if args.seed is not None else split.get("seed", 7)
    _, test_idx = stratified_split_indices(y, test_fraction, seed)
    cm, report = _evaluate_checkpoint(ckpt, x[test_idx], y[test_idx])
    outputs = _write_eval_files(out, cm, report)
    print((out / "report.txt").read_text())

    inputs = {
        args.features: f"sha256:{sha256_file(Path(args.features))}",
        args.checkpoint: f"sha256:{sha256_file(Path(args.checkpoint))}",
    }
    write_run_manifest(out, "eval", args, inputs, outputs, started)
    return 0


def _write_trials_csv(path: Path, trials) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["trial", "status", "rnn_units", "rnn_layers", "dropout_p",
             "learning_rate", "batch_size", "val_acc", "val_loss"]
        )
        for t in trials:
            writer.writerow(
                [t.index, t.status, t.spec.rnn_units, t.spec.rnn_layers,
                 repr(t.spec.dropout_p), repr(t.cfg.learning_rate),
                 t.cfg.batch_size, repr(t.val_acc), repr(t.val_loss)]
            )


def cmd_search(args: argparse.Namespace) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load_features(args.features)
    base_spec = ModelSpec(kind="birnn", seq_length=1)
    base_cfg = TrainConfig(
        epochs=args.epochs,
        early_stop_patience=args.patience if args.patience > 0 else None,
    )
    x, y = _model_arrays(ds, base_spec)
    train_ds, val_ds, test_ds = _split_for_training(
        x, y, args.test_fraction, args.val_fraction, args.seed
    )
    winner, trials = random_search(
        SearchSpace(), args.budget, train_ds, val_ds, args.seed, base_spec, base_cfg
    )
    _write_trials_csv(out / "trials.csv", trials)
    ckpt = winner.checkpoint
    ckpt.meta.update(
        {
            "split": {
                "test_fraction": args.test_fraction,
                "val_fraction": args.val_fraction,
                "seed": args.seed,
            },
            "trial_index": winner.index,
        }
    )
    ckpt_path = out / "checkpoint.json"
    ckpt_mod.save(ckpt, ckpt_path)
    cm, report = _evaluate_checkpoint(ckpt, test_ds[0], test_ds[1])
    outputs = [out / "trials.csv", ckpt_path] + _write_eval_files(out, cm, report)
    print(
        f"best trial {winner.index}: units={winner.spec.rnn_units} "
        f"layers={winner.spec.rnn_layers} dropout={winner.spec.dropout_p:.3f} "
        f"lr={winner.cfg.learning_rate:.5f} batch={winner.cfg.batch_size} "
        f"val_acc={winner.val_acc:.4f}"
    )
    print(f"test accuracy {report.accuracy:.4f}")

    inputs = {args.features: f"sha256:{sha256_file(Path(args.features))}"}
    write_run_manifest(out, "search", args, inputs, outputs, started)
    return 0


def cmd_xval(args: argparse.Namespace) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load_features(args.features)
    spec = _spec_from_args(args)
    cfg = _train_cfg_from_args(args)
    x, y = _model_arrays(ds, spec)
    rows, summary = kfold_validate(spec, cfg, x, y, args.k, args.seed, focus_class=GRABBING)

    xval_path = out / "xval.csv"
    with open(xval_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["fold", "accuracy", "weighted_f1", "grabbing_f1"])
        for row in rows:
            writer.writerow(
                [row["fold"], repr(row["accuracy"]), repr(row["weighted_f1"]),
                 repr(row["focus_f1"])]
            )
        writer.writerow(
            ["mean", repr(summary["accuracy_mean"]), repr(summary["weighted_f1_mean"]),
             repr(summary["focus_f1_mean"])]
        )
        writer.writerow(
            ["std", repr(summary["accuracy_std"]), repr(summary["weighted_f1_std"]),
             repr(summary["focus_f1_std"])]
        )
    print(
        f"{args.k}-fold: accuracy {summary['accuracy_mean']:.4f} "
        f"+/- {summary['accuracy_std']:.4f}, "
        f"grabbing F1 {summary['focus_f1_mean']:.4f}"
    )
    inputs = {args.features: f"sha256:{sha256_file(Path(args.features))}"}
    write_run_manifest(out, "xval", args, inputs, [xval_path], started)
    return 0


LADDER_PLAN = (
    # (model number, description, architecture, seq_length, protocol)
    (1, "plain MLP", "mlp", None, "holdout"),
    (2, "regularized MLP", "mlp", None, "holdout"),
    (3, "regularized MLP, 5-fold", "mlp", None, "kfold"),
    (4, "unidirectional LSTM", "lstm", 10, "holdout"),
    (5, "bidirectional LSTM", "birnn", 5, "holdout"),
    (6, "bidirectional LSTM, 5-fold", "birnn", 5, "kfold"),
    (7, "static-encoder bidirectional LSTM", "birnn", 1, "holdout"),
    (8, "searched static-encoder (champion)", "birnn", 1, "search"),
)


def _ladder_spec(arch: str, seq_length, regularized: bool = True) -> ModelSpec:
    if arch == "mlp":
        if regularized:
            return ModelSpec(kind="mlp")
        return ModelSpec(kind="mlp", dropout_p=0.0, l2_lambda=0.0, use_batchnorm=False)
    return ModelSpec(kind=arch, seq_length=seq_length)


def cmd_ladder(args: argparse.Namespace) -> int:
    started = time.time()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    ds = _load_features(args.features)

    rows: list[dict] = []
    failures: list[str] = []
    for number, description, arch, seq_length, protocol in LADDER_PLAN:
        model_out = out / f"model_{number}"
        model_out.mkdir(parents=True, exist_ok=True)
        run_seed = args.seed + 10 * number
        t0 = time.time()
        row = {
            "model": number,
            "description": description,
            "architecture": arch,
            "seq_len": seq_length if seq_length is not None else "n/a",
        }
        try:
            regularized = not (number == 1)
            spec = _ladder_spec(arch, seq_length, regularized=regularized)
            weighting = "none" if number == 1 else "balanced"
            cfg = TrainConfig(
                epochs=args.epochs,
                seed=run_seed,
                class_weighting=weighting,
                early_stop_patience=args.patience if args.patience > 0 else None,
            )
            if protocol == "holdout":
                model_args = argparse.Namespace(
                    test_fraction=args.test_fraction,
                    val_fraction=args.val_fraction,
                    seed=args.seed,
                )
                _, _, summary = _run_training(model_args, spec, cfg, ds, model_out)
            elif protocol == "kfold":
                x, y = _model_arrays(ds, spec)
                fold_rows, agg = kfold_validate(
                    spec, cfg, x, y, 5, args.seed, focus_class=GRABBING
                )
                summary = {
                    "accuracy": agg["accuracy_mean"],
                    "weighted_f1": agg["weighted_f1_mean"],
                    "grabbing_f1": agg["focus_f1_mean"],
                }
            else:  # search
                search_args = argparse.Namespace(
                    features=args.features,
                    out=str(model_out),
                    budget=args.budget,
                    seed=args.seed,
                    epochs=args.epochs,
                    patience=args.patience,
                    test_fraction=args.test_fraction,
                    val_fraction=args.val_fraction,
                    config=None,
                )
                cmd_search(search_args)
                with open(model_out / "report.json") as fh:
                    rep = json.load(fh)
                summary = {
                    "accuracy": rep["accuracy"],
                    "weighted_f1": rep["weighted_avg"]["f1"],
                    "grabbing_f1": rep["classes"]["grabbing"]["f1"],
                }
            row.update(
                accuracy=f"{summary['accuracy']:.6f}",
                weighted_f1=f"{summary['weighted_f1']:.6f}",
                grabbing_f1=f"{summary['grabbing_f1']:.6f}",
            )
            print(
                f"model {number} ({description}): acc={summary['accuracy']:.4f} "
                f"wF1={summary['weighted_f1']:.4f} grabF1={summary['grabbing_f1']:.4f} "
                f"[{time.time() - t0:.1f}s]"
            )
        except Exception as exc:  # summary still written, with markers
            row.update(accuracy="failed", weighted_f1="failed", grabbing_f1="failed")
            failures.append(f"model {number}: {exc}")
            print(f"model {number} ({description}): FAILED ({exc})", file=sys.stderr)
        rows.append(row)

    summary_path = out / "ladder_summary.csv"
    with open(summary_path, "w", newline="") as fh:
        writer = csv.DictWriter(
            fh,
            fieldnames=[
                "model", "description", "architecture", "seq_len",
                "accuracy", "weighted_f1", "grabbing_f1",
            ],
        )
        writer.writeheader()
        writer.writerows(rows)
    print(f"ladder summary -> {summary_path}")

    inputs = {args.features: f"sha256:{sha256_file(Path(args.features))}"}
    write_run_manifest(out, "ladder", args, inputs, [summary_path], started)
    if failures:
        print("; ".join(failures), file=sys.stderr)
        return 1
    return 0


# ---------------------------------------------------------------------------
# parser assembly


def _add_common(parser: argparse.ArgumentParser, default_seed: int = 7) -> None:
    parser.add_argument("--seed", type=int, default=default_seed, help="run seed")
    parser.add_argument("--config", help="key=value config file (flags override it)")
    parser.add_argument("--out", required=True, help="output directory")


def _add_model_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--arch", choices=("mlp", "birnn", "lstm"), default="birnn")
    parser.add_argument("--hidden", type=_int_list, default=(128, 64, 32),
                        help="MLP hidden widths, e.g. 128,64,32")
    parser.add_argument("--units", type=_positive_int, default=128)
    parser.add_argument("--layers", type=_positive_int, default=1)
    parser.add_argument("--seq-length", type=_positive_int, default=1)
    parser.add_argument("--dropout", type=float, default=0.3)
    parser.add_argument("--l2", type=float, default=1e-4)
    parser.add_argument("--batchnorm", choices=("auto", "on", "off"), default="auto",
                        help="auto = on for MLP, off for recurrent models")


def _add_train_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--lr", type=float, default=1e-3)
    parser.add_argument("--batch-size", type=_positive_int, default=64)
    parser.add_argument("--epochs", type=_positive_int, default=60)
    parser.add_argument("--patience", type=int, default=10,
                        help="early-stop patience on validation loss; 0 disables")
    parser.add_argument("--class-weight", choices=("balanced", "none"), default="balanced")
    parser.add_argument("--no-standardize", action="store_true",
                        help="skip z-score feature standardization")
    parser.add_argument("--test-fraction", type=_fraction, default=0.2)
    parser.add_argument("--val-fraction", type=_fraction, default=0.15)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="handstates",
        description="Hand-object interaction state pipeline and model ladder",
    )
    parser.add_argument("--version", action="version", version=f"handstates {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    p = sub.add_parser("synth", help="generate a scripted synthetic corpus")
    _add_common(p)
    p.add_argument("--episodes", type=_positive_int, default=20)
    p.add_argument("--canvas", type=_canvas, default=(128, 96))
    p.add_argument("--object-rect", type=_int_list, default=(86, 40, 22, 22),
                   help="x0,y0,width,height")
    p.add_argument("--hand-radius", type=_positive_int, default=7)
    p.add_argument("--approach-speed", type=float, default=3.0)
    p.add_argument("--jitter", type=float, default=0.3)
    p.add_argument("--mask-noise", type=float, default=0.003)
    p.add_argument("--epsilon", type=float, default=10.0)
    for phase, frames in (("idle", 12), ("approach", 16), ("grab", 4),
                          ("hold", 45), ("release", 8), ("retreat", 12)):
        p.add_argument(f"--{phase}", type=int, default=frames,
                       help=f"{phase} phase frames")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("extract", help="extract feature vectors from manifests")
    _add_common(p)
    p.add_argument("--manifest-dir", required=True)
    p.add_argument("--tau-sharp", type=float, default=10.0)
    p.add_argument("--tau-diff", type=float, default=1.0)
    p.add_argument("--window", type=_positive_int, default=10)
    p.add_argument("--stride", type=_positive_int, default=1)
    p.add_argument("--epsilon", type=float, default=10.0)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", help="train one model and report on the test split")
    _add_common(p)
    p.add_argument("--features", required=True)
    _add_model_flags(p)
    _add_train_flags(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on the held-out split")
    _add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--test-fraction", type=_fraction, default=None)
    p.set_defaults(func=cmd_eval, seed=None)

    p = sub.add_parser("search", help="random hyperparameter search (static encoder)")
    _add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--budget", type=_positive_int, default=8)
    p.add_argument("--epochs", type=_positive_int, default=60)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--test-fraction", type=_fraction, default=0.2)
    p.add_argument("--val-fraction", type=_fraction, default=0.15)
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("xval", help="stratified k-fold validation of one model")
    _add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--k", type=_positive_int, default=5)
    _add_model_flags(p)
    _add_train_flags(p)
    p.set_defaults(func=cmd_xval)

    p = sub.add_parser("ladder", help="run the eight-model comparison ladder")
    _add_common(p)
    p.add_argument("--features", required=True)
    p.add_argument("--budget", type=_positive_int, default=6,
                   help="search budget for the final (searched) model")
    p.add_argument("--epochs", type=_positive_int, default=60)
    p.add_argument("--patience", type=int, default=10)
    p.add_argument("--test-fraction", type=_fraction, default=0.2)
    p.add_argument("--val-fraction", type=_fraction, default=0.15)
    p.set_defaults(func=cmd_ladder)

    return parser


def _apply_config_overrides(parser, argv: list[str]) -> None:
    bootstrap = argparse.ArgumentParser(add_help=False)
    bootstrap.add_argument("--config")
    known, _ = bootstrap.parse_known_args(argv)
    if not known.config:
        return
    overrides = parse_config_file(known.config)
    sub_actions = [a for a in parser._actions if isinstance(a, argparse._SubParsersAction)]
    command = next((a for a in argv if a and not a.startswith("-")), None)
    if not sub_actions or command not in sub_actions[0].choices:
        return
    sub = sub_actions[0].choices[command]
    known_dests = {a.dest: a for a in sub._actions}
    resolved = {}
    for key, raw in overrides.items():
        if key not in known_dests:
            raise ValueError(f"config key {key!r} is not a flag of {command!r}")
        action = known_dests[key]
        if action.type is not None:
            resolved[key] = action.type(raw)
        elif isinstance(action.const, bool) or isinstance(action.default, bool):
            resolved[key] = raw.lower() in ("1", "true", "yes", "on")
        else:
            resolved[key] = raw
    sub.set_defaults(**resolved)


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        _apply_config_overrides(parser, argv)
    except (OSError, ValueError, argparse.ArgumentTypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
