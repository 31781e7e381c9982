"""Mini-batch training loop with standardization, balanced class weights,
early stopping on validation loss and deterministic seeding.

``train`` consumes (features, labels) array pairs; features are 2-D for the
MLP and (batch, seq_length, dim) for recurrent models. The checkpoint
returned corresponds to the epoch with the lowest validation loss.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..features import CLASS_NAMES
from . import checkpoint as ckpt_mod
from .losses import balanced_class_weights, softmax_cross_entropy
from .model import Classifier, ModelSpec
from .optim import Adam


class TrainingDivergedError(RuntimeError):
    def __init__(self, epoch: int):
        super().__init__(f"training diverged (non-finite loss) at epoch {epoch}")
        self.epoch = epoch


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    batch_size: int = 64
    epochs: int = 60
    seed: int = 0
    class_weighting: str = "balanced"  # or "none"
    standardize_features: bool = True
    early_stop_patience: Optional[int] = 10

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.class_weighting not in ("balanced", "none"):
            raise ValueError("class_weighting must be 'balanced' or 'none'")


def fit_standardizer(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-dimension mean/std over the last axis; zero stds become 1."""
    flat = x.reshape(-1, x.shape[-1])
    mean = flat.mean(axis=0)
    std = flat.std(axis=0)
    std = np.where(std == 0.0, 1.0, std)
    return mean, std


def _dataset(ds) -> tuple[np.ndarray, np.ndarray]:
    x, y = ds
    return np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.int64)


def _evaluate(clf: Classifier, x, y, weights) -> tuple[float, float]:
    logits = clf.forward(x, train=False)
    loss, _ = softmax_cross_entropy(logits, y, weights)
    loss += clf.penalty()
    acc = float((logits.argmax(axis=1) == y).mean())
    return loss, acc


def train(
    spec: ModelSpec,
    train_ds,
    val_ds,
    cfg: TrainConfig,
    meta: dict | None = None,
) -> tuple[ckpt_mod.Checkpoint, list[dict]]:
    """Train a model and return (best-validation checkpoint, history).

    History rows carry epoch, train/val loss and accuracy; losses include
    the L2 penalty and use the training class weights. Raises
    TrainingDivergedError as soon as a non-finite loss appears.
    """
    x_train, y_train = _dataset(train_ds)
    x_val, y_val = _dataset(val_ds)
    if x_train.shape[0] == 0 or x_val.shape[0] == 0:
        raise ValueError("train and validation sets must be non-empty")

    if cfg.standardize_features:
        mean, std = fit_standardizer(x_train)
        x_train = (x_train - mean) / std
        x_val = (x_val - mean) / std
    else:
        mean = std = None

    counts = np.bincount(y_train, minlength=spec.num_classes)
    if cfg.class_weighting == "balanced":
        weights = balanced_class_weights(counts)
    else:
        weights = np.ones(spec.num_classes)

    rng = np.random.default_rng(cfg.seed)
    clf = Classifier(spec, rng)
    optimizer = Adam(clf.params(), lr=cfg.learning_rate)

    n = x_train.shape[0]
    history: list[dict] = []
    best_val = np.inf
    best_state: dict | None = None
    best_epoch = -1
    since_best = 0

    for epoch in range(cfg.epochs):
        order = rng.permutation(n)
        # Batch-norm cannot normalise a single row; when the final batch
        # would be a singleton it is withheld for this epoch (the shuffle
        # rotates which row sits there).
        if clf.has_batchnorm and n % cfg.batch_size == 1 and n > 1:
            order = order[:-1]
        for start in range(0, order.size, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            loss = clf.loss_and_grads(
                x_train[idx], y_train[idx], weights, train=True, rng=rng
            )
            if not np.isfinite(loss):
                raise TrainingDivergedError(epoch)
            optimizer.step(clf.grads())

        train_loss, train_acc = _evaluate(clf, x_train, y_train, weights)
        val_loss, val_acc = _evaluate(clf, x_val, y_val, weights)
        if not (np.isfinite(train_loss) and np.isfinite(val_loss)):
            raise TrainingDivergedError(epoch)
        history.append(
            {
                "epoch": epoch,
                "train_loss": train_loss,
                "train_acc": train_acc,
                "val_loss": val_loss,
                "val_acc": val_acc,
            }
        )
        if val_loss < best_val:
            best_val = val_loss
            best_epoch = epoch
            since_best = 0
            best_state = {
                "params": {k: v.copy() for k, v in clf.params().items()},
                "bn": {
                    bn.name: {"mean": bn.running_mean.copy(), "var": bn.running_var.copy()}
                    for bn in clf.batchnorm_layers()
                },
                "val_acc": val_acc,
                "val_loss": val_loss,
            }
        else:
            since_best += 1
            if cfg.early_stop_patience is not None and since_best >= cfg.early_stop_patience:
                break

    clf.set_params(best_state["params"])
    for bn in clf.batchnorm_layers():
        bn.set_running_stats(best_state["bn"][bn.name]["mean"], best_state["bn"][bn.name]["var"])

    full_meta = {
        "best_epoch": best_epoch,
        "val_loss": best_state["val_loss"],
        "val_acc": best_state["val_acc"],
        "epochs_run": len(history),
    }
    full_meta.update(meta or {})
    ckpt = ckpt_mod.from_classifier(
        clf,
        feature_mean=mean,
        feature_std=std,
        label_order=list(CLASS_NAMES),
        meta=full_meta,
    )
    return ckpt, history


def history_to_csv(history: list[dict], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["epoch", "train_loss", "train_acc", "val_loss", "val_acc"])
        for row in history:
            writer.writerow(
                [
                    row["epoch"],
                    repr(row["train_loss"]),
                    repr(row["train_acc"]),
                    repr(row["val_loss"]),
                    repr(row["val_acc"]),
                ]
            )
