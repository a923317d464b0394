"""The training loop: epochs of shuffled, optionally augmented
mini-batches driving Adam, with validation after every epoch and a
best-weights checkpoint kept at the highest validation accuracy seen
(strict improvement; ties keep the earlier epoch).
"""

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from rndcnn.augment import AugmentConfig
from rndcnn.checkpoint import Checkpoint, save_checkpoint
from rndcnn.data import ArrayDataset, batch_iter
from rndcnn.errors import ConfigError, NumericError
from rndcnn.initializers import Initializer, xavier
from rndcnn.losses import ClassWeights, compute_class_weights, unit_class_weights, weighted_cce
from rndcnn.model import Model
from rndcnn.optim import Adam
from rndcnn.rng import STREAM_AUGMENT, STREAM_SHUFFLE, Rng

log = logging.getLogger(__name__)


@dataclass
class TrainConfig:
    epochs: int = 100
    batch_size: int = 32
    seed: int = 0
    learning_rate: float = 1e-4
    initializer: Initializer = field(default_factory=xavier)
    augment: bool = True
    class_weighting: bool = True
    beta1: float = 0.9
    beta2: float = 0.999
    epsilon: float = 1e-7
    augment_cfg: AugmentConfig = field(default_factory=AugmentConfig)

    def __post_init__(self):
        if self.epochs < 1:
            raise ConfigError(f"epochs must be >= 1, got {self.epochs}")
        if self.batch_size < 1:
            raise ConfigError(f"batch size must be >= 1, got {self.batch_size}")
        if not self.learning_rate > 0:
            raise ConfigError(f"learning rate must be > 0, got {self.learning_rate}")


@dataclass(frozen=True)
class EpochStats:
    epoch: int
    train_loss: float
    train_accuracy: float
    val_loss: float
    val_accuracy: float


def history_csv(history: list[EpochStats]) -> str:
    lines = ["epoch,train_loss,train_acc,val_loss,val_acc"]
    for h in history:
        lines.append(
            f"{h.epoch},{h.train_loss:.10g},{h.train_accuracy:.10g},"
            f"{h.val_loss:.10g},{h.val_accuracy:.10g}"
        )
    return "\n".join(lines) + "\n"


def evaluate_split(model: Model, ds: ArrayDataset, weights: ClassWeights, batch_size: int):
    """Unaugmented, unshuffled forward pass: (mean loss, accuracy, probs)."""
    total_loss = 0.0
    correct = 0
    rows = []
    for images, targets in batch_iter(ds, batch_size):
        probs = model.forward(images)
        loss, _ = weighted_cce(probs, targets, weights)
        total_loss += loss * len(images)
        correct += int(np.count_nonzero(np.argmax(probs, axis=1) == np.argmax(targets, axis=1)))
        rows.append(probs)
    n = len(ds)
    return total_loss / n, correct / n, np.concatenate(rows)


def train(
    model: Model,
    train_ds: ArrayDataset,
    val_ds: ArrayDataset,
    cfg: TrainConfig,
    checkpoint_path=None,
):
    """Train in place; returns (model, history, best checkpoint).

    Deterministic in cfg.seed: shuffle order and per-sample augmentation
    draw from streams derived from it, so two runs with the same seed
    produce identical histories.  If `checkpoint_path` is given the best
    checkpoint is (re)written every time validation accuracy strictly
    improves.
    """
    if len(train_ds) == 0 or len(val_ds) == 0:
        raise ConfigError("train and validation splits must both be non-empty")
    if train_ds.classes != val_ds.classes:
        raise ConfigError("train and validation class lists differ")
    k = len(train_ds.classes)
    if cfg.class_weighting:
        weights = compute_class_weights(train_ds.counts())
    else:
        weights = unit_class_weights(k)
    log.info("class weights: %s", np.round(weights.w, 4).tolist())

    master = Rng(cfg.seed)
    adam = Adam(model.params(), lr=cfg.learning_rate, beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.epsilon)
    history: list[EpochStats] = []
    best: Checkpoint | None = None
    best_acc = -1.0

    for epoch in range(1, cfg.epochs + 1):
        shuffle_rng = master.child(STREAM_SHUFFLE, epoch)
        augment_rng = master.child(STREAM_AUGMENT, epoch) if cfg.augment else None
        augment_cfg = cfg.augment_cfg if cfg.augment else None
        epoch_loss = 0.0
        correct = 0
        for images, targets in batch_iter(
            train_ds, cfg.batch_size, shuffle_rng=shuffle_rng,
            augment_cfg=augment_cfg, augment_rng=augment_rng,
        ):
            grads, loss, probs = model.backward(images, targets, weights)
            if not math.isfinite(loss):
                raise NumericError(f"non-finite training loss {loss} at epoch {epoch}")
            adam.step(model.params(), grads)
            epoch_loss += loss * len(images)
            correct += int(np.count_nonzero(np.argmax(probs, axis=1) == np.argmax(targets, axis=1)))
        train_loss = epoch_loss / len(train_ds)
        train_acc = correct / len(train_ds)

        val_loss, val_acc, _ = evaluate_split(model, val_ds, weights, cfg.batch_size)
        if not math.isfinite(val_loss):
            raise NumericError(f"non-finite validation loss {val_loss} at epoch {epoch}")
        history.append(EpochStats(epoch, train_loss, train_acc, val_loss, val_acc))
        log.info(
            "epoch %d/%d: train loss %.4f acc %.4f | val loss %.4f acc %.4f",
            epoch, cfg.epochs, train_loss, train_acc, val_loss, val_acc,
        )

        if val_acc > best_acc:
            best_acc = val_acc
            best = Checkpoint.from_model(
                model, train_ds.classes, cfg.seed,
                best_val_accuracy=val_acc, best_epoch=epoch, adam=adam,
            )
            if checkpoint_path is not None:
                save_checkpoint(best, checkpoint_path)

    return model, history, best
