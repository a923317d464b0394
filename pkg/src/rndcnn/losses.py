"""Class-weighted categorical cross-entropy.

Class weights counter imbalance as per-sample loss multipliers:
w_i = n / (k * n_i) for class i, where n is the total sample count over
k classes.  Balanced counts give every class weight exactly 1, reducing
the loss to plain categorical cross-entropy.  Rare classes get weights
well above 1 so their misclassification costs more.
"""

import logging
from dataclasses import dataclass

import numpy as np

from rndcnn.errors import ContractError, ShapeError

log = logging.getLogger(__name__)

LOG_CLAMP = 1e-12

COMPUTED = "computed-from-counts"
EXPLICIT = "explicit"


@dataclass(frozen=True)
class ClassWeights:
    w: np.ndarray  # (k,) float64, all > 0
    provenance: str

    def __post_init__(self):
        if self.w.ndim != 1 or len(self.w) < 2:
            raise ContractError(f"need at least 2 class weights, got shape {self.w.shape}")
        if not np.all(self.w > 0):
            raise ContractError("class weights must all be positive")


def compute_class_weights(counts) -> ClassWeights:
    """w_i = n / (k * n_i) from per-class sample counts."""
    counts = np.asarray(counts, dtype=np.int64)
    if counts.ndim != 1 or len(counts) < 2:
        raise ContractError(f"need counts for at least 2 classes, got {counts!r}")
    if np.any(counts < 1):
        raise ContractError(f"degenerate class with zero samples in counts {counts.tolist()}")
    n, k = counts.sum(), len(counts)
    return ClassWeights(n / (k * counts.astype(np.float64)), COMPUTED)


def explicit_class_weights(values) -> ClassWeights:
    return ClassWeights(np.asarray(values, dtype=np.float64), EXPLICIT)


def unit_class_weights(k: int) -> ClassWeights:
    return ClassWeights(np.ones(k, dtype=np.float64), EXPLICIT)


def check_one_hot(targets: np.ndarray, k: int) -> np.ndarray:
    if targets.ndim != 2 or targets.shape[1] != k:
        raise ShapeError(f"targets shape {targets.shape} is not (N, {k})")
    if not (np.all((targets == 0) | (targets == 1)) and np.all(targets.sum(axis=1) == 1)):
        raise ContractError("targets must be one-hot rows")
    return np.argmax(targets, axis=1)


def weighted_cce(probs: np.ndarray, targets: np.ndarray, weights: ClassWeights):
    """Mean weighted cross-entropy plus its gradient w.r.t. the logits.

    loss = (1/N) * sum_s w[c(s)] * (-ln probs[s, c(s)])

    The gradient uses the fused softmax+cross-entropy adjoint,
    w[c(s)] * (probs_s - targets_s) / N per sample, so callers
    backpropagate straight into the pre-softmax logits.  True-class
    probabilities at or below 0 are clamped to 1e-12 before the log
    (saturated wrong predictions would otherwise give -inf).
    """
    n, k = probs.shape
    labels = check_one_hot(targets, k)
    if len(weights.w) != k:
        raise ShapeError(f"{len(weights.w)} weights for {k} classes")
    p_true = probs[np.arange(n), labels].astype(np.float64)
    clamped = int(np.count_nonzero(p_true < LOG_CLAMP))
    if clamped:
        log.warning("clamped %d true-class probabilities below %.0e before log", clamped, LOG_CLAMP)
        p_true = np.maximum(p_true, LOG_CLAMP)
    w_s = weights.w[labels]
    loss = float(np.mean(w_s * -np.log(p_true)))
    dlogits = (w_s[:, None] / n).astype(probs.dtype) * (probs - targets.astype(probs.dtype))
    return loss, dlogits
