"""Confusion matrices, classification rates, and ROC/AUC.

Per class c (one-vs-rest reduction of the k-way confusion matrix):

    precision   = TP / (TP + FP)
    accuracy    = (TP + TN) / total
    sensitivity = TP / (TP + FN)        (recall)
    specificity = TN / (TN + FP)
    f1          = 2 * P * R / (P + R)

A 0/0 denominator makes the rate undefined; it is reported as None with
a reason, never silently coerced to 0 (a never-predicted rare class
would otherwise look catastrophic or perfect by accident).  Macro
averages run over the classes where the rate is defined.

The AUC is the trapezoid area under the ROC swept over distinct scores
in descending order.  The area accumulates in exact integer arithmetic
(sum of dFP * (TP + TP_prev) halved once at the end), which makes it
equal -- exactly, not approximately -- to the probability that a random
positive outscores a random negative with ties counted 1/2.
"""

from dataclasses import dataclass

import numpy as np

from rndcnn.errors import ContractError


def confusion(y_true, y_pred, k: int) -> np.ndarray:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ContractError(f"label arrays must be equal-length vectors, got {y_true.shape} / {y_pred.shape}")
    for name, arr in (("true", y_true), ("predicted", y_pred)):
        if arr.size and (arr.min() < 0 or arr.max() >= k):
            raise ContractError(f"{name} labels outside [0, {k})")
    cm = np.zeros((k, k), dtype=np.int64)
    np.add.at(cm, (y_true, y_pred), 1)
    return cm


def binary_counts(cm: np.ndarray, c: int) -> tuple[int, int, int, int]:
    """(TP, FP, FN, TN) of class c one-vs-rest."""
    tp = int(cm[c, c])
    fp = int(cm[:, c].sum() - cm[c, c])
    fn = int(cm[c, :].sum() - cm[c, c])
    tn = int(cm.sum() - tp - fp - fn)
    return tp, fp, fn, tn


@dataclass(frozen=True)
class ClassRates:
    precision: float | None
    accuracy: float
    sensitivity: float | None
    specificity: float | None
    f1: float | None
    support: int
    undefined: dict  # rate name -> reason


def rates(cm: np.ndarray, c: int) -> ClassRates:
    tp, fp, fn, tn = binary_counts(cm, c)
    total = tp + fp + fn + tn
    if total == 0:
        raise ContractError("empty confusion matrix")
    undefined = {}

    def ratio(num, den, name, reason):
        if den == 0:
            undefined[name] = reason
            return None
        return num / den

    precision = ratio(tp, tp + fp, "precision", "class never predicted (TP+FP=0)")
    sensitivity = ratio(tp, tp + fn, "sensitivity", "class never present (TP+FN=0)")
    specificity = ratio(tn, tn + fp, "specificity", "no negative samples (TN+FP=0)")
    if precision is None or sensitivity is None:
        undefined["f1"] = "precision or sensitivity undefined"
        f1 = None
    elif precision + sensitivity == 0:
        undefined["f1"] = "precision + sensitivity = 0"
        f1 = None
    else:
        f1 = 2 * precision * sensitivity / (precision + sensitivity)
    return ClassRates(precision, (tp + tn) / total, sensitivity, specificity, f1, tp + fn, undefined)


def roc_curve(scores, truths):
    """Threshold sweep over distinct scores, descending.

    Returns (points, fp_tp_counts, n_pos, n_neg) where points are
    (threshold, fpr, tpr) triples starting at (inf, 0, 0) and ending at
    (min score, 1, 1), and fp_tp_counts are the matching raw counts.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.int64)
    if scores.shape != truths.shape or scores.ndim != 1:
        raise ContractError("scores and truths must be equal-length vectors")
    n_pos = int(np.count_nonzero(truths == 1))
    n_neg = int(np.count_nonzero(truths == 0))
    if n_pos == 0 or n_neg == 0:
        raise ContractError("AUC undefined: need at least one positive and one negative")
    order = np.argsort(-scores, kind="stable")
    points = [(float("inf"), 0.0, 0.0)]
    counts = [(0, 0)]
    fp = tp = 0
    i = 0
    n = len(scores)
    while i < n:
        threshold = scores[order[i]]
        while i < n and scores[order[i]] == threshold:
            if truths[order[i]] == 1:
                tp += 1
            else:
                fp += 1
            i += 1
        points.append((float(threshold), fp / n_neg, tp / n_pos))
        counts.append((fp, tp))
    return points, counts, n_pos, n_neg


def auc(scores, truths) -> float:
    """Trapezoid area under the ROC, exact over the integer count lattice."""
    _, counts, n_pos, n_neg = roc_curve(scores, truths)
    twice_area = 0
    for (fp0, tp0), (fp1, tp1) in zip(counts, counts[1:]):
        twice_area += (fp1 - fp0) * (tp1 + tp0)
    return twice_area / (2 * n_pos * n_neg)


@dataclass(frozen=True)
class MetricsReport:
    classes: tuple[str, ...]
    confusion: np.ndarray
    per_class: tuple[ClassRates, ...]
    auc: tuple  # float | None per class
    accuracy: float
    macro_precision: float | None
    macro_sensitivity: float | None
    macro_specificity: float | None
    macro_f1: float | None
    mean_loss: float | None
    roc: tuple  # per class: tuple of (threshold, fpr, tpr), or None


def _macro(values):
    defined = [v for v in values if v is not None]
    return sum(defined) / len(defined) if defined else None


def report(outputs: np.ndarray, truths, class_names, loss_values=None) -> MetricsReport:
    """Full metric set from probability rows.

    Predictions are the row argmax (ties to the lowest index).  Per-class
    ROC/AUC treats column c as the score for "is class c"; classes absent
    from the truth (or covering all of it) get auc=None.
    """
    outputs = np.asarray(outputs)
    truths = np.asarray(truths, dtype=np.int64)
    k = len(class_names)
    if outputs.ndim != 2 or outputs.shape[1] != k or outputs.shape[0] != truths.shape[0]:
        raise ContractError(f"outputs {outputs.shape} inconsistent with {len(truths)} truths, k={k}")
    preds = np.argmax(outputs, axis=1)
    cm = confusion(truths, preds, k)
    per_class = tuple(rates(cm, c) for c in range(k))
    aucs = []
    rocs = []
    for c in range(k):
        binary = (truths == c).astype(np.int64)
        try:
            points, _, _, _ = roc_curve(outputs[:, c], binary)
            aucs.append(auc(outputs[:, c], binary))
            rocs.append(tuple(points))
        except ContractError:
            aucs.append(None)
            rocs.append(None)
    mean_loss = float(np.mean(loss_values)) if loss_values is not None else None
    return MetricsReport(
        classes=tuple(class_names),
        confusion=cm,
        per_class=per_class,
        auc=tuple(aucs),
        accuracy=float(np.trace(cm)) / float(cm.sum()),
        macro_precision=_macro([r.precision for r in per_class]),
        macro_sensitivity=_macro([r.sensitivity for r in per_class]),
        macro_specificity=_macro([r.specificity for r in per_class]),
        macro_f1=_macro([r.f1 for r in per_class]),
        mean_loss=mean_loss,
        roc=tuple(rocs),
    )


def _fmt(value, digits=4) -> str:
    return "" if value is None else f"{value:.{digits}f}"


def report_text(rep: MetricsReport) -> str:
    width = max(len(c) for c in rep.classes + ("macro",))
    lines = [
        f"{'class':<{width}}  precision  sensitivity  specificity  f1      auc     support"
    ]
    for c, r, a in zip(rep.classes, rep.per_class, rep.auc):
        lines.append(
            f"{c:<{width}}  {_fmt(r.precision):<9}  {_fmt(r.sensitivity):<11}  "
            f"{_fmt(r.specificity):<11}  {_fmt(r.f1):<6}  {_fmt(a):<6}  {r.support}"
        )
    lines.append(
        f"{'macro':<{width}}  {_fmt(rep.macro_precision):<9}  {_fmt(rep.macro_sensitivity):<11}  "
        f"{_fmt(rep.macro_specificity):<11}  {_fmt(rep.macro_f1):<6}"
    )
    lines.append(f"accuracy: {rep.accuracy:.4f}")
    if rep.mean_loss is not None:
        lines.append(f"mean loss: {rep.mean_loss:.6f}")
    for c, r in zip(rep.classes, rep.per_class):
        for name, reason in r.undefined.items():
            lines.append(f"note: {c} {name} undefined: {reason}")
    return "\n".join(lines) + "\n"


def report_csv(rep: MetricsReport) -> str:
    lines = ["class,precision,sensitivity,specificity,f1,support"]
    for c, r in zip(rep.classes, rep.per_class):
        lines.append(
            f"{c},{_fmt(r.precision, 6)},{_fmt(r.sensitivity, 6)},"
            f"{_fmt(r.specificity, 6)},{_fmt(r.f1, 6)},{r.support}"
        )
    lines.append(
        f"macro,{_fmt(rep.macro_precision, 6)},{_fmt(rep.macro_sensitivity, 6)},"
        f"{_fmt(rep.macro_specificity, 6)},{_fmt(rep.macro_f1, 6)},{int(rep.confusion.sum())}"
    )
    return "\n".join(lines) + "\n"


def roc_csv(rep: MetricsReport) -> str:
    lines = ["class,threshold,fpr,tpr"]
    for c, points in zip(rep.classes, rep.roc):
        if points is None:
            continue
        for threshold, fpr, tpr in points:
            lines.append(f"{c},{threshold:.10g},{fpr:.10g},{tpr:.10g}")
    return "\n".join(lines) + "\n"
