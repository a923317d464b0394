"""Independent oracles and the finite-difference gradient checker.

Nothing in here shares code with the production paths it certifies:
`naive_conv` is a literal direct summation, `param_count_oracle` walks
the declarative spec without building layers, and
`pairwise_concordance` recomputes AUC from first principles.  Gradient
checks re-run layers in float64 with central differences
(f(x+h) - f(x-h)) / 2h, step 1e-5 by default, and compare per
coordinate with relative error |a - n| / max(|a|, |n|, 1e-8).

The checker must also be able to fail: `corrupt="conv"` sign-flips the
analytic kernel gradient before comparison, and the suite requires that
this negative control is caught.
"""

import math
from dataclasses import dataclass

import numpy as np

from rndcnn.errors import ContractError, NumericError, ShapeError
from rndcnn.layers import Conv2D, Dense, MaxPool2x2, ReLU, softmax
from rndcnn.losses import explicit_class_weights, weighted_cce
from rndcnn.model import CONV_KERNEL, Model, ModelSpec, rnd_cnn_spec
from rndcnn.initializers import xavier
from rndcnn.rng import Rng

DEFAULT_STEP = 1e-5
LAYER_TOLERANCE = 1e-4
MODEL_TOLERANCE = 1e-3
REL_FLOOR = 1e-8


def naive_conv(x: np.ndarray, kernels: np.ndarray, bias: np.ndarray) -> np.ndarray:
    """Direct-summation same-padded stride-1 convolution; the readable
    reference the fast path is checked against."""
    n, h, w, c = x.shape
    kh, kw, in_ch, out_ch = kernels.shape
    if c != in_ch:
        raise ShapeError(f"input has {c} channels, kernels expect {in_ch}")
    ph, pw = kh // 2, kw // 2
    y = np.zeros((n, h, w, out_ch), dtype=np.float64)
    for b in range(n):
        for i in range(h):
            for j in range(w):
                for o in range(out_ch):
                    acc = float(bias[o])
                    for ki in range(kh):
                        si = i + ki - ph
                        if si < 0 or si >= h:
                            continue
                        for kj in range(kw):
                            sj = j + kj - pw
                            if sj < 0 or sj >= w:
                                continue
                            for ch in range(in_ch):
                                acc += float(x[b, si, sj, ch]) * float(kernels[ki, kj, ch, o])
                    y[b, i, j, o] = acc
    return y.astype(x.dtype)


def pairwise_concordance(scores, truths) -> float:
    """P(random positive outscores random negative), ties counted 1/2.

    Accumulated as an integer numerator over 2*P*N, the same lattice the
    trapezoid AUC reduces to, so the two agree exactly when both hold.
    """
    scores = np.asarray(scores, dtype=np.float64)
    truths = np.asarray(truths, dtype=np.int64)
    pos = scores[truths == 1]
    neg = scores[truths == 0]
    if len(pos) == 0 or len(neg) == 0:
        raise ContractError("concordance undefined without both classes")
    twice = 0
    for p in pos:
        for q in neg:
            if p > q:
                twice += 2
            elif p == q:
                twice += 1
    return twice / (2 * len(pos) * len(neg))


def param_count_oracle(spec: ModelSpec) -> int:
    """Trainable parameter count by walking the spec, never the model."""
    h, w, c = spec.input_shape
    width = None
    total = 0
    for ls in spec.layers:
        if ls.kind == "conv":
            total += CONV_KERNEL * CONV_KERNEL * c * ls.width + ls.width
            c = ls.width
        elif ls.kind == "pool":
            h, w = h // 2, w // 2
        elif ls.kind == "flatten":
            width = h * w * c
        elif ls.kind == "dense":
            total += width * ls.width + ls.width
            width = ls.width
    return total


# -- gradient checking -------------------------------------------------


@dataclass(frozen=True)
class CoordCheck:
    tensor: str
    index: tuple
    analytic: float
    numeric: float

    @property
    def rel_err(self) -> float:
        return abs(self.analytic - self.numeric) / max(abs(self.analytic), abs(self.numeric), REL_FLOOR)


@dataclass
class GradCheckReport:
    name: str
    tolerance: float
    worst_per_tensor: list[CoordCheck]
    coords_checked: int

    @property
    def worst(self) -> CoordCheck:
        return max(self.worst_per_tensor, key=lambda c: c.rel_err)

    @property
    def max_rel_err(self) -> float:
        return self.worst.rel_err

    @property
    def passed(self) -> bool:
        return self.max_rel_err < self.tolerance

    def summary(self) -> str:
        w = self.worst
        return (
            f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: max rel err {self.max_rel_err:.3e} "
            f"at {w.tensor}{list(w.index)} (analytic {w.analytic:.6e}, numeric {w.numeric:.6e}, "
            f"{self.coords_checked} coords, tol {self.tolerance:g})"
        )


def finite_diff_check(
    name: str,
    loss_fn,
    params: list[tuple[str, np.ndarray]],
    analytic: list[np.ndarray],
    *,
    step: float = DEFAULT_STEP,
    tolerance: float = LAYER_TOLERANCE,
    coords_per_tensor: int | None = None,
    rng: Rng | None = None,
) -> GradCheckReport:
    """Central differences of `loss_fn` against analytic gradients.

    Parameter arrays must be float64 and are perturbed in place (and
    restored).  With `coords_per_tensor` set, that many flat coordinates
    are sampled per tensor via `rng`; otherwise every coordinate is hit.
    """
    worst: list[CoordCheck] = []
    total = 0
    for (tensor_name, arr), grad in zip(params, analytic):
        if arr.dtype != np.float64:
            raise ContractError(f"{tensor_name}: gradient checks run in float64, got {arr.dtype}")
        if grad.shape != arr.shape:
            raise ShapeError(f"{tensor_name}: gradient shape {grad.shape} != {arr.shape}")
        flat = arr.reshape(-1)
        gflat = grad.reshape(-1)
        if coords_per_tensor is not None and arr.size > coords_per_tensor:
            if rng is None:
                raise ContractError("coordinate sampling needs an rng")
            coords = np.sort(rng.integers(0, arr.size, None) for _ in ())  # placeholder
        coords = (
            np.arange(arr.size)
            if coords_per_tensor is None or arr.size <= coords_per_tensor
            else np.sort(rng.permutation(arr.size)[:coords_per_tensor])
        )
        tensor_worst = None
        for i in coords:
            original = flat[i]
            flat[i] = original + step
            f_plus = loss_fn()
            flat[i] = original - step
            f_minus = loss_fn()
            flat[i] = original
            if not (math.isfinite(f_plus) and math.isfinite(f_minus)):
                raise NumericError(f"non-finite probe at {tensor_name}[{i}]")
            numeric = (f_plus - f_minus) / (2 * step)
            check = CoordCheck(tensor_name, np.unravel_index(i, arr.shape), float(gflat[i]), float(numeric))
            if tensor_worst is None or check.rel_err > tensor_worst.rel_err:
                tensor_worst = check
            total += 1
        worst.append(tensor_worst)
    return GradCheckReport(name, tolerance, worst, total)


def _sum_probe(layer, x):
    """Probe loss = sum of outputs; analytic gradients via an all-ones upstream."""

    def loss_fn():
        y, _ = layer.forward(x)
        return float(y.sum())

    y, cache = layer.forward(x)
    dx, pgrads = layer.backward(cache, np.ones_like(y))
    return loss_fn, dx, pgrads


def check_dense(seed: int = 0) -> GradCheckReport:
    rng = Rng(seed).child(90)
    x = rng.uniform(-1, 1, (8, 4), dtype=np.float64)
    layer = Dense(rng.uniform(-1, 1, (4, 5), dtype=np.float64), rng.uniform(-1, 1, (5,), dtype=np.float64))
    loss_fn, dx, (dw, db) = _sum_probe(layer, x)
    return finite_diff_check(
        "dense",
        loss_fn,
        [("w", layer.w), ("b", layer.b), ("input", x)],
        [dw, db, dx],
    )


def check_conv(seed: int = 0, corrupt: bool = False) -> GradCheckReport:
    rng = Rng(seed).child(91)
    x = rng.uniform(-1, 1, (2, 5, 6, 3), dtype=np.float64)
    layer = Conv2D(
        rng.uniform(-1, 1, (3, 3, 3, 4), dtype=np.float64),
        rng.uniform(-1, 1, (4,), dtype=np.float64),
    )
    loss_fn, dx, (dk, db) = _sum_probe(layer, x)
    if corrupt:
        dk = -dk  # deliberate sign flip: the checker must catch this
    return finite_diff_check(
        "conv",
        loss_fn,
        [("kernels", layer.kernels), ("bias", layer.bias), ("input", x)],
        [dk, db, dx],
    )


def check_relu(seed: int = 0) -> GradCheckReport:
    rng = Rng(seed).child(92)
    # inputs bounded away from the kink at 0
    magnitude = rng.uniform(0.1, 1.0, (6, 7), dtype=np.float64)
    sign = np.where(rng.uniform(0, 1, (6, 7), dtype=np.float64) < 0.5, -1.0, 1.0)
    x = magnitude * sign
    layer = ReLU()
    loss_fn, dx, _ = _sum_probe(layer, x)
    return finite_diff_check("relu", loss_fn, [("input", x)], [dx])


def check_maxpool(seed: int = 0) -> GradCheckReport:
    rng = Rng(seed).child(93)
    # globally distinct values with gaps far above the probe step: tie-free
    size = 2 * 6 * 6 * 3
    x = (0.01 * (rng.permutation(size).astype(np.float64) + 1)).reshape(2, 6, 6, 3)
    layer = MaxPool2x2()
    loss_fn, dx, _ = _sum_probe(layer, x)
    return finite_diff_check("maxpool", loss_fn, [("input", x)], [dx])


def check_softmax_cce(seed: int = 0) -> GradCheckReport:
    rng = Rng(seed).child(94)
    logits = rng.uniform(-2, 2, (6, 3), dtype=np.float64)
    labels = np.asarray(rng.integers(0, 3, (6,)))
    targets = np.zeros((6, 3), dtype=np.float64)
    targets[np.arange(6), labels] = 1.0
    weights = explicit_class_weights([0.58, 0.85, 9.83])

    def loss_fn():
        return weighted_cce(softmax(logits), targets, weights)[0]

    _, dlogits = weighted_cce(softmax(logits), targets, weights)
    return finite_diff_check("softmax+cce", loss_fn, [("logits", logits)], [dlogits])


def check_model(
    seed: int = 0,
    input_size: int = 32,
    coords_per_tensor: int = 200,
    tolerance: float = MODEL_TOLERANCE,
) -> GradCheckReport:
    """End-to-end check of the full stock network at a small input size."""
    rng = Rng(seed).child(95)
    model32 = Model.build(rnd_cnn_spec((input_size, input_size, 3), 3, xavier()), rng.child(0))
    model = model32.astype(np.float64)
    x = rng.uniform(0, 1, (2, input_size, input_size, 3), dtype=np.float64)
    labels = np.asarray(rng.integers(0, 3, (2,)))
    targets = np.zeros((2, 3), dtype=np.float64)
    targets[np.arange(2), labels] = 1.0
    weights = explicit_class_weights([0.58, 0.85, 9.83])

    def loss_fn():
        _, loss, _ = model.backward(x, targets, weights)
        return loss

    grads, _, _ = model.backward(x, targets, weights)
    return finite_diff_check(
        "model",
        loss_fn,
        model.params(),
        grads,
        tolerance=tolerance,
        coords_per_tensor=coords_per_tensor,
        rng=rng.child(1),
    )


def run_layer_suite(seed: int = 0, corrupt: str | None = None) -> list[GradCheckReport]:
    if corrupt not in (None, "conv"):
        raise ContractError(f"unknown corruption target {corrupt!r}")
    return [
        check_conv(seed, corrupt=(corrupt == "conv")),
        check_dense(seed),
        check_relu(seed),
        check_maxpool(seed),
        check_softmax_cce(seed),
    ]


def run_model_suite(seed: int = 0, coords_per_tensor: int = 200) -> list[GradCheckReport]:
    return [check_model(seed, coords_per_tensor=coords_per_tensor)]
