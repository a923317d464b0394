"""Model description and realization.

A ModelSpec is the declarative layer list (shape-checked end to end at
build time); a Model is the realized parameter tensors plus the
forward/backward machinery.  `build_rnd_cnn` constructs the stock
architecture this engine ships: four conv blocks of widths 16 / 32x2 /
64x3 / 128x4, each followed by 2x2 max pooling, then a flatten, a
4096-unit ReLU dense layer, and a k-way softmax classifier.  All convs
are 3x3, same-padded, stride 1, ReLU-activated.

The input size is a build parameter; four floor-halvings must leave at
least one spatial cell, so H, W >= 16.  At the stock 150x150x3 input the
flatten width is 9*9*128 = 10368.
"""

from dataclasses import dataclass

import numpy as np

from rndcnn.errors import ContractError, ShapeError
from rndcnn.initializers import (
    Initializer,
    conv_fan,
    dense_fan,
    init_tensor,
    xavier,
)
from rndcnn.layers import Conv2D, Dense, Flatten, MaxPool2x2, ReLU, softmax
from rndcnn.losses import ClassWeights, weighted_cce
from rndcnn.rng import Rng

CONV_KERNEL = 3
BLOCKS = ((16,), (32, 32), (64, 64, 64), (128, 128, 128, 128))
HIDDEN_DENSE = 4096


@dataclass(frozen=True)
class LayerSpec:
    kind: str  # conv | relu | pool | flatten | dense | softmax
    width: int | None = None  # out channels (conv) or units (dense)

    def to_json(self):
        return {"kind": self.kind} if self.width is None else {"kind": self.kind, "width": self.width}

    @classmethod
    def from_json(cls, obj):
        return cls(obj["kind"], obj.get("width"))


@dataclass(frozen=True)
class ModelSpec:
    input_shape: tuple[int, int, int]  # (H, W, C)
    layers: tuple[LayerSpec, ...]
    initializer: Initializer
    classes: int

    def __post_init__(self):
        if self.classes < 2:
            raise ContractError(f"need at least 2 classes, got {self.classes}")
        self.validate()

    def validate(self) -> int:
        """Walk the layer list checking shape consistency; returns the output width."""
        h, w, c = self.input_shape
        if h < 1 or w < 1 or c < 1:
            raise ShapeError(f"bad input shape {self.input_shape}")
        width = None  # set once flattened
        for i, spec in enumerate(self.layers):
            if spec.kind == "conv":
                if width is not None:
                    raise ShapeError(f"layer {i}: conv after flatten")
                c = spec.width
            elif spec.kind == "pool":
                if width is not None or h < 2 or w < 2:
                    raise ShapeError(f"layer {i}: cannot pool {h}x{w}")
                h, w = h // 2, w // 2
            elif spec.kind == "flatten":
                if width is not None:
                    raise ShapeError(f"layer {i}: double flatten")
                width = h * w * c
            elif spec.kind == "dense":
                if width is None:
                    raise ShapeError(f"layer {i}: dense before flatten")
                width = spec.width
            elif spec.kind not in ("relu", "softmax"):
                raise ContractError(f"layer {i}: unknown kind {spec.kind!r}")
        if not self.layers or self.layers[-1].kind != "softmax":
            raise ContractError("layer list must end with softmax")
        if width != self.classes:
            raise ShapeError(f"final width {width} != class count {self.classes}")
        return width

    @property
    def conv_count(self) -> int:
        return sum(1 for s in self.layers if s.kind == "conv")

    @property
    def pool_count(self) -> int:
        return sum(1 for s in self.layers if s.kind == "pool")

    @property
    def flatten_width(self) -> int:
        h, w, c = self.input_shape
        for s in self.layers:
            if s.kind == "conv":
                c = s.width
            elif s.kind == "pool":
                h, w = h // 2, w // 2
            elif s.kind == "flatten":
                return h * w * c
        raise ContractError("spec has no flatten layer")

    def to_json(self) -> dict:
        return {
            "input_shape": list(self.input_shape),
            "layers": [s.to_json() for s in self.layers],
            "initializer": self.initializer.to_json(),
            "classes": self.classes,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "ModelSpec":
        return cls(
            tuple(obj["input_shape"]),
            tuple(LayerSpec.from_json(s) for s in obj["layers"]),
            Initializer.from_json(obj["initializer"]),
            int(obj["classes"]),
        )


def rnd_cnn_spec(
    input_shape=(150, 150, 3),
    classes: int = 3,
    initializer: Initializer | None = None,
) -> ModelSpec:
    h, w, _ = input_shape
    if h < 16 or w < 16:
        raise ShapeError(f"input must be at least 16x16 (four halvings), got {h}x{w}")
    layers: list[LayerSpec] = []
    for block in BLOCKS:
        for out_ch in block:
            layers += [LayerSpec("conv", out_ch), LayerSpec("relu")]
        layers.append(LayerSpec("pool"))
    layers += [
        LayerSpec("flatten"),
        LayerSpec("dense", HIDDEN_DENSE),
        LayerSpec("relu"),
        LayerSpec("dense", classes),
        LayerSpec("softmax"),
    ]
    return ModelSpec(tuple(input_shape), tuple(layers), initializer or xavier(), classes)


class Model:
    """Realized network: named parameter tensors plus the pass machinery.

    Parameters are owned by the layer objects; `params()` exposes them as
    (name, array) pairs in a stable order that the optimizer and the
    checkpoint format both follow.
    """

    def __init__(self, spec: ModelSpec, layers: list[tuple[str, object]]):
        self.spec = spec
        self.layers = layers  # (name, layer object), softmax excluded

    @classmethod
    def build(cls, spec: ModelSpec, rng: Rng | None) -> "Model":
        spec.validate()
        h, w, c = spec.input_shape
        width = None
        realized: list[tuple[str, object]] = []
        n_conv = n_pool = n_dense = 0
        for ls in spec.layers:
            if ls.kind == "conv":
                n_conv += 1
                fan = conv_fan(CONV_KERNEL, CONV_KERNEL, c, ls.width)
                k = init_tensor(spec.initializer, (CONV_KERNEL, CONV_KERNEL, c, ls.width), fan, rng)
                b = np.zeros(ls.width, dtype=np.float32)
                realized.append((f"conv{n_conv}", Conv2D(k, b)))
                c = ls.width
            elif ls.kind == "pool":
                n_pool += 1
                realized.append((f"pool{n_pool}", MaxPool2x2()))
                h, w = h // 2, w // 2
            elif ls.kind == "relu":
                realized.append((f"relu{len(realized)}", ReLU()))
            elif ls.kind == "flatten":
                realized.append(("flatten", Flatten()))
                width = h * w * c
            elif ls.kind == "dense":
                n_dense += 1
                fan = dense_fan(width, ls.width)
                wmat = init_tensor(spec.initializer, (width, ls.width), fan, rng)
                b = np.zeros(ls.width, dtype=np.float32)
                realized.append((f"fc{n_dense}", Dense(wmat, b)))
                width = ls.width
            # softmax handled in forward
        return cls(spec, realized)

    # -- parameters ----------------------------------------------------

    PARAM_NAMES = {"Conv2D": ("kernels", "bias"), "Dense": ("w", "b")}

    def params(self) -> list[tuple[str, np.ndarray]]:
        out = []
        for name, layer in self.layers:
            fields = self.PARAM_NAMES.get(type(layer).__name__, ())
            for field, arr in zip(fields, layer.params()):
                out.append((f"{name}.{field}", arr))
        return out

    def set_params(self, values: dict[str, np.ndarray]) -> None:
        for name, layer in self.layers:
            fields = self.PARAM_NAMES.get(type(layer).__name__, ())
            for field, arr in zip(fields, layer.params()):
                new = values[f"{name}.{field}"]
                if new.shape != arr.shape:
                    raise ShapeError(f"{name}.{field}: shape {new.shape} != {arr.shape}")
                arr[...] = new

    def param_count(self) -> int:
        return sum(arr.size for _, arr in self.params())

    def astype(self, dtype) -> "Model":
        """Copy of the model with parameters cast (used for 64-bit checks)."""
        cast: list[tuple[str, object]] = []
        for name, layer in self.layers:
            if isinstance(layer, Conv2D):
                cast.append((name, Conv2D(layer.kernels.astype(dtype), layer.bias.astype(dtype))))
            elif isinstance(layer, Dense):
                cast.append((name, Dense(layer.w.astype(dtype), layer.b.astype(dtype))))
            else:
                cast.append((name, type(layer)()))
        return Model(self.spec, cast)

    # -- passes ---------------------------------------------------------

    def _check_batch(self, batch: np.ndarray) -> None:
        if batch.ndim != 4 or batch.shape[1:] != tuple(self.spec.input_shape):
            raise ShapeError(f"batch shape {batch.shape} != (N, {self.spec.input_shape})")

    def forward(self, batch: np.ndarray) -> np.ndarray:
        """Class probabilities, one softmax row per sample."""
        probs, _, _ = self._forward(batch)
        return probs

    def _forward(self, batch: np.ndarray):
        self._check_batch(batch)
        h = batch
        caches = []
        for _, layer in self.layers:
            h, cache = layer.forward(h)
            caches.append(cache)
        return softmax(h), h, caches

    def backward(self, batch: np.ndarray, targets: np.ndarray, weights: ClassWeights):
        """Full pass: returns (gradients aligned with params(), loss, probs)."""
        probs, _, caches = self._forward(batch)
        loss, g = weighted_cce(probs, targets, weights)
        grads: dict[str, np.ndarray] = {}
        for (name, layer), cache in zip(reversed(self.layers), reversed(caches)):
            g, pgrads = layer.backward(cache, g)
            fields = self.PARAM_NAMES.get(type(layer).__name__, ())
            for field, grad in zip(fields, pgrads):
                grads[f"{name}.{field}"] = grad
        ordered = [grads[name] for name, _ in self.params()]
        return ordered, loss, probs

    def predict(self, batch: np.ndarray) -> np.ndarray:
        """Predicted class indices (argmax, ties to the lowest index)."""
        return np.argmax(self.forward(batch), axis=1)


def build_rnd_cnn(
    input_shape=(150, 150, 3),
    classes: int = 3,
    initializer: Initializer | None = None,
    rng: Rng | None = None,
) -> Model:
    spec = rnd_cnn_spec(input_shape, classes, initializer)
    if rng is None and spec.initializer.kind != "zero":
        raise ContractError("random initialization needs an rng")
    return Model.build(spec, rng)
