"""Checkpoint persistence (magic "RNDC").

A checkpoint bundles the model spec, every parameter tensor, the Adam
state, the best-validation record, and the master seed.  Round trips are
lossless: a loaded model predicts bit-identically to the one saved.
The header's param_count field must equal the summed parameter tensor
sizes or the file is rejected whole.
"""

from dataclasses import dataclass

import numpy as np

from rndcnn.container import read_container, write_container
from rndcnn.errors import FormatError
from rndcnn.model import Model, ModelSpec
from rndcnn.optim import Adam

MAGIC = b"RNDC"


@dataclass
class Checkpoint:
    spec: ModelSpec
    params: dict[str, np.ndarray]
    class_names: list[str]
    seed: int
    best_val_accuracy: float | None = None
    best_epoch: int | None = None
    adam: dict | None = None  # {"t", "lr", "beta1", "beta2", "eps", "m": [...], "v": [...]}

    @classmethod
    def from_model(cls, model: Model, class_names, seed, best_val_accuracy=None, best_epoch=None, adam: Adam | None = None):
        params = {name: arr.copy() for name, arr in model.params()}
        state = None
        if adam is not None:
            state = {
                "t": adam.t,
                "lr": adam.lr,
                "beta1": adam.beta1,
                "beta2": adam.beta2,
                "eps": adam.eps,
                "m": [m.copy() for m in adam.m],
                "v": [v.copy() for v in adam.v],
            }
        return cls(model.spec, params, list(class_names), seed, best_val_accuracy, best_epoch, state)

    def to_model(self) -> Model:
        from rndcnn.initializers import zero_init

        # realize with zero tensors (no rng needed), then restore
        blank = ModelSpec(self.spec.input_shape, self.spec.layers, zero_init(), self.spec.classes)
        model = Model.build(blank, None)
        model.spec = self.spec
        model.set_params(self.params)
        return model

    def restore_adam(self, model: Model) -> Adam | None:
        if self.adam is None:
            return None
        opt = Adam(
            model.params(),
            lr=self.adam["lr"],
            beta1=self.adam["beta1"],
            beta2=self.adam["beta2"],
            eps=self.adam["eps"],
        )
        opt.t = int(self.adam["t"])
        opt.m = [m.copy() for m in self.adam["m"]]
        opt.v = [v.copy() for v in self.adam["v"]]
        return opt


def save_checkpoint(ckpt: Checkpoint, path) -> None:
    param_names = list(ckpt.params)
    tensors = [(f"param:{n}", ckpt.params[n]) for n in param_names]
    adam_meta = None
    if ckpt.adam is not None:
        adam_meta = {k: ckpt.adam[k] for k in ("t", "lr", "beta1", "beta2", "eps")}
        tensors += [(f"adam.m:{n}", t) for n, t in zip(param_names, ckpt.adam["m"])]
        tensors += [(f"adam.v:{n}", t) for n, t in zip(param_names, ckpt.adam["v"])]
    header = {
        "kind": "checkpoint",
        "model": ckpt.spec.to_json(),
        "class_names": ckpt.class_names,
        "seed": ckpt.seed,
        "best": {"val_accuracy": ckpt.best_val_accuracy, "epoch": ckpt.best_epoch},
        "adam": adam_meta,
        "param_order": param_names,
        "param_count": int(sum(v.size for v in ckpt.params.values())),
    }
    write_container(path, MAGIC, header, tensors)


def load_checkpoint(path) -> Checkpoint:
    header, tensors = read_container(path, MAGIC)
    try:
        spec = ModelSpec.from_json(header["model"])
        order = list(header["param_order"])
        declared = int(header["param_count"])
        best = header.get("best") or {}
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"checkpoint header incomplete: {exc}") from None
    params = {}
    for name in order:
        key = f"param:{name}"
        if key not in tensors:
            raise FormatError(f"checkpoint missing parameter tensor {name!r}")
        params[name] = tensors[key]
    actual = sum(v.size for v in params.values())
    if actual != declared:
        raise FormatError(f"param_count field says {declared}, tensors sum to {actual}")
    adam = None
    if header.get("adam") is not None:
        meta = header["adam"]
        try:
            adam = {
                "t": int(meta["t"]),
                "lr": float(meta["lr"]),
                "beta1": float(meta["beta1"]),
                "beta2": float(meta["beta2"]),
                "eps": float(meta["eps"]),
                "m": [tensors[f"adam.m:{n}"] for n in order],
                "v": [tensors[f"adam.v:{n}"] for n in order],
            }
        except KeyError as exc:
            raise FormatError(f"checkpoint optimizer state incomplete: {exc}") from None
    return Checkpoint(
        spec,
        params,
        list(header["class_names"]),
        int(header["seed"]),
        best.get("val_accuracy"),
        best.get("epoch"),
        adam,
    )
