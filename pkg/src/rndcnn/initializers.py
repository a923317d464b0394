"""Weight initialization strategies.

Three kinds are supported:

* ``xavier`` -- Glorot uniform: samples are i.i.d. uniform on
  [-limit, +limit] with limit = sqrt(6) / sqrt(fan_in + fan_out), which
  gives the variance 2 / (fan_in + fan_out) that keeps activation scale
  stable across layers;
* ``zero`` -- every weight exactly 0.0 (breaks training on purpose; the
  degenerate baseline);
* ``uniform`` -- i.i.d. uniform on an explicit [lo, hi) range,
  defaulting to [-0.05, 0.05).

Fan counts: dense layers use the layer widths; convolutions count
connections, fan_in = in_ch*kh*kw and fan_out = out_ch*kh*kw.
Biases are always initialized to zero, whatever the kind.
"""

import math
from dataclasses import dataclass

import numpy as np

from rndcnn.errors import ContractError
from rndcnn.rng import Rng
from rndcnn.tensor import DTYPE, check_shape

XAVIER = "xavier"
ZERO = "zero"
UNIFORM = "uniform"

DEFAULT_UNIFORM_RANGE = (-0.05, 0.05)


@dataclass(frozen=True)
class Initializer:
    kind: str
    lo: float = DEFAULT_UNIFORM_RANGE[0]
    hi: float = DEFAULT_UNIFORM_RANGE[1]

    def __post_init__(self):
        if self.kind not in (XAVIER, ZERO, UNIFORM):
            raise ContractError(f"unknown initializer kind {self.kind!r}")
        if self.kind == UNIFORM and not self.lo < self.hi:
            raise ContractError(f"uniform range needs lo < hi, got [{self.lo}, {self.hi}]")

    def to_json(self) -> dict:
        if self.kind == UNIFORM:
            return {"kind": self.kind, "lo": self.lo, "hi": self.hi}
        return {"kind": self.kind}

    @classmethod
    def from_json(cls, obj: dict) -> "Initializer":
        if obj.get("kind") == UNIFORM:
            return cls(UNIFORM, float(obj["lo"]), float(obj["hi"]))
        return cls(obj["kind"])


def xavier() -> Initializer:
    return Initializer(XAVIER)


def zero_init() -> Initializer:
    return Initializer(ZERO)


def uniform(lo: float = DEFAULT_UNIFORM_RANGE[0], hi: float = DEFAULT_UNIFORM_RANGE[1]) -> Initializer:
    return Initializer(UNIFORM, lo, hi)


@dataclass(frozen=True)
class FanInfo:
    """Incoming/outgoing connection counts per unit."""

    n_in: int
    n_out: int

    def __post_init__(self):
        if self.n_in < 1 or self.n_out < 1:
            raise ContractError(f"fan counts must be positive, got {self}")


def conv_fan(kh: int, kw: int, in_ch: int, out_ch: int) -> FanInfo:
    return FanInfo(in_ch * kh * kw, out_ch * kh * kw)


def dense_fan(n_in: int, n_out: int) -> FanInfo:
    return FanInfo(n_in, n_out)


def xavier_limit(fan: FanInfo) -> float:
    return math.sqrt(6.0) / math.sqrt(fan.n_in + fan.n_out)


def xavier_variance(fan: FanInfo) -> float:
    # = xavier_limit(fan)**2 / 3, the variance of the uniform law on [-limit, limit]
    return 2.0 / (fan.n_in + fan.n_out)


def init_tensor(init: Initializer, shape, fan: FanInfo | None, rng: Rng | None) -> np.ndarray:
    """Draw a parameter tensor. Deterministic in the rng stream."""
    shape = check_shape(shape)
    if init.kind == ZERO:
        return np.zeros(shape, dtype=DTYPE)
    if rng is None:
        raise ContractError(f"{init.kind} initialization needs an rng")
    if init.kind == XAVIER:
        if fan is None:
            raise ContractError("xavier initialization needs fan information")
        limit = xavier_limit(fan)
        return rng.uniform(-limit, limit, shape)
    return rng.uniform(init.lo, init.hi, shape)
