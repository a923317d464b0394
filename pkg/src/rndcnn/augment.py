"""Train-time image augmentation.

Six label-preserving transforms, applied in a fixed order with one
random draw each: horizontal flip (never vertical), rotation, scale,
zoom, additive intensity shift, multiplicative lighting.  The result is
clamped back to [0, 1] and keeps its shape.  All draws happen on every
call, in a fixed sequence, so a sample's transform is a pure function of
its dedicated rng stream regardless of branching.
"""

from dataclasses import dataclass

import numpy as np

from rndcnn import image_ops
from rndcnn.errors import ContractError
from rndcnn.rng import Rng


@dataclass(frozen=True)
class AugmentConfig:
    flip_prob: float = 0.5
    rotation_deg: float = 10.0
    scale_lo: float = 0.9
    scale_hi: float = 1.1
    zoom_lo: float = 0.9
    zoom_hi: float = 1.1
    intensity_shift: float = 0.1
    light_lo: float = 0.9
    light_hi: float = 1.1
    enabled: bool = True

    def __post_init__(self):
        if not 0.0 <= self.flip_prob <= 1.0:
            raise ContractError(f"flip_prob must be in [0,1], got {self.flip_prob}")
        for lo, hi, what in (
            (self.scale_lo, self.scale_hi, "scale"),
            (self.zoom_lo, self.zoom_hi, "zoom"),
            (self.light_lo, self.light_hi, "light"),
        ):
            if not 0 < lo <= hi:
                raise ContractError(f"{what} range [{lo}, {hi}] invalid")


def augment(img: np.ndarray, cfg: AugmentConfig, rng: Rng) -> np.ndarray:
    """One random transform of a (H, W, C) float image in [0, 1]."""
    if not cfg.enabled:
        raise ContractError("augment called with augmentation disabled")
    u_flip = float(rng.uniform(0.0, 1.0, dtype=np.float64))
    theta = float(rng.uniform(-cfg.rotation_deg, cfg.rotation_deg, dtype=np.float64))
    s = float(rng.uniform(cfg.scale_lo, cfg.scale_hi, dtype=np.float64))
    z = float(rng.uniform(cfg.zoom_lo, cfg.zoom_hi, dtype=np.float64))
    delta = float(rng.uniform(-cfg.intensity_shift, cfg.intensity_shift, dtype=np.float64))
    lam = float(rng.uniform(cfg.light_lo, cfg.light_hi, dtype=np.float64))

    out = img
    if u_flip < cfg.flip_prob:
        out = image_ops.hflip(out)
    if theta != 0.0:
        out = image_ops.rotate(out, theta)
    if s != 1.0:
        out = image_ops.rescale(out, s)
    if z != 1.0:
        out = image_ops.center_zoom(out, z)
    out = out + np.float32(delta)
    out = out * np.float32(lam)
    return np.clip(out, 0.0, 1.0).astype(np.float32)
