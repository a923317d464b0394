"""Geometric and photometric image primitives.

All operate on float32 (H, W, C) arrays.  Two bilinear flavors exist on
purpose: resizing samples with half-pixel centers and clamps at the
edges (resizing a constant image gives the same constant), while
rotation samples with zero fill outside the source (content swung past
the border goes black, nothing smears).
"""

import math

import numpy as np


def hflip(img: np.ndarray) -> np.ndarray:
    """Mirror left-right. An exact involution."""
    return np.ascontiguousarray(img[:, ::-1, :])


def bilinear_resize(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Half-pixel-center bilinear resize, edges clamped."""
    h, w, c = img.shape
    if (out_h, out_w) == (h, w):
        return img.copy()
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * (h / out_h) - 0.5
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * (w / out_w) - 0.5
    ys = np.clip(ys, 0.0, h - 1.0)
    xs = np.clip(xs, 0.0, w - 1.0)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    wy = (ys - y0).astype(np.float32)[:, None, None]
    wx = (xs - x0).astype(np.float32)[None, :, None]
    top = img[y0][:, x0] * (1 - wx) + img[y0][:, x1] * wx
    bot = img[y1][:, x0] * (1 - wx) + img[y1][:, x1] * wx
    return (top * (1 - wy) + bot * wy).astype(np.float32)


def _sample_zero_fill(img: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    """Bilinear lookup at fractional (ys, xs); zero outside the image."""
    h, w, c = img.shape
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    wy = (ys - y0).astype(np.float32)[..., None]
    wx = (xs - x0).astype(np.float32)[..., None]
    out = np.zeros(ys.shape + (c,), dtype=np.float32)
    for dy, dx, wgt in (
        (0, 0, (1 - wy) * (1 - wx)),
        (0, 1, (1 - wy) * wx),
        (1, 0, wy * (1 - wx)),
        (1, 1, wy * wx),
    ):
        yy, xx = y0 + dy, x0 + dx
        ok = (yy >= 0) & (yy < h) & (xx >= 0) & (xx < w)
        yc = np.clip(yy, 0, h - 1)
        xc = np.clip(xx, 0, w - 1)
        out += img[yc, xc] * (wgt * ok[..., None])
    return out


def rotate(img: np.ndarray, degrees: float) -> np.ndarray:
    """Rotate about the image center, bilinear resampling, zero fill."""
    h, w, _ = img.shape
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    rows, cols = np.meshgrid(np.arange(h, dtype=np.float64), np.arange(w, dtype=np.float64), indexing="ij")
    dy, dx = rows - cy, cols - cx
    # inverse map: where did each output pixel come from
    src_y = cy + sin_t * dx + cos_t * dy
    src_x = cx + cos_t * dx - sin_t * dy
    return _sample_zero_fill(img, src_y, src_x)


def center_crop_or_pad(img: np.ndarray, out_h: int, out_w: int) -> np.ndarray:
    """Center crop (if larger) and/or zero-pad (if smaller) to a target size."""
    h, w, c = img.shape
    out = np.zeros((out_h, out_w, c), dtype=img.dtype)
    src_y = max(0, (h - out_h) // 2)
    src_x = max(0, (w - out_w) // 2)
    dst_y = max(0, (out_h - h) // 2)
    dst_x = max(0, (out_w - w) // 2)
    copy_h = min(h, out_h)
    copy_w = min(w, out_w)
    out[dst_y : dst_y + copy_h, dst_x : dst_x + copy_w] = img[
        src_y : src_y + copy_h, src_x : src_x + copy_w
    ]
    return out


def rescale(img: np.ndarray, factor: float) -> np.ndarray:
    """Resize content by `factor`, then crop/pad back to the original size."""
    h, w, _ = img.shape
    new_h = max(1, round(h * factor))
    new_w = max(1, round(w * factor))
    return center_crop_or_pad(bilinear_resize(img, new_h, new_w), h, w)


def center_zoom(img: np.ndarray, factor: float) -> np.ndarray:
    """Crop/pad a centered window of size (H/factor, W/factor), resize back."""
    h, w, _ = img.shape
    win_h = max(1, round(h / factor))
    win_w = max(1, round(w / factor))
    return bilinear_resize(center_crop_or_pad(img, win_h, win_w), h, w)
