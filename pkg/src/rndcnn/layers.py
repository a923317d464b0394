"""Layer forward/backward passes.

Every layer follows the same protocol: ``forward(x) -> (y, cache)`` and
``backward(cache, dy) -> (dx, param_grads)`` where ``param_grads`` is a
tuple shaped like ``params()``.  Layers are immutable parameter holders
during a pass; activations travel through caches, never through layer
state, so a frozen model can serve many readers.

Gradients are hand-written adjoints (no autodiff tape).  All math is
dtype-generic: float32 in production, float64 when the verification
module re-runs a layer for finite-difference checks.
"""

import numpy as np

from rndcnn import kernels
from rndcnn.errors import ShapeError

__all__ = ["Conv2D", "Dense", "ReLU", "MaxPool2x2", "Flatten", "softmax"]


class Conv2D:
    """Stride-1, same-padded 2-D convolution (cross-correlation, no kernel flip).

    Kernels are (kh, kw, in_ch, out_ch) with odd kh, kw; the output keeps
    the input's spatial dims.  Forward returns pre-activations; ReLU is
    its own layer.  Internally the patch matrix from im2col is kept in
    the cache so backward skips re-unfolding (memory for speed).
    """

    def __init__(self, kernels_: np.ndarray, bias: np.ndarray):
        kh, kw, in_ch, out_ch = kernels_.shape
        if kh % 2 == 0 or kw % 2 == 0:
            raise ShapeError(f"kernel dims must be odd for same padding, got {kh}x{kw}")
        if bias.shape != (out_ch,):
            raise ShapeError(f"bias shape {bias.shape} != ({out_ch},)")
        self.kernels = kernels_
        self.bias = bias

    def params(self):
        return (self.kernels, self.bias)

    def forward(self, x: np.ndarray):
        n, h, w, c = x.shape
        kh, kw, in_ch, out_ch = self.kernels.shape
        if c != in_ch:
            raise ShapeError(f"input has {c} channels, kernels expect {in_ch}")
        cols = kernels.im2col(np.ascontiguousarray(x), kh, kw)
        y = cols @ self.kernels.reshape(-1, out_ch) + self.bias
        return y.reshape(n, h, w, out_ch), (cols, x.shape)

    def backward(self, cache, dy: np.ndarray):
        cols, (n, h, w, c) = cache
        kh, kw, in_ch, out_ch = self.kernels.shape
        if dy.shape != (n, h, w, out_ch):
            raise ShapeError(f"upstream shape {dy.shape} != {(n, h, w, out_ch)}")
        dy2 = np.ascontiguousarray(dy.reshape(-1, out_ch))
        dbias = dy2.sum(axis=0)
        dkernels = (cols.T @ dy2).reshape(self.kernels.shape)
        dcols = np.ascontiguousarray(dy2 @ self.kernels.reshape(-1, out_ch).T)
        dx = kernels.col2im(dcols, n, h, w, c, kh, kw)
        return dx, (dkernels, dbias)


class Dense:
    """Fully connected layer: y = x @ w + b over the last axis."""

    def __init__(self, w: np.ndarray, b: np.ndarray):
        if w.ndim != 2 or b.shape != (w.shape[1],):
            raise ShapeError(f"inconsistent dense shapes {w.shape} / {b.shape}")
        self.w = w
        self.b = b

    def params(self):
        return (self.w, self.b)

    def forward(self, x: np.ndarray):
        if x.ndim != 2 or x.shape[1] != self.w.shape[0]:
            raise ShapeError(f"dense input {x.shape} incompatible with weights {self.w.shape}")
        return x @ self.w + self.b, x

    def backward(self, cache, dy: np.ndarray):
        x = cache
        if dy.shape != (x.shape[0], self.w.shape[1]):
            raise ShapeError(f"upstream shape {dy.shape} != {(x.shape[0], self.w.shape[1])}")
        dw = x.T @ dy
        db = dy.sum(axis=0)
        dx = dy @ self.w.T
        return dx, (dw, db)


class ReLU:
    """max(0, x); the subgradient at exactly 0 is taken as 0."""

    def params(self):
        return ()

    def forward(self, x: np.ndarray):
        return np.maximum(x, 0), x > 0

    def backward(self, cache, dy: np.ndarray):
        if dy.shape != cache.shape:
            raise ShapeError(f"upstream shape {dy.shape} != {cache.shape}")
        return dy * cache, ()


class MaxPool2x2:
    """2x2 max pooling, stride 2; a trailing odd row/column is dropped.

    The forward cache records each window's argmax (ties to the first
    element in row-major order) so backward routes the upstream value to
    exactly one input cell per window.
    """

    def params(self):
        return ()

    def forward(self, x: np.ndarray):
        n, h, w, c = x.shape
        if h < 2 or w < 2:
            raise ShapeError(f"pooling needs spatial dims >= 2, got {h}x{w}")
        pooled, arg = kernels.maxpool2x2(np.ascontiguousarray(x))
        return pooled, (arg, h, w)

    def backward(self, cache, dy: np.ndarray):
        arg, h, w = cache
        if dy.shape != arg.shape:
            raise ShapeError(f"upstream shape {dy.shape} does not match pool record {arg.shape}")
        dx = kernels.maxpool2x2_backward(arg, np.ascontiguousarray(dy), h, w)
        return dx, ()


class Flatten:
    """(N, H, W, C) -> (N, H*W*C)."""

    def params(self):
        return ()

    def forward(self, x: np.ndarray):
        n = x.shape[0]
        return np.ascontiguousarray(x).reshape(n, -1), x.shape

    def backward(self, cache, dy: np.ndarray):
        return dy.reshape(cache), ()


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax over the last axis, max-subtracted for stability."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
