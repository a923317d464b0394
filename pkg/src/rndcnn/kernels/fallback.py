"""Numpy implementations of the data-movement kernels.

These are the reference semantics for the compiled extension: both
backends must produce byte-identical outputs.  The convolution GEMM
itself happens outside (numpy/BLAS on either backend), so kernel
equality implies whole-conv-path equality.

Layout conventions:

* images are NHWC, C-contiguous;
* `im2col` emits one row per output site, ordered (n, h, w) row-major,
  with patch entries ordered (ki, kj, c) row-major so the row dots
  directly with a (kh*kw*in_ch, out_ch) kernel matrix;
* `col2im` is the exact adjoint (scatter-add) of `im2col`, accumulating
  offset by offset in (ki, kj) order;
* max pooling is 2x2, stride 2, trailing odd row/column dropped, ties
  resolved to the first window element in row-major order.
"""

import numpy as np


def im2col(x: np.ndarray, kh: int, kw: int) -> np.ndarray:
    """Unfold stride-1 same-padded patches: (N,H,W,C) -> (N*H*W, kh*kw*C)."""
    n, h, w, c = x.shape
    ph, pw = kh // 2, kw // 2
    xp = np.pad(x, ((0, 0), (ph, ph), (pw, pw), (0, 0)))
    cols = np.empty((n, h, w, kh * kw * c), dtype=x.dtype)
    off = 0
    for ki in range(kh):
        for kj in range(kw):
            cols[..., off : off + c] = xp[:, ki : ki + h, kj : kj + w, :]
            off += c
    return cols.reshape(n * h * w, kh * kw * c)


def col2im(dcols: np.ndarray, n: int, h: int, w: int, c: int, kh: int, kw: int) -> np.ndarray:
    """Adjoint of `im2col`: scatter-add columns back to (N,H,W,C)."""
    ph, pw = kh // 2, kw // 2
    dxp = np.zeros((n, h + 2 * ph, w + 2 * pw, c), dtype=dcols.dtype)
    d = dcols.reshape(n, h, w, kh * kw * c)
    off = 0
    for ki in range(kh):
        for kj in range(kw):
            dxp[:, ki : ki + h, kj : kj + w, :] += d[..., off : off + c]
            off += c
    return np.ascontiguousarray(dxp[:, ph : ph + h, pw : pw + w, :])


def maxpool2x2(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """2x2/stride-2 max pool.

    Returns (pooled, arg) where arg holds the winning in-window position
    0..3 in row-major order, needed to route gradients back.
    """
    n, h, w, c = x.shape
    h2, w2 = h // 2, w // 2
    windows = (
        x[:, : h2 * 2, : w2 * 2, :]
        .reshape(n, h2, 2, w2, 2, c)
        .transpose(0, 1, 3, 2, 4, 5)
        .reshape(n, h2, w2, 4, c)
    )
    arg = np.argmax(windows, axis=3).astype(np.uint8)
    pooled = np.take_along_axis(windows, arg[:, :, :, None, :].astype(np.intp), axis=3)
    return np.ascontiguousarray(pooled[:, :, :, 0, :]), arg


def maxpool2x2_backward(arg: np.ndarray, dy: np.ndarray, h: int, w: int) -> np.ndarray:
    """Route each upstream value to its window's argmax position."""
    n, h2, w2, c = dy.shape
    scattered = np.zeros((n, h2, w2, 4, c), dtype=dy.dtype)
    np.put_along_axis(scattered, arg[:, :, :, None, :].astype(np.intp), dy[:, :, :, None, :], axis=3)
    dx = np.zeros((n, h, w, c), dtype=dy.dtype)
    dx[:, : h2 * 2, : w2 * 2, :] = (
        scattered.reshape(n, h2, w2, 2, 2, c)
        .transpose(0, 1, 3, 2, 4, 5)
        .reshape(n, h2 * 2, w2 * 2, c)
    )
    return dx
