"""Dense array helpers used at module boundaries.

All activations, kernels, and gradients are plain numpy arrays: 32-bit
floats, row-major, 1 to 4 dimensions (vector, matrix, HWC image, NHWC
batch).  The functions here add the shape validation the rest of the
engine relies on; inner loops use numpy directly.

There is no general broadcasting: elementwise operations accept equal
shapes or a tensor/scalar pair, nothing else.
"""

import numpy as np

from rndcnn.errors import ShapeError

DTYPE = np.float32
MAX_DIMS = 4


def check_shape(shape) -> tuple[int, ...]:
    shape = tuple(int(d) for d in shape)
    if not 1 <= len(shape) <= MAX_DIMS:
        raise ShapeError(f"tensors are 1-{MAX_DIMS} dimensional, got shape {shape}")
    if any(d < 1 for d in shape):
        raise ShapeError(f"all dims must be >= 1, got shape {shape}")
    return shape


def zeros(shape, dtype=DTYPE) -> np.ndarray:
    return np.zeros(check_shape(shape), dtype=dtype)


def as_tensor(values, dtype=DTYPE) -> np.ndarray:
    out = np.ascontiguousarray(values, dtype=dtype)
    check_shape(out.shape)
    return out


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    if a.ndim != 2 or b.ndim != 2:
        raise ShapeError(f"matmul needs 2-D operands, got {a.shape} and {b.shape}")
    if a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul inner dims differ: {a.shape} x {b.shape}")
    return a @ b


def _check_elementwise(a: np.ndarray, b) -> None:
    if np.isscalar(b) or np.ndim(b) == 0:
        return
    if a.shape != np.shape(b):
        raise ShapeError(f"elementwise shapes differ: {a.shape} vs {np.shape(b)}")


def add(a: np.ndarray, b) -> np.ndarray:
    _check_elementwise(a, b)
    return a + b


def scale(a: np.ndarray, s: float) -> np.ndarray:
    return a * a.dtype.type(s)


def elementwise(fn, a: np.ndarray) -> np.ndarray:
    """Apply a scalar function over every entry (vectorized via numpy)."""
    return np.asarray(fn(a), dtype=a.dtype)


def reduce_sum(a: np.ndarray) -> float:
    return float(a.sum())


def reduce_max(a: np.ndarray) -> float:
    return float(a.max())


def argmax_last(a: np.ndarray) -> np.ndarray:
    """Argmax along the last axis; ties resolve to the lowest index."""
    return np.argmax(a, axis=-1)
