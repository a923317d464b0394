# Compiled twins of kernels/fallback.py.
#
# Semantics contract: byte-identical outputs to the fallback for the same
# inputs.  That pins down more than shapes -- col2im must accumulate in
# (ki, kj) offset order so float addition order matches the fallback's
# per-offset slice adds, and the pooling argmax must keep the first
# maximum in row-major window order.

import numpy as np


ctypedef fused real:
    float
    double


def im2col(real[:, :, :, ::1] x, int kh, int kw):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    if real is float:
        cols_np = np.zeros((n * h * w, kh * kw * c), dtype=np.float32)
    else:
        cols_np = np.zeros((n * h * w, kh * kw * c), dtype=np.float64)
    cdef real[:, ::1] cols = cols_np
    cdef Py_ssize_t b, i, j, ki, kj, ch, si, sj, row, off
    with nogil:
        for b in range(n):
            for i in range(h):
                for j in range(w):
                    row = (b * h + i) * w + j
                    off = 0
                    for ki in range(kh):
                        si = i + ki - ph
                        for kj in range(kw):
                            sj = j + kj - pw
                            if 0 <= si < h and 0 <= sj < w:
                                for ch in range(c):
                                    cols[row, off + ch] = x[b, si, sj, ch]
                            off += c
    return cols_np


def col2im(real[:, ::1] dcols, Py_ssize_t n, Py_ssize_t h, Py_ssize_t w, Py_ssize_t c,
           int kh, int kw):
    cdef Py_ssize_t ph = kh // 2, pw = kw // 2
    if real is float:
        dx_np = np.zeros((n, h, w, c), dtype=np.float32)
    else:
        dx_np = np.zeros((n, h, w, c), dtype=np.float64)
    cdef real[:, :, :, ::1] dx = dx_np
    cdef Py_ssize_t b, i, j, ki, kj, ch, si, sj, row, off
    with nogil:
        # offset-major accumulation: same float addition order per cell as
        # the fallback's slice-by-slice adds
        for ki in range(kh):
            for kj in range(kw):
                off = (ki * kw + kj) * c
                for b in range(n):
                    for i in range(h):
                        si = i + ki - ph
                        if si < 0 or si >= h:
                            continue
                        for j in range(w):
                            sj = j + kj - pw
                            if sj < 0 or sj >= w:
                                continue
                            row = (b * h + i) * w + j
                            for ch in range(c):
                                dx[b, si, sj, ch] += dcols[row, off + ch]
    return dx_np


def maxpool2x2(real[:, :, :, ::1] x):
    cdef Py_ssize_t n = x.shape[0], h = x.shape[1], w = x.shape[2], c = x.shape[3]
    cdef Py_ssize_t h2 = h // 2, w2 = w // 2
    if real is float:
        pooled_np = np.zeros((n, h2, w2, c), dtype=np.float32)
    else:
        pooled_np = np.zeros((n, h2, w2, c), dtype=np.float64)
    arg_np = np.zeros((n, h2, w2, c), dtype=np.uint8)
    cdef real[:, :, :, ::1] pooled = pooled_np
    cdef unsigned char[:, :, :, ::1] arg = arg_np
    cdef Py_ssize_t b, i, j, ch, p
    cdef real best, v
    cdef unsigned char bestp
    with nogil:
        for b in range(n):
            for i in range(h2):
                for j in range(w2):
                    for ch in range(c):
                        best = x[b, 2 * i, 2 * j, ch]
                        bestp = 0
                        for p in range(1, 4):
                            v = x[b, 2 * i + (p >> 1), 2 * j + (p & 1), ch]
                            if v > best:
                                best = v
                                bestp = <unsigned char> p
                        pooled[b, i, j, ch] = best
                        arg[b, i, j, ch] = bestp
    return pooled_np, arg_np


def maxpool2x2_backward(unsigned char[:, :, :, ::1] arg, real[:, :, :, ::1] dy,
                        Py_ssize_t h, Py_ssize_t w):
    cdef Py_ssize_t n = dy.shape[0], h2 = dy.shape[1], w2 = dy.shape[2], c = dy.shape[3]
    if real is float:
        dx_np = np.zeros((n, h, w, c), dtype=np.float32)
    else:
        dx_np = np.zeros((n, h, w, c), dtype=np.float64)
    cdef real[:, :, :, ::1] dx = dx_np
    cdef Py_ssize_t b, i, j, ch
    cdef unsigned char p
    with nogil:
        for b in range(n):
            for i in range(h2):
                for j in range(w2):
                    for ch in range(c):
                        p = arg[b, i, j, ch]
                        dx[b, 2 * i + (p >> 1), 2 * j + (p & 1), ch] = dy[b, i, j, ch]
    return dx_np
