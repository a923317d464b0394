"""Hot data-movement kernels with backend selection at import time.

The compiled extension (`rndcnn.kernels._fastcore`, built from Cython) is
used when present; otherwise the numpy fallback takes over.  Both produce
byte-identical results, so which one is active never changes numbers,
only speed.  Set RNDCNN_KERNELS=fallback or =compiled to force a choice
(forcing `compiled` without a built extension is an import error).

`benchmarks/bench_kernels.py` compares the two.
"""

import os

from rndcnn.kernels import fallback

try:
    from rndcnn.kernels import _fastcore
except ImportError:
    _fastcore = None

_forced = os.environ.get("RNDCNN_KERNELS", "").strip().lower()
if _forced == "fallback":
    _active = fallback
elif _forced == "compiled":
    if _fastcore is None:
        raise ImportError(
            "RNDCNN_KERNELS=compiled but the extension is not built; "
            "run `pip install -e . --no-build-isolation` or "
            "`python setup.py build_ext --inplace`"
        )
    _active = _fastcore
elif _forced:
    raise ImportError(f"RNDCNN_KERNELS must be 'compiled' or 'fallback', got {_forced!r}")
else:
    _active = _fastcore if _fastcore is not None else fallback

BACKEND = "compiled" if _active is _fastcore else "fallback"

im2col = _active.im2col
col2im = _active.col2im
maxpool2x2 = _active.maxpool2x2
maxpool2x2_backward = _active.maxpool2x2_backward
