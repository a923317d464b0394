"""Deterministic random streams.

One master seed drives the whole engine.  Independent purposes (weight
initialization, epoch shuffling, per-sample augmentation) get their own
streams derived through `numpy.random.SeedSequence` spawn keys, which are
documented to be collision-free.  The underlying bit generator is Philox,
a counter-based generator, so a stream is a pure function of
(seed, derivation path) within one build of the engine.

Derivation paths used by the engine:

    Rng(seed).child(STREAM_INIT)                 weight initialization
    Rng(seed).child(STREAM_SHUFFLE, epoch)       epoch shuffle order
    Rng(seed).child(STREAM_AUGMENT, epoch, i)    augmentation of sample i

Cross-build (numpy version) bit equality of the streams is not promised,
only determinism within one build.
"""

import numpy as np

STREAM_INIT = 0
STREAM_SHUFFLE = 1
STREAM_AUGMENT = 2


class Rng:
    """Owned random stream. Never share one instance across tasks."""

    def __init__(self, seed: int, _path: tuple[int, ...] = ()):
        if not 0 <= int(seed) < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed!r}")
        self.seed = int(seed)
        self.path = _path
        self._gen = np.random.Generator(
            np.random.Philox(np.random.SeedSequence(self.seed, spawn_key=_path))
        )

    def child(self, *path: int) -> "Rng":
        """Derive an independent stream for a sub-purpose."""
        return Rng(self.seed, self.path + tuple(int(p) for p in path))

    def uniform(self, lo: float, hi: float, shape=None, dtype=np.float32) -> np.ndarray:
        out = self._gen.uniform(lo, hi, size=shape)
        return np.asarray(out, dtype=dtype)

    def normal(self, shape=None, dtype=np.float32) -> np.ndarray:
        return np.asarray(self._gen.standard_normal(size=shape), dtype=dtype)

    def permutation(self, n: int) -> np.ndarray:
        return self._gen.permutation(n)

    def integers(self, lo: int, hi: int, shape=None) -> np.ndarray:
        return self._gen.integers(lo, hi, size=shape)

    def __repr__(self) -> str:
        return f"Rng(seed={self.seed}, path={self.path})"
