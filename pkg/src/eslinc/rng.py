"""Deterministic random streams.

Every random draw in the package is a 64-bit Philox output turned into a
double.  Philox is counter-based, keyed here by ``(seed, stream_id)``, which
gives two guarantees the experiments lean on:

* the same ``(seed, stream_id)`` reproduces the identical sequence, on any
  machine and on either chain backend;
* distinct ``stream_id`` values are independent streams, so sweep cells and
  parallel chains never share randomness.

Uniforms are mapped from the raw 64-bit words as ``((raw >> 11) + 0.5) *
2**-53``, i.e. strictly inside (0,1) — the truncated-normal inverse and
``ndtri`` both need open-interval inputs.  Normal variates are produced by
inversion from the same uniform stream (one word per normal), which is what
lets the compiled and pure-Python chain kernels consume bit-identical
randomness.
"""

import numpy as np
from numpy.random import Philox

from .errors import ConfigurationError

_INV_2_53 = 1.0 / 9007199254740992.0  # 2**-53


class RngStream:
    """A named, reproducible stream of uniform doubles.

    Attributes
    ----------
    seed, stream_id : int
        64-bit identifiers; together they key the underlying Philox
        generator.
    counter : int
        Number of 64-bit words consumed so far (monotone draw index).
    """

    def __init__(self, seed: int = 42, stream_id: int = 0):
        if not (0 <= int(seed) < 2**64) or not (0 <= int(stream_id) < 2**64):
            raise ConfigurationError("seed and stream_id must be 64-bit unsigned integers")
        self.seed = int(seed)
        self.stream_id = int(stream_id)
        self.counter = 0
        self._bitgen = Philox(key=np.array([self.seed, self.stream_id], dtype=np.uint64))

    def __repr__(self):
        return f"RngStream(seed={self.seed}, stream_id={self.stream_id}, counter={self.counter})"

    @property
    def bit_generator(self):
        """The underlying Philox bit generator (for compiled kernels)."""
        return self._bitgen

    def note_raw_draws(self, n: int):
        """Record ``n`` words consumed directly from the bit generator
        (compiled kernels draw without going through this class)."""
        self.counter += int(n)

    def raw(self, n: int) -> np.ndarray:
        """``n`` raw 64-bit words."""
        out = self._bitgen.random_raw(n)
        self.counter += int(n)
        return out

    def uniforms(self, n: int) -> np.ndarray:
        """``n`` uniforms, strictly inside (0,1)."""
        raw = self.raw(n)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _INV_2_53

    def normals(self, n: int) -> np.ndarray:
        """``n`` standard normals by inversion (consumes ``n`` words)."""
        from scipy.special import ndtri

        return ndtri(self.uniforms(n))
