"""Reproducible random streams for Monte Carlo analyses.

Streams are immutable tokens over the Philox 4x64-10 counter-based generator
(numpy's ``Philox`` bit generator keyed directly, bypassing SeedSequence).
A draw is fully determined by (seed, substream, draw index). Substreams are
derived per variable and per trial-chunk of :data:`CHUNK` draws, so sampled
output never depends on how work is partitioned across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

CHUNK = 4096

_MASK64 = (1 << 64) - 1


@dataclass(frozen=True)
class RandomStream:
    """An immutable (seed, substream) token; generators are created per use."""

    seed: int
    substream: int = 0

    def generator(self) -> np.random.Generator:
        key = (self.seed & _MASK64, self.substream & _MASK64)
        return np.random.Generator(np.random.Philox(key=key))

    def derive(self, variable: int, chunk: int = 0) -> "RandomStream":
        """Substream for one variable's trial chunk (4096 trials per chunk)."""
        return replace(self, substream=self.substream + (variable << 32) + chunk)


def chunked_uniforms(stream: RandomStream, variable: int, n: int) -> np.ndarray:
    """n uniform [0,1) draws for one variable, chunked for partition independence."""
    out = np.empty(n)
    for c in range(math.ceil(n / CHUNK)):
        lo = c * CHUNK
        hi = min(n, lo + CHUNK)
        out[lo:hi] = stream.derive(variable, c).generator().random(hi - lo)
    return out


def chunked_normals(stream: RandomStream, variable: int, n: int) -> np.ndarray:
    """n standard normal draws for one variable, chunked like chunked_uniforms."""
    out = np.empty(n)
    for c in range(math.ceil(n / CHUNK)):
        lo = c * CHUNK
        hi = min(n, lo + CHUNK)
        out[lo:hi] = stream.derive(variable, c).generator().standard_normal(hi - lo)
    return out
