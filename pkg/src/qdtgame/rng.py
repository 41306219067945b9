"""Seeded random streams.

Every stochastic routine takes an explicit stream; there is no module-level
RNG. A stream wraps numpy's PCG64 seeded through ``SeedSequence``, so child
streams keyed by integers (generation, individual, group, ...) are
independent and reproducible on any platform. Uniform doubles are drawn in
blocks because per-call numpy overhead dominates scalar sampling.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 512


class Stream:
    __slots__ = ("_gen", "_buf", "_pos")

    def __init__(self, generator: np.random.Generator):
        self._gen = generator
        self._buf: list[float] = []
        self._pos = 0

    def random(self, size: int | None = None):
        """Next uniform double in [0, 1), or an array of ``size`` of them."""
        if size is not None:
            return np.fromiter((self.random() for _ in range(size)), dtype=float, count=size)
        if self._pos == len(self._buf):
            self._buf = self._gen.random(_BLOCK).tolist()
            self._pos = 0
        value = self._buf[self._pos]
        self._pos += 1
        return value

    def integers(self, n: int) -> int:
        """Uniform integer in ``range(n)``."""
        return int(self.random() * n)

    def seeds(self, n: int) -> list[int]:
        """Draw ``n`` 63-bit seeds for deriving sub-streams."""
        return [int(s) for s in self._gen.integers(0, 2**63 - 1, size=n, dtype=np.int64)]


Rng = Stream


def make_rng(seed: int, *keys: int) -> Stream:
    """Return the stream for ``seed`` extended by integer ``keys``."""
    if seed < 0 or any(k < 0 for k in keys):
        raise ValueError("seed and keys must be non-negative integers")
    seq = np.random.SeedSequence([int(seed), *map(int, keys)])
    return Stream(np.random.Generator(np.random.PCG64(seq)))


def child_seeds(rng: Stream, n: int) -> list[int]:
    return rng.seeds(n)
