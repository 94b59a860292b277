"""Reproducible random streams for problem generation.

Uniform variates come from numpy's PCG64 bit generator seeded through
``SeedSequence``; both are fixed, documented algorithms whose output does not
depend on the platform.  Gaussian variates are produced here with the
Marsaglia polar method rather than numpy's ziggurat sampler so that the
transformation from uniforms to normals is fully under our control.

Streams are split by name: ``stream(seed, "lasso_fat", "A")`` always yields
the same sequence regardless of what other streams were drawn before it.
"""

from __future__ import annotations

import zlib

import numpy as np

__all__ = ["Stream", "stream"]


def _key(label: str) -> int:
    return zlib.crc32(label.encode("utf-8"))


class Stream:
    """A named, independently seeded random stream."""

    def __init__(self, seed: int, *labels: str):
        if seed < 0 or seed >= 2**64:
            raise ValueError(f"seed must be an unsigned 64-bit integer, got {seed}")
        entropy = [int(seed) & 0xFFFFFFFF, int(seed) >> 32] + [_key(lb) for lb in labels]
        self._gen = np.random.Generator(np.random.PCG64(np.random.SeedSequence(entropy)))

    def uniform(self, size=None, low=0.0, high=1.0):
        u = self._gen.random(size)
        return low + (high - low) * u

    def normal(self, size=None, loc=0.0, scale=1.0):
        """Gaussian samples by the polar method, drawn in fixed-size batches."""
        count = 1 if size is None else int(np.prod(size))
        out = np.empty(count)
        filled = 0
        while filled < count:
            need = count - filled
            batch = max(16, int(need * 1.3) + 8)
            u = 2.0 * self._gen.random(batch) - 1.0
            v = 2.0 * self._gen.random(batch) - 1.0
            w = u * u + v * v
            ok = (w > 0.0) & (w < 1.0)
            u, v, w = u[ok], v[ok], w[ok]
            factor = np.sqrt(-2.0 * np.log(w) / w)
            pairs = np.empty(2 * u.size)
            pairs[0::2] = u * factor
            pairs[1::2] = v * factor
            take = min(need, pairs.size)
            out[filled:filled + take] = pairs[:take]
            filled += take
        out = loc + scale * out
        if size is None:
            return float(out[0])
        return out.reshape(size)

    def bernoulli(self, p, size=None):
        return self._gen.random(size) < p

    def permutation(self, n: int):
        # Fisher-Yates driven by our own uniforms
        idx = np.arange(n)
        u = self._gen.random(n)
        for i in range(n - 1, 0, -1):
            j = int(u[i] * (i + 1))
            idx[i], idx[j] = idx[j], idx[i]
        return idx

    def orthogonal(self, n: int):
        """Haar-distributed orthogonal matrix via QR of a Gaussian matrix."""
        g = self.normal((n, n))
        q, r = np.linalg.qr(g)
        return q * np.sign(np.diag(r))


def stream(seed: int, *labels: str) -> Stream:
    return Stream(seed, *labels)
