"""Seedable random sources and Normal sampling.

Generator contract (part of the reproducibility promise for CSV output):
PCG64 from numpy, seeded through ``numpy.random.SeedSequence(seed,
spawn_key=(block,))``. A uniform is built from the top 53 bits ``m`` of one
raw 64-bit output as ``(m + 0.5) / 2**53``, which lies strictly inside
(0, 1) without rejection.
"""

from enum import Enum

import numpy as np

from .scalardist import normal_ppf

_SCALE = 1.0 / 9007199254740992.0  # 2**-53


class Sampler(str, Enum):
    EXACT = "exact"
    CLT = "clt"


class RandomStream:
    """Single-owner uniform stream; not safe to share between threads.

    ``block`` selects an independent sub-stream of the same seed, which is
    how generation splits work into blocks with reproducible output.
    """

    def __init__(self, seed: int, block: int | None = None):
        seed = int(seed)
        if not 0 <= seed < 2**64:
            raise ValueError(f"seed must be a 64-bit unsigned integer, got {seed}")
        self.seed = seed
        self.block = block
        spawn_key = () if block is None else (int(block),)
        self._bitgen = np.random.PCG64(np.random.SeedSequence(seed, spawn_key=spawn_key))

    def uniforms(self, size) -> np.ndarray:
        raw = self._bitgen.random_raw(size)
        return ((raw >> np.uint64(11)).astype(np.float64) + 0.5) * _SCALE

    def next_uniform(self) -> float:
        return float(self.uniforms(1)[0])

    def standard_normals(self, size) -> np.ndarray:
        """Exact N(0, 1) draws by inverting the Normal CDF at open uniforms."""
        return normal_ppf(self.uniforms(size))

    def standard_normal(self) -> float:
        return float(self.standard_normals(1)[0])

    def standard_normals_clt(self, size) -> np.ndarray:
        """Sum of twelve uniforms minus six, one per output value.

        Mean 0, variance 1, support [-6, 6]. Consumes 12 uniforms per value.
        """
        shape = (size,) if np.ndim(size) == 0 else tuple(size)
        u = self.uniforms(shape + (12,))
        return clt_normal(u)

    def standard_normal_clt(self) -> float:
        return float(self.standard_normals_clt(1)[0])


def clt_normal(u) -> np.ndarray:
    """Map uniforms (last axis of length 12) to approximate normals."""
    return np.sum(u, axis=-1) - 6.0


def next_uniform(stream: RandomStream) -> float:
    return stream.next_uniform()


def standard_normal(stream: RandomStream) -> float:
    return stream.standard_normal()


def standard_normal_clt(stream: RandomStream) -> float:
    return stream.standard_normal_clt()


def normals(stream: RandomStream, shape, sampler=Sampler.EXACT) -> np.ndarray:
    if Sampler(sampler) is Sampler.CLT:
        return stream.standard_normals_clt(shape)
    return stream.standard_normals(shape)


def mvn_samples(factor, stream: RandomStream, n: int, sampler=Sampler.EXACT) -> np.ndarray:
    """``n`` rows of ``F @ z`` with ``z`` i.i.d. standard normal; shape (n, p).

    Normals are drawn row-major, so the first row equals what
    :func:`mvn_sample` would have returned from the same stream state.
    """
    F = np.asarray(getattr(factor, "entries", factor), dtype=np.float64)
    z = normals(stream, (n, F.shape[0]), sampler)
    # Fixed accumulation order instead of BLAS so results do not depend on
    # the linked library or its thread count.
    x = np.zeros((n, F.shape[0]))
    for j in range(F.shape[1]):
        x += z[:, j, None] * F[None, :, j]
    return x


def mvn_sample(factor, stream: RandomStream, sampler=Sampler.EXACT) -> np.ndarray:
    return mvn_samples(factor, stream, 1, sampler)[0]
