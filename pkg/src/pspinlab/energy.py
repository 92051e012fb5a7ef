"""Hamiltonian evaluation and incremental single-spin-flip updates."""

from __future__ import annotations

import numpy as np

from . import _kernels
from .errors import IndexOutOfRange
from .tensor import TensorStack, as_spins

RESYNC_EVERY = 4096


def energy(g: TensorStack, sigma) -> float:
    """H_N(sigma; g) = <J(sigma), g>, summed degree-major, tuples row-major."""
    s = as_spins(sigma, g.n)
    return float(_kernels.stack_energy(g.data, g.offsets, g.degrees, g.scales, g.n, s))


def _d2_index(g: TensorStack) -> int:
    return g.spec.degrees.index(2) if 2 in g.spec.degrees else -1


class FlipEngine:
    """Mutable spin state with cached energy, magnetization and local fields.

    Degree-2 flips cost O(N) through the cached fields; higher degrees
    re-read the tuples that contain the flipped index. The cached energy is
    recomputed from scratch every ``resync_every`` flips to bound drift.
    """

    def __init__(self, g: TensorStack, sigma0, resync_every: int = RESYNC_EVERY):
        self.g = g
        self.sigma = as_spins(sigma0, g.n).copy()
        self.resync_every = resync_every
        self._d2 = _d2_index(g)
        self.fields = np.zeros(g.n)
        self.energy = float(_kernels.resync(g.data, g.offsets, g.degrees, g.scales, g.n,
                                            self.sigma, self.fields, self._d2))
        self.magnetization = int(self.sigma.sum())
        self.flips = 0
        self.touched = 0  # tuples/fields read by flip deltas

    def flip(self, k: int) -> float:
        """Negate spin ``k``; return the new energy."""
        g = self.g
        if not 0 <= k < g.n:
            raise IndexOutOfRange(f"spin index {k} outside [0, {g.n})")
        delta, touched = _kernels.flip_delta(g.data, g.offsets, g.degrees, g.scales, g.n,
                                             self.sigma, self.fields, self._d2, k)
        _kernels.apply_flip(g.data, g.offsets, g.n, self.sigma, self.fields, self._d2, k)
        self.energy += delta
        self.magnetization += 2 if self.sigma[k] > 0 else -2
        self.touched += touched
        self.flips += 1
        if self.flips % self.resync_every == 0:
            self.resync()
        return self.energy

    def resync(self) -> float:
        g = self.g
        self.energy = float(_kernels.resync(g.data, g.offsets, g.degrees, g.scales, g.n,
                                            self.sigma, self.fields, self._d2))
        return self.energy

    @property
    def spins(self) -> np.ndarray:
        return self.sigma.astype(np.int8)


def engine_new(g: TensorStack, sigma0) -> FlipEngine:
    return FlipEngine(g, sigma0)


def engine_flip(engine: FlipEngine, k: int) -> float:
    return engine.flip(k)
