"""Exact hypercube maximization resolved by magnetization level, plus annealing.

One Gray-code sweep produces a :class:`MagnetizationProfile`; the ground
state, slice maxima, field maxima and threshold maxima are all read off it.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .energy import RESYNC_EVERY, energy
from .errors import CapExceeded, EmptyBand
from .montecarlo import derive_seed
from .tensor import TensorStack

DEFAULT_EXACT_CAP = 26
# States whose energies differ by less than this count as tied; the first
# visited wins. Keeps tie-breaking stable against incremental rounding.
TIE_TOL = 1e-9
BAND_TOL = 1e-9


def exact_cap(override: int | None = None) -> int:
    """Largest N solved exactly: ``override``, else $PSPINLAB_CAP, else 26."""
    if override is not None:
        return int(override)
    env = os.environ.get("PSPINLAB_CAP")
    return int(env) if env else DEFAULT_EXACT_CAP


def code_to_spins(code: int, n: int) -> np.ndarray:
    """Bitmask (bit i set <=> sigma_i = -1) to an int8 spin vector."""
    bits = (int(code) >> np.arange(n)) & 1
    return (1 - 2 * bits).astype(np.int8)


def spins_to_code(sigma) -> int:
    s = np.asarray(sigma)
    return int(sum(1 << i for i in np.flatnonzero(s < 0)))


def gray_sequence(n: int):
    """Yield (step, flipped index or None, bitmask) in the sweep order."""
    code = 0
    yield 0, None, code
    for step in range(1, 1 << n):
        k = (step & -step).bit_length() - 1
        code ^= 1 << k
        yield step, k, code


@dataclass(frozen=True)
class GroundState:
    sigma_star: np.ndarray
    value: float
    exact: bool


@dataclass(frozen=True, eq=False)
class MagnetizationProfile:
    """Per-level maxima of H; index j corresponds to magnetization m = 2j - N.

    ``steps`` records when each level's argmax was first visited in the
    sweep; ``counts`` how many states the sweep visited per level.
    """

    n: int
    values: np.ndarray
    codes: np.ndarray
    steps: np.ndarray
    counts: np.ndarray
    ground_index: int

    @property
    def magnetizations(self) -> np.ndarray:
        return 2 * np.arange(self.n + 1) - self.n

    def sigma(self, j: int) -> np.ndarray:
        return code_to_spins(self.codes[j], self.n)

    @property
    def ground_value(self) -> float:
        return float(self.values[self.ground_index])

    def ground_state(self) -> GroundState:
        return GroundState(self.sigma(self.ground_index), self.ground_value, True)

    def mirror(self) -> "MagnetizationProfile":
        """Profile with every magnetization negated (argmax spins negated)."""
        full = (1 << self.n) - 1
        return MagnetizationProfile(self.n, self.values[::-1].copy(),
                                    (self.codes[::-1] ^ full).copy(), self.steps[::-1].copy(),
                                    self.counts[::-1].copy(), self.n - self.ground_index)


def _pick(profile: MagnetizationProfile, levels, objective) -> int:
    """Sequential max over ``levels`` in visit order with the tie rule."""
    best_j, best = -1, -math.inf
    for j in sorted(levels, key=lambda j: profile.steps[j]):
        if objective[j] > best + TIE_TOL:
            best_j, best = j, objective[j]
    return best_j


def magnetization_profile(g: TensorStack, cap: int | None = None) -> MagnetizationProfile:
    """Exhaustive Gray-code sweep over all 2^N states, starting at all-plus."""
    limit = exact_cap(cap)
    if g.n > limit:
        raise CapExceeded(f"N={g.n} exceeds exact-search cap {limit}")
    if g.spec.degrees == (2,):
        best, codes, steps, counts, g_code, _ = _kernels.sweep_profile_quadratic(
            g.data, g.scales[0], g.n, TIE_TOL, RESYNC_EVERY)
    else:
        best, codes, steps, counts, g_code, _ = _kernels.sweep_profile(
            g.data, g.offsets, g.degrees, g.scales, g.n, TIE_TOL, RESYNC_EVERY)
    # report exact (non-incremental) values at the stored argmaxes
    values = np.array([energy(g, code_to_spins(c, g.n)) for c in codes])
    ground = g.n - bin(int(g_code)).count("1")
    return MagnetizationProfile(g.n, values, codes, steps, counts, ground)


def ground_state_exact(g: TensorStack, cap: int | None = None) -> GroundState:
    return magnetization_profile(g, cap).ground_state()


def band_levels(n: int, lo: float, hi: float) -> list[int]:
    """Level indices j with |m|/N in [lo, hi], m = 2j - N."""
    absm = np.abs(2 * np.arange(n + 1) - n)
    ok = (absm >= n * lo - BAND_TOL) & (absm <= n * hi + BAND_TOL)
    return list(np.flatnonzero(ok))


def _band_max(profile, levels, what):
    if not levels:
        raise EmptyBand(f"no magnetization level with N={profile.n} in {what}")
    j = _pick(profile, levels, profile.values)
    return float(profile.values[j]), profile.sigma(j)


def slice_max(profile: MagnetizationProfile, eps: float):
    """Max of H over |m|/N in [eps, 2 eps]; returns (value, argmax spins)."""
    if not 0 < eps <= 0.5:
        raise ValueError("eps must lie in (0, 0.5]")
    return _band_max(profile, band_levels(profile.n, eps, 2 * eps), f"[{eps}, {2 * eps}]")


def threshold_max(profile: MagnetizationProfile, delta: float):
    """Max of H over |m|/N >= delta."""
    if not 0 < delta <= 1:
        raise ValueError("delta must lie in (0, 1]")
    return _band_max(profile, band_levels(profile.n, delta, 1.0), f"[{delta}, 1]")


def field_max(profile: MagnetizationProfile, h: float):
    """max over sigma of H(sigma) + h * sum(sigma), from the level maxima."""
    objective = profile.values + h * profile.magnetizations
    j = _pick(profile, range(profile.n + 1), objective)
    return float(objective[j]), profile.sigma(j)


def anneal(g: TensorStack, steps: int = 100_000, t_start: float = 2.0, t_end: float = 0.01,
           seed: int = 0) -> GroundState:
    """Simulated annealing with geometric cooling; never claims exactness."""
    rng = np.random.Generator(np.random.PCG64(derive_seed(seed, 0)))
    sigma0 = rng.choice(np.array([-1.0, 1.0]), size=g.n)
    proposals = rng.integers(0, g.n, size=steps)
    uniforms = rng.random(steps)
    temps = t_start * (t_end / t_start) ** (np.arange(steps) / max(steps - 1, 1))
    best = _kernels.anneal_run(g.data, g.offsets, g.degrees, g.scales, g.n, sigma0,
                               proposals, uniforms, temps, RESYNC_EVERY)
    sigma = best.astype(np.int8)
    return GroundState(sigma, energy(g, sigma), False)


def solve(g: TensorStack, cap: int | None = None, **anneal_kwargs) -> GroundState:
    """Exact below the cap, annealing above it."""
    if g.n <= exact_cap(cap):
        return ground_state_exact(g, cap)
    return anneal(g, **anneal_kwargs)
