"""Counter-based seeding and index-ordered Monte Carlo estimation.

Sample ``i`` of a run always draws its randomness from
``derive_seed(master_seed, i)``, so results never depend on how samples are
scheduled across workers. Reductions happen after all samples are collected,
in index order.

``derive_seed`` is the SplitMix64 finalizer applied to
``master ^ ((index + 1) * 0x9E3779B97F4A7C15 mod 2^64)``; the finalizer uses
the shifts 30/27/31 and multipliers 0xBF58476D1CE4E5B9, 0x94D049BB133111EB.
For a fixed master the map is a bijection of the index, so distinct indices
never collide.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np

from .errors import KernelError

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15


def _mix64(z: int) -> int:
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & MASK64
    return z ^ (z >> 31)


def derive_seed(master: int, index: int) -> int:
    """Deterministic 64-bit child seed for ``index`` under ``master``."""
    z = (master & MASK64) ^ (((index + 1) * GOLDEN) & MASK64)
    return _mix64(z)


@dataclass(frozen=True)
class EstimatorConfig:
    n_samples: int
    master_seed: int
    workers: int = 1  # scheduling only; never changes results

    def __post_init__(self):
        if self.n_samples < 2:
            raise ValueError("n_samples must be >= 2")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")


@dataclass(frozen=True)
class SummaryStats:
    n: int
    mean: float
    variance: float
    stderr: float
    histogram: tuple[np.ndarray, np.ndarray] | None = field(default=None, compare=False)

    def to_dict(self) -> dict:
        out = {"estimate": self.mean, "stderr": self.stderr, "n": self.n,
               "variance": self.variance}
        if self.histogram is not None:
            edges, counts = self.histogram
            out["histogram"] = {"edges": [float(e) for e in edges],
                                "counts": [int(c) for c in counts]}
        return out


def summarize(values, bins=None) -> SummaryStats:
    """Mean, unbiased variance and standard error of ``values`` in given order.

    ``bins`` (array of edges) attaches a histogram.
    """
    x = np.asarray(values, dtype=float)
    n = x.size
    mean = float(np.mean(x))
    var = float(np.var(x, ddof=1)) if n > 1 else 0.0
    hist = None
    if bins is not None:
        counts, edges = np.histogram(x, bins=bins)
        hist = (edges, counts)
    return SummaryStats(n=n, mean=mean, variance=var, stderr=float(np.sqrt(var / n)),
                        histogram=hist)


def sample_seeds(config: EstimatorConfig) -> list[int]:
    return [derive_seed(config.master_seed, i) for i in range(config.n_samples)]


def map_samples(config: EstimatorConfig, kernel: Callable[[int], object]) -> list:
    """Run ``kernel(seed_i)`` for every sample and return results in index order.

    Kernels must be pure functions of their seed and of immutable shared
    inputs. Heavy kernels release the GIL inside numba, so a thread pool
    gives real concurrency without pickling.
    """
    seeds = sample_seeds(config)

    def call(i):
        try:
            return kernel(seeds[i])
        except Exception as exc:  # noqa: BLE001 - re-raised with index
            raise KernelError(i, exc) from exc

    if config.workers == 1:
        return [call(i) for i in range(config.n_samples)]
    with ThreadPoolExecutor(max_workers=config.workers) as pool:
        return list(pool.map(call, range(config.n_samples)))


def run_estimator(config: EstimatorConfig, kernel) -> SummaryStats | dict[str, SummaryStats]:
    """Summaries of a scalar- or record-valued kernel over ``config.n_samples``."""
    results = map_samples(config, kernel)
    if isinstance(results[0], Mapping):
        keys = list(results[0])
        return {k: summarize([r[k] for r in results]) for k in keys}
    return summarize(results)


def jackknife_se(values: Sequence[float] | np.ndarray, statistic: Callable[[np.ndarray], float],
                 groups: int | None = None) -> float:
    """Delete-one (or delete-a-group) jackknife standard error of ``statistic``."""
    x = np.asarray(values)
    n = len(x)
    g = n if groups is None else min(groups, n)
    blocks = np.array_split(np.arange(n), g)
    mask = np.ones(n, dtype=bool)
    reps = np.empty(g)
    for j, b in enumerate(blocks):
        mask[b] = False
        reps[j] = statistic(x[mask])
        mask[b] = True
    return float(np.sqrt((g - 1) / g * np.sum((reps - reps.mean()) ** 2)))


def loo_variance_jackknife_se(values) -> float:
    """Closed-form delete-one jackknife SE of the unbiased sample variance."""
    x = np.asarray(values, dtype=float)
    n = x.size
    d = x - x.mean()
    s2 = np.sum(d * d)
    # leave-one-out centered sum of squares: s2 - d_i^2 * n / (n - 1)
    loo = (s2 - d * d * n / (n - 1)) / (n - 2)
    return float(np.sqrt((n - 1) / n * np.sum((loo - loo.mean()) ** 2)))
