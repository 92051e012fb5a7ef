"""Fluctuations of the ground-state energy across system sizes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..mixture import MixtureSpec
from ..montecarlo import (EstimatorConfig, SummaryStats, derive_seed, loo_variance_jackknife_se,
                          map_samples, summarize)
from ..solve import ground_state_exact
from ._common import Z95, disorder

DEFAULT_S_GRID = (1.0, 2.0, 3.0)


@dataclass
class SizePoint:
    n: int
    f: SummaryStats
    var_over_n: float
    var_over_n_se: float
    tails: list[dict]

    def to_dict(self) -> dict:
        return {"N": self.n, "f": self.f.to_dict(), "var_over_N": self.var_over_n,
                "var_over_N_se": self.var_over_n_se, "tails": self.tails}


@dataclass
class SuperconcentrationReport:
    points: list[SizePoint]
    trend: list[dict]

    def to_dict(self) -> dict:
        return {"points": [p.to_dict() for p in self.points], "trend": self.trend}


def tail_table(f_over_n: np.ndarray, n: int, s_grid) -> list[dict]:
    """Frequency of |f/N - E_N| > s / sqrt(N) against the bound 2 exp(-s^2 / 2)."""
    dev = np.abs(f_over_n - f_over_n.mean()) * math.sqrt(n)
    rows = []
    for s in s_grid:
        hit = (dev > s).astype(float)
        freq = float(hit.mean())
        se = float(math.sqrt(freq * (1 - freq) / len(hit)))
        bound = 2 * math.exp(-s * s / 2)
        rows.append({"s": float(s), "frequency": freq, "stderr": se, "bound": bound,
                     "within_bound": freq <= bound + 3 * se})
    return rows


def superconcentration(spec: MixtureSpec, n_list, config: EstimatorConfig | None = None,
                       s_grid=DEFAULT_S_GRID, cap: int | None = None) -> SuperconcentrationReport:
    """Var[f_N]/N per size with jackknife SEs, Lipschitz tail checks and the
    size trend (each consecutive pair and first vs last)."""
    config = config or EstimatorConfig(100, 0)
    points = []
    for n in n_list:
        sub = EstimatorConfig(config.n_samples, derive_seed(config.master_seed, n), config.workers)
        f = np.array(map_samples(sub, lambda seed: ground_state_exact(disorder(spec, n, seed), cap).value))
        stats = summarize(f)
        points.append(SizePoint(n, stats, stats.variance / n, loo_variance_jackknife_se(f) / n,
                                tail_table(f / n, n, s_grid)))

    pairs = list(zip(points, points[1:]))
    if len(points) > 2:
        pairs.append((points[0], points[-1]))
    trend = []
    for a, b in pairs:
        diff = b.var_over_n - a.var_over_n
        se = math.sqrt(a.var_over_n_se**2 + b.var_over_n_se**2)
        trend.append({"N": [a.n, b.n], "difference": diff, "stderr": se,
                      "decreasing_95": diff + Z95 * se < 0})
    return SuperconcentrationReport(points, trend)
