"""Field response M_N(h) and the decay of slice maxima away from zero magnetization."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..errors import EmptyBand
from ..mixture import MixtureSpec
from ..montecarlo import EstimatorConfig, SummaryStats, map_samples, summarize
from ..solve import band_levels, field_max, magnetization_profile, slice_max
from ._common import Z95, disorder

DEFAULT_H_GRID = (-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0)
DEFAULT_EPS_GRID = (0.1, 0.2, 0.3, 0.4)
CONVEXITY_TOL = 1e-12


@dataclass
class FieldCurve:
    n: int
    h_grid: tuple[float, ...]
    stats: list[SummaryStats]
    e_hat: SummaryStats
    symmetry: list[dict]
    slope: SummaryStats | None
    slope_h: float | None
    convexity_violations: int

    def to_dict(self) -> dict:
        return {
            "N": self.n,
            "points": [{"h": h, "M": s.to_dict()} for h, s in zip(self.h_grid, self.stats)],
            "E_N": self.e_hat.to_dict(),
            "symmetry": self.symmetry,
            "slope_at_0": None if self.slope is None else {"h": self.slope_h, **self.slope.to_dict()},
            "convexity_violations": self.convexity_violations,
        }


def field_curve(spec: MixtureSpec, n: int, h_grid=DEFAULT_H_GRID,
                config: EstimatorConfig | None = None, cap: int | None = None) -> FieldCurve:
    """(1/N) max_sigma (H + h <sigma, 1>) for every h from one sweep per sample."""
    config = config or EstimatorConfig(100, 0)
    hs = np.array(sorted(float(h) for h in h_grid))
    if not np.array_equal(hs, -hs[::-1]):
        raise ValueError("h_grid must be symmetric about 0")

    def kernel(seed):
        prof = magnetization_profile(disorder(spec, n, seed), cap)
        vals = np.array([field_max(prof, h)[0] for h in hs]) / n
        return vals, prof.ground_value / n

    out = map_samples(config, kernel)
    values = np.array([v for v, _ in out])
    ground = np.array([e for _, e in out])

    violations = 0
    for a, b, c in zip(range(len(hs)), range(1, len(hs)), range(2, len(hs))):
        lam = (hs[c] - hs[b]) / (hs[c] - hs[a])
        chord = lam * values[:, a] + (1 - lam) * values[:, c]
        violations += int(np.count_nonzero(values[:, b] > chord + CONVEXITY_TOL))

    symmetry = []
    for k, h in enumerate(hs):
        if h > 0:
            j = int(np.flatnonzero(hs == -h)[0])
            d = summarize(values[:, k] - values[:, j])
            symmetry.append({"h": float(h), **d.to_dict(),
                             "within_3se": abs(d.mean) <= 3 * d.stderr})
    slope, slope_h = None, None
    if np.any(hs > 0):
        h1 = float(hs[hs > 0].min())
        k, j = int(np.flatnonzero(hs == h1)[0]), int(np.flatnonzero(hs == -h1)[0])
        slope, slope_h = summarize((values[:, k] - values[:, j]) / (2 * h1)), h1
    return FieldCurve(n, tuple(float(h) for h in hs), [summarize(values[:, k]) for k in range(len(hs))],
                      summarize(ground), symmetry, slope, slope_h, violations)


@dataclass
class SliceDecay:
    n: int
    eps_grid: tuple[float, ...]
    gaps: list[SummaryStats]
    max_gap: float
    ordering: list[dict]
    c_hat: float
    c_se: float
    r2: float
    gap_samples: np.ndarray

    @property
    def strictly_ordered(self) -> bool:
        return all(o["ordered"] for o in self.ordering)

    def to_dict(self) -> dict:
        return {"N": self.n,
                "points": [{"eps": e, "gap": s.to_dict()} for e, s in zip(self.eps_grid, self.gaps)],
                "max_sample_gap": self.max_gap, "ordering": self.ordering,
                "fit": {"c_hat": self.c_hat, "c_se": self.c_se, "r2": self.r2}}


def fit_quadratic_decay(eps, mean, se):
    """Weighted least squares of gap = -c eps^2; returns (c, se(c), R^2)."""
    x = np.asarray(eps) ** 2
    y = np.asarray(mean)
    s = np.asarray(se)
    positive = s[s > 0]
    w = 1 / np.maximum(s, positive.min() if positive.size else 1.0) ** 2
    c = -float(np.sum(w * x * y) / np.sum(w * x * x))
    ybar = np.sum(w * y) / np.sum(w)
    ss_res = np.sum(w * (y + c * x) ** 2)
    ss_tot = np.sum(w * (y - ybar) ** 2)
    r2 = float(1 - ss_res / ss_tot) if ss_tot > 0 else 1.0
    return c, float(1 / math.sqrt(np.sum(w * x * x))), r2


def populated_eps(n: int, eps_grid=DEFAULT_EPS_GRID) -> tuple[float, ...]:
    """The eps values of ``eps_grid`` whose band T(eps) has a level at this N."""
    return tuple(float(e) for e in eps_grid if 0 < e <= 0.5 and band_levels(n, e, 2 * e))


def slice_decay(spec: MixtureSpec, n: int, eps_grid=DEFAULT_EPS_GRID,
                config: EstimatorConfig | None = None, cap: int | None = None) -> SliceDecay:
    """Paired gaps (1/N)(max over T(eps) - global max) and their eps^2 fit."""
    config = config or EstimatorConfig(100, 0)
    eps_grid = tuple(float(e) for e in eps_grid)
    empty = [e for e in eps_grid
             if not 0 < e <= 0.5 or not band_levels(n, e, 2 * e)]
    if empty:
        raise EmptyBand(f"no magnetization level for N={n} at eps {empty}")

    def kernel(seed):
        prof = magnetization_profile(disorder(spec, n, seed), cap)
        top = prof.ground_value
        return np.array([slice_max(prof, e)[0] - top for e in eps_grid]) / n

    gaps = np.array(map_samples(config, kernel))
    stats = [summarize(gaps[:, k]) for k in range(len(eps_grid))]
    ordering = []
    for k in range(len(eps_grid) - 1):
        d = summarize(gaps[:, k + 1] - gaps[:, k])
        ordering.append({"eps": [eps_grid[k], eps_grid[k + 1]], **d.to_dict(),
                         "ordered": d.mean + Z95 * d.stderr < 0})
    c, c_se, r2 = fit_quadratic_decay(eps_grid, [s.mean for s in stats], [s.stderr for s in stats])
    return SliceDecay(n, eps_grid, stats, float(gaps.max()), ordering, c, c_se, r2, gaps)

