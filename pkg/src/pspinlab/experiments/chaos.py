"""Ground-state overlap decay under OU noise, its log-convexity and Hermite fit."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from ..errors import DegenerateCurve
from ..mixture import MixtureSpec, xi
from ..montecarlo import EstimatorConfig, SummaryStats, jackknife_se, map_samples, summarize
from ..solve import ground_state_exact
from ..tensor import ou_couple
from ._common import disorder_pair

DEFAULT_T_GRID = (0.0, 0.125, 0.25, 0.5, 1.0, 2.0)
VIOLATION_TOL = 1e-12


def overlap_bins(n: int) -> np.ndarray:
    """Histogram edges centred on the attainable overlaps -1, -1 + 2/N, ..., 1."""
    return np.linspace(-1 - 1 / n, 1 + 1 / n, n + 2)


def eps_schedule(phi: float) -> float | None:
    """1 / sqrt(log(1 / phi)), defined only for phi strictly inside (0, 1)."""
    if not 0 < phi < 1:
        return None
    return 1 / math.sqrt(math.log(1 / phi))


@dataclass(eq=False)
class ChaosCurve:
    """phi(t) = E xi(R_t) and E|R_t| on a grid of noise times.

    ``xi_samples`` / ``overlaps`` keep per-sample values (rows = samples) so
    that paired standard errors can be formed for differences along the grid.
    """

    spec: MixtureSpec | None
    n: int
    t_grid: tuple[float, ...]
    xi_stats: list[SummaryStats]
    abs_stats: list[SummaryStats] = field(default_factory=list)
    xi_samples: np.ndarray | None = None
    overlaps: np.ndarray | None = None
    histograms: list[tuple[np.ndarray, np.ndarray]] = field(default_factory=list)

    @classmethod
    def from_values(cls, t_grid, phi, stderr=None):
        """Curve from summary values alone (no per-sample data)."""
        stderr = np.zeros(len(phi)) if stderr is None else stderr
        stats = [SummaryStats(0, float(p), 0.0, float(s)) for p, s in zip(phi, stderr)]
        return cls(None, 0, tuple(float(t) for t in t_grid), stats)

    @property
    def phi(self) -> np.ndarray:
        return np.array([s.mean for s in self.xi_stats])

    @property
    def phi_se(self) -> np.ndarray:
        return np.array([s.stderr for s in self.xi_stats])

    def eps_table(self) -> list[dict]:
        return [{"alpha": t, "phi": p, "eps": eps_schedule(p)}
                for t, p in zip(self.t_grid, self.phi)]

    def to_dict(self) -> dict:
        points = []
        for k, t in enumerate(self.t_grid):
            pt = {"t": t, "phi": self.xi_stats[k].to_dict()}
            if self.abs_stats:
                pt["abs_overlap"] = self.abs_stats[k].to_dict()
            if self.histograms:
                edges, counts = self.histograms[k]
                pt["overlap_histogram"] = {"edges": [float(e) for e in edges],
                                           "counts": [int(c) for c in counts]}
            points.append(pt)
        return {"N": self.n, "mixture": str(self.spec), "points": points,
                "eps_schedule": self.eps_table()}


def chaos_curve(spec: MixtureSpec, n: int, t_grid=DEFAULT_T_GRID,
                config: EstimatorConfig | None = None, cap: int | None = None) -> ChaosCurve:
    """Estimate phi(t) with one disorder pair per sample shared by all t."""
    config = config or EstimatorConfig(100, 0)
    t_grid = tuple(float(t) for t in t_grid)

    def kernel(seed):
        g, gp = disorder_pair(spec, n, seed)
        s0 = ground_state_exact(g, cap).sigma_star.astype(np.int64)
        dots = np.empty(len(t_grid), dtype=np.int64)
        for k, t in enumerate(t_grid):
            if t == 0.0:
                dots[k] = n
            else:
                st = ground_state_exact(ou_couple(g, gp, t), cap).sigma_star
                dots[k] = int(s0 @ st)
        return dots

    overlaps = np.array(map_samples(config, kernel)) / n
    xi_samples = np.asarray(xi(spec, overlaps))
    bins = overlap_bins(n)
    return ChaosCurve(
        spec, n, t_grid,
        [summarize(xi_samples[:, k]) for k in range(len(t_grid))],
        [summarize(np.abs(overlaps[:, k])) for k in range(len(t_grid))],
        xi_samples, overlaps,
        [np.histogram(overlaps[:, k], bins=bins)[::-1] for k in range(len(t_grid))],
    )


def _paired_se(samples, weights, fallback_se):
    """SE of a linear combination of grid values, paired if samples exist."""
    if samples is not None:
        u = samples @ weights
        return float(np.std(u, ddof=1) / math.sqrt(len(u)))
    return float(math.sqrt(np.sum((weights * fallback_se) ** 2)))


def _z(violation, se):
    if violation <= VIOLATION_TOL:
        return 0.0
    return violation / se if se > 0 else math.inf


@dataclass
class ConvexityReport:
    monotone: list[dict]
    log_convexity: list[dict]
    eps_schedule: list[dict]

    @property
    def violations(self) -> list[dict]:
        return [v for v in self.monotone + self.log_convexity if v["violation"] > VIOLATION_TOL]

    @property
    def max_z(self) -> float:
        return max((v["z"] for v in self.violations), default=0.0)

    def to_dict(self) -> dict:
        return {"monotone": self.monotone, "log_convexity": self.log_convexity,
                "eps_schedule": self.eps_schedule, "n_violations": len(self.violations),
                "max_z": self.max_z}


def log_convexity_report(curve: ChaosCurve) -> ConvexityReport:
    """Check monotone decrease on adjacent pairs and discrete log-convexity on
    consecutive triples, each with a z-score against its propagated SE."""
    t = np.array(curve.t_grid)
    phi, se = curve.phi, curve.phi_se
    pos = np.flatnonzero(phi > 0)
    if pos.size < 3:
        raise DegenerateCurve("need at least 3 grid points with phi > 0")
    samples = curve.xi_samples

    monotone = []
    for a, b in zip(range(len(t)), range(1, len(t))):
        w = np.zeros(len(t))
        w[a], w[b] = -1.0, 1.0
        viol = float(phi[b] - phi[a])
        err = _paired_se(samples, w, se)
        monotone.append({"t": [float(t[a]), float(t[b])], "violation": viol, "stderr": err, "z": _z(viol, err)})

    convex = []
    for a, b, c in zip(pos, pos[1:], pos[2:]):
        lam = (t[c] - t[b]) / (t[c] - t[a])
        viol = float(math.log(phi[b]) - lam * math.log(phi[a]) - (1 - lam) * math.log(phi[c]))
        # delta method: d log(phi) = d phi / phi
        w = np.zeros(len(t))
        w[a], w[b], w[c] = -lam / phi[a], 1 / phi[b], -(1 - lam) / phi[c]
        err = _paired_se(samples, w, se)
        convex.append({"t": [float(t[a]), float(t[b]), float(t[c])], "violation": viol, "stderr": err,
                       "z": _z(viol, err)})
    return ConvexityReport(monotone, convex, curve.eps_table())


@dataclass
class HermiteFit:
    weights: np.ndarray
    residual_norm: float
    relative_residual: float
    sum_weights: float
    sum_weights_se: float | None

    def to_dict(self) -> dict:
        return {"weights": [float(w) for w in self.weights], "residual_norm": self.residual_norm,
                "relative_residual": self.relative_residual, "sum_weights": self.sum_weights,
                "sum_weights_se": self.sum_weights_se}


EXACT_WEIGHT = 1e6  # relative weight for points known without error


def _nnls_fit(t, phi, se, l_max):
    design = np.exp(-np.outer(t, np.arange(l_max)))
    positive = se[se > 0]
    if positive.size:
        w = np.where(se > 0, 1 / np.where(se > 0, se, 1.0), EXACT_WEIGHT / positive.min())
    else:
        w = np.ones_like(se)
    weights, _ = nnls(design * w[:, None], phi * w)
    return design, weights


def hermite_fit(curve: ChaosCurve, l_max: int, jackknife_groups: int = 20) -> HermiteFit:
    """Nonnegative fit phi(t) ~ sum_{l=1}^{L} w_l exp(-(l - 1) t).

    Points are weighted by 1/SE. Points with zero SE (phi(0) = 1) get a
    weight EXACT_WEIGHT times the largest finite one, which pins the fit to
    them up to NNLS round-off. The SE of sum(w) is a delete-a-group jackknife when per-sample data
    is available.
    """
    t = np.array(curve.t_grid)
    phi, se = curve.phi, curve.phi_se
    if np.count_nonzero(phi > 0) < l_max:
        raise DegenerateCurve(f"need at least {l_max} grid points with phi > 0")
    design, weights = _nnls_fit(t, phi, se, l_max)
    resid = float(np.linalg.norm(design @ weights - phi))
    sum_se = None
    if curve.xi_samples is not None:
        def stat(rows):
            m = rows.mean(axis=0)
            s = rows.std(axis=0, ddof=1) / math.sqrt(len(rows))
            return _nnls_fit(t, m, s, l_max)[1].sum()
        sum_se = jackknife_se(curve.xi_samples, stat, groups=jackknife_groups)
    return HermiteFit(weights, resid, resid / float(np.linalg.norm(phi)), float(weights.sum()),
                      sum_se)
