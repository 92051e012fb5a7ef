"""Conditioning on the event {sigma*(g) = all-plus} through the gauge push-forward.

The law of g given sigma*(g) = 1 equals the law of sigma*(g).g, because the
sign-flip group acts transitively on the hypercube and preserves the
Gaussian law. Rejection sampling (acceptance 2^-N) is never used.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.stats import chi2

from ..energy import energy
from ..errors import EmptyBand
from ..mixture import MixtureSpec, xi
from ..montecarlo import EstimatorConfig, SummaryStats, derive_seed, map_samples, summarize
from ..solve import band_levels, ground_state_exact, magnetization_profile, slice_max
from ..tensor import TensorStack, check_entry_cap, gauge_transform, ou_couple
from .chaos import eps_schedule
from .landscape import DEFAULT_EPS_GRID, populated_eps, slice_decay
from ._common import disorder, disorder_pair

EHAT_STREAM = 0x45  # master-seed tweak for the independent E_N estimate


@dataclass(eq=False)
class BarycenterReport:
    n: int
    n_samples: int
    b_hat: TensorStack
    norm: float
    norm_se: float
    level1_bound: float
    alignment: SummaryStats
    e_hat: SummaryStats
    slice_features: list[dict]
    feature_c: float
    feature_r2: float
    permutation: dict

    @property
    def margin(self) -> float:
        return self.level1_bound - self.norm

    @property
    def alignment_z(self) -> float:
        se = math.hypot(self.alignment.stderr, self.e_hat.stderr)
        return abs(self.alignment.mean - self.e_hat.mean) / se

    def to_dict(self) -> dict:
        return {"N": self.n, "n": self.n_samples, "norm": self.norm, "norm_se": self.norm_se,
                "level1_bound": self.level1_bound, "margin": self.margin,
                "alignment": self.alignment.to_dict(), "E_N": self.e_hat.to_dict(),
                "alignment_z": self.alignment_z, "slice_features": self.slice_features,
                "feature_fit": {"C_hat": self.feature_c, "r2": self.feature_r2},
                "permutation": self.permutation}


def _independent_e_hat(spec, n, config, cap) -> SummaryStats:
    sub = EstimatorConfig(config.n_samples, derive_seed(config.master_seed, EHAT_STREAM),
                          config.workers)
    return summarize(map_samples(
        sub, lambda seed: ground_state_exact(disorder(spec, n, seed), cap).value / n))


def _permutation_check(rows: np.ndarray, n: int) -> dict:
    """Spread of the degree-2 off-diagonal barycenter entries around their common mean."""
    block = rows[:, : n * n].reshape(len(rows), n, n)
    off = block[:, ~np.eye(n, dtype=bool)]
    mean = off.mean(axis=0)
    se = off.std(axis=0, ddof=1) / math.sqrt(len(off))
    z = (mean - mean.mean()) / se
    stat = float(np.sum(z**2))
    return {"entries": int(mean.size), "common_mean": float(mean.mean()),
            "max_abs_z": float(np.max(np.abs(z))), "chi2": stat,
            "p_value": float(chi2.sf(stat, mean.size - 1))}


def barycenter_estimate(spec: MixtureSpec, n: int, eps_grid=DEFAULT_EPS_GRID,
                        config: EstimatorConfig | None = None,
                        cap: int | None = None) -> BarycenterReport:
    """Empirical barycenter of {x : sigma*(x) = 1} and the checks built on it."""
    config = config or EstimatorConfig(100, 0)
    check_entry_cap(spec, n)
    ones = np.ones(n)

    def kernel(seed):
        g = disorder(spec, n, seed)
        gs = ground_state_exact(g, cap)
        x = gauge_transform(g, gs.sigma_star)
        # H(1; sigma*.g) = H(sigma*; g) = f(g)
        return x.data, gs.value / n

    out = map_samples(config, kernel)
    rows = np.stack([r for r, _ in out])
    m = len(rows)
    mean = rows.mean(axis=0)
    b_hat = TensorStack(spec, n, mean)
    norm = float(np.linalg.norm(mean))
    loo = (m * mean[None, :] - rows) / (m - 1)
    loo_norms = np.linalg.norm(loo, axis=1)
    norm_se = float(math.sqrt((m - 1) / m * np.sum((loo_norms - loo_norms.mean()) ** 2)))

    align = summarize([energy(TensorStack(spec, n, r), ones) / n for r in rows])
    e_hat = _independent_e_hat(spec, n, config, cap)

    prof = magnetization_profile(b_hat, cap)
    feats = []
    for eps in eps_grid:
        if not band_levels(n, eps, 2 * eps):
            continue
        v, s = slice_max(prof, eps)
        feats.append({"eps": float(eps), "max_feature": v, "m": int(s.sum()),
                      "ratio_to_N_eps2": v / (n * eps * eps)})
    x = np.array([n * f["eps"] ** 2 for f in feats])
    y = np.array([f["max_feature"] for f in feats])
    c_fit, r2 = float("nan"), float("nan")
    if len(feats):
        c_fit = float(x @ y / (x @ x))
        ss_tot = np.sum((y - y.mean()) ** 2)
        r2 = float(1 - np.sum((y - c_fit * x) ** 2) / ss_tot) if ss_tot > 0 else 1.0
    perm = _permutation_check(rows, n) if 2 in spec.degrees and n > 2 else {}
    return BarycenterReport(n, m, b_hat, norm, norm_se, math.sqrt(2 * n * math.log(2)), align,
                            e_hat, feats, c_fit, r2, perm)


@dataclass(eq=False)
class ConditionalOverlapReport:
    n: int
    alpha: float
    xi_overlap: SummaryStats
    abs_overlap: SummaryStats
    gauge_xi_overlap: SummaryStats
    gauge_abs_overlap: SummaryStats
    gauge_agrees: bool
    e_hat: float
    c: float
    default_delta: float
    events: list[dict]
    abs_samples: np.ndarray
    gauge_abs_samples: np.ndarray

    def to_dict(self) -> dict:
        return {"N": self.n, "alpha": self.alpha, "xi_overlap": self.xi_overlap.to_dict(),
                "abs_overlap": self.abs_overlap.to_dict(),
                "gauge": {"xi_overlap": self.gauge_xi_overlap.to_dict(),
                          "abs_overlap": self.gauge_abs_overlap.to_dict(),
                          "bitwise_agreement": self.gauge_agrees},
                "E_N": self.e_hat, "c": self.c, "default_delta": self.default_delta,
                "events": self.events}


def default_c(spec: MixtureSpec, n: int, config: EstimatorConfig, cap: int | None = None) -> float:
    """Slice-decay constant fitted on the default eps values populated at this N."""
    eps = populated_eps(n, DEFAULT_EPS_GRID)
    if not eps:
        raise EmptyBand(f"no default eps band is populated for N={n}")
    return slice_decay(spec, n, eps, config, cap).c_hat


def conditional_overlap(spec: MixtureSpec, n: int, alpha: float, delta_grid=None,
                        config: EstimatorConfig | None = None, c: float | None = None,
                        cap: int | None = None) -> ConditionalOverlapReport:
    """Overlap of sigma*(g) with sigma*(g^alpha), computed directly and through
    explicit gauge conditioning, plus the frequencies of the events
    {|R| >= delta}, A_N = {f/N <= E_N - c delta^2} and
    B_N = {max_{|m|/N >= delta} H / N >= E_N - c delta^2}.

    ``c`` defaults to the slice-decay fit on the same config (see default_c); ``delta_grid``
    defaults to [max(eps_schedule(phi(alpha)), N^(-1/5))].
    """
    config = config or EstimatorConfig(100, 0)
    if alpha < 0:
        raise ValueError("alpha must be >= 0")
    ones = np.ones(n, dtype=np.int64)

    def kernel(seed):
        g, gp = disorder_pair(spec, n, seed)
        prof = magnetization_profile(g, cap)
        s_g = prof.ground_state().sigma_star.astype(np.int64)
        s_a = ground_state_exact(ou_couple(g, gp, alpha), cap).sigma_star
        direct = int(s_g @ s_a)
        # condition on sigma*(g^alpha) = 1 by moving the pair with tau = sigma*(g^alpha)
        s_tau = ground_state_exact(gauge_transform(g, s_a), cap).sigma_star
        gauge = int(s_tau.astype(np.int64) @ ones)
        return direct, gauge, prof.values / n

    out = map_samples(config, kernel)
    r = np.array([d for d, _, _ in out]) / n
    r_gauge = np.array([q for _, q, _ in out]) / n
    levels = np.stack([v for _, _, v in out])
    f = levels.max(axis=1)

    xi_r, xi_g = np.asarray(xi(spec, r)), np.asarray(xi(spec, r_gauge))
    abs_r, abs_g = np.abs(r), np.abs(r_gauge)
    agrees = abs_r.tobytes() == abs_g.tobytes() and xi_r.tobytes() == xi_g.tobytes()

    phi = float(xi_r.mean())
    default_delta = min(1.0, max(eps_schedule(phi) or 0.0, n ** -0.2))
    if delta_grid is None:
        delta_grid = [default_delta]
    if c is None:
        c = default_c(spec, n, config, cap)
    e_hat = float(f.mean())

    events = []
    for delta in delta_grid:
        lv = band_levels(n, delta, 1.0)
        level = e_hat - c * delta * delta
        row = {"delta": float(delta), "overlap_at_least_delta": summarize(abs_r >= delta - 1e-12).to_dict(),
               "A_N": summarize(f <= level).to_dict()}
        if lv:
            row["B_N"] = summarize(levels[:, lv].max(axis=1) >= level).to_dict()
        else:
            row["B_N"] = None
        events.append(row)
    return ConditionalOverlapReport(n, float(alpha), summarize(xi_r), summarize(abs_r),
                                    summarize(xi_g), summarize(abs_g), agrees, e_hat, float(c),
                                    default_delta, events, abs_r, abs_g)
