import math

import numpy as np
import pytest

from pspinlab import EstimatorConfig, derive_seed, ground_state_exact, sample_disorder
from pspinlab.errors import DegenerateCurve, EmptyBand
from pspinlab.experiments import (
    ChaosCurve, barycenter_estimate, chaos_curve, conditional_overlap, eps_schedule,
    field_curve, fit_quadratic_decay, hermite_fit, log_convexity_report, slice_decay,
    superconcentration, tail_table,
)
from oracles import MIX23, SK


def test_phi_at_zero_is_exact():
    c = chaos_curve(SK, 8, (0.0, 0.5), EstimatorConfig(50, 3))
    assert c.phi[0] == 1.0 and c.phi_se[0] == 0.0
    assert np.all((c.phi >= 0) & (c.phi <= 1))


def test_two_spin_closed_form():
    t = math.log(2)
    c = chaos_curve(SK, 2, (0.0, t), EstimatorConfig(20000, 11))
    expected = 1 - math.acos(math.exp(-t)) / math.pi
    assert abs(c.phi[1] - expected) <= 3 * c.phi_se[1]


def test_large_t_matches_independent_copies():
    n, m = 10, 600
    c = chaos_curve(SK, n, (0.0, 20.0), EstimatorConfig(m, 5))

    def fresh(i):
        seed = derive_seed(99, i)
        a = ground_state_exact(sample_disorder(SK, n, derive_seed(seed, 0))).sigma_star
        b = ground_state_exact(sample_disorder(SK, n, derive_seed(seed, 1))).sigma_star
        return (int(a.astype(int) @ b) / n) ** 2

    ref = np.array([fresh(i) for i in range(m)])
    se = math.hypot(c.phi_se[1], ref.std(ddof=1) / math.sqrt(m))
    assert abs(c.phi[1] - ref.mean()) <= 3 * se


def test_histogram_counts_every_sample():
    c = chaos_curve(SK, 6, (0.0, 1.0), EstimatorConfig(40, 1))
    assert len(c.histograms) == 2
    for edges, counts in c.histograms:
        assert counts.sum() == 40 and len(edges) == 8
    # overlaps at t = 0 all sit in the R = 1 bin
    assert c.histograms[0][1][-1] == 40


def test_log_linear_curve_has_no_violations():
    t = np.linspace(0, 2, 9)
    rep = log_convexity_report(ChaosCurve.from_values(t, np.exp(-t), np.full(9, 1e-6)))
    assert rep.violations == []


def test_log_concave_triple_is_flagged():
    rep = log_convexity_report(ChaosCurve.from_values([0, 1, 2], [1.0, 0.9, 0.2], [1e-9] * 3))
    assert len(rep.log_convexity) == 1
    v = rep.log_convexity[0]
    assert v["violation"] == pytest.approx(math.log(0.9**2 / 0.2) / 2)
    assert v["z"] > 3


def test_eps_schedule_values():
    assert eps_schedule(math.exp(-4)) == pytest.approx(0.5)
    assert eps_schedule(1.0) is None and eps_schedule(0.0) is None


def test_convexity_needs_three_positive_points():
    with pytest.raises(DegenerateCurve):
        log_convexity_report(ChaosCurve.from_values([0, 1, 2], [1.0, 0.5, 0.0]))


def test_hermite_recovers_known_weights():
    t = np.linspace(0, 3, 10)
    phi = 0.5 + 0.3 * np.exp(-t) + 0.2 * np.exp(-2 * t)
    fit = hermite_fit(ChaosCurve.from_values(t, phi), 3)
    np.testing.assert_allclose(fit.weights, [0.5, 0.3, 0.2], atol=1e-6)
    assert fit.relative_residual < 1e-8


def test_hermite_precondition():
    with pytest.raises(DegenerateCurve):
        hermite_fit(ChaosCurve.from_values([0, 1, 2], [1.0, 0.5, 0.2]), 4)


def test_hermite_on_measured_curve():
    # N = 16 puts most of the spectral mass near degree N, so the fit needs a
    # dense grid and at least as many exponentials to resolve the initial drop
    grid = (0.0, *np.geomspace(1 / 32, 2, 23))
    c = chaos_curve(SK, 16, grid, EstimatorConfig(400, 3))
    fit = hermite_fit(c, 24, jackknife_groups=10)
    assert np.all(fit.weights >= 0)
    # t = 0 is exact, so the sum is pinned to 1 and its SE is pure round-off
    assert abs(fit.sum_weights - 1.0) <= 3 * fit.sum_weights_se + 1e-9
    assert fit.relative_residual <= 0.05


def test_field_curve_properties():
    fc = field_curve(SK, 10, config=EstimatorConfig(200, 4))
    assert fc.convexity_violations == 0
    assert fc.e_hat.mean == fc.stats[fc.h_grid.index(0.0)].mean
    for row in fc.symmetry:
        assert row["within_3se"]
    assert abs(fc.slope.mean) <= 3 * fc.slope.stderr


def test_field_curve_needs_symmetric_grid():
    with pytest.raises(ValueError):
        field_curve(SK, 6, (-1.0, 0.0, 0.5), EstimatorConfig(2, 0))


def test_slice_gaps_nonpositive_and_fit():
    sd = slice_decay(SK, 12, (0.1, 0.25, 0.4), EstimatorConfig(200, 8))
    assert sd.max_gap <= 0
    assert np.all(sd.gap_samples <= 0)
    assert sd.c_hat > 0


def test_slice_decay_lists_empty_bands():
    with pytest.raises(EmptyBand, match="0.02"):
        slice_decay(SK, 10, (0.02, 0.3), EstimatorConfig(2, 0))


def test_quadratic_fit_exact():
    eps = np.array([0.1, 0.2, 0.3])
    c, se, r2 = fit_quadratic_decay(eps, -2.5 * eps**2, [0.01] * 3)
    assert c == pytest.approx(2.5) and r2 == pytest.approx(1.0)


def test_tail_table_bound():
    rows = tail_table(np.zeros(100), 10, (1.0, 3.0))
    assert all(r["frequency"] == 0 and r["within_bound"] for r in rows)
    assert rows[1]["bound"] == pytest.approx(2 * math.exp(-4.5))


def test_superconcentration_small():
    rep = superconcentration(SK, (6, 10), EstimatorConfig(300, 2))
    for p in rep.points:
        assert p.var_over_n > 0 and p.var_over_n_se > 0
        assert p.tails[-1]["within_bound"]
    assert len(rep.trend) == 1


def test_barycenter_small():
    rep = barycenter_estimate(SK, 8, (0.125, 0.25), EstimatorConfig(400, 6))
    assert rep.norm <= rep.level1_bound + 3 * rep.norm_se
    assert rep.alignment_z <= 3
    assert rep.permutation["p_value"] > 1e-3
    assert len(rep.slice_features) == 2


@pytest.mark.parametrize("spec", [SK, MIX23], ids=["sk", "mix23"])
def test_gauge_route_agrees_bitwise(spec):
    rep = conditional_overlap(spec, 8, 0.5, config=EstimatorConfig(60, 12), c=1.0)
    assert rep.gauge_agrees
    assert rep.abs_samples.tobytes() == rep.gauge_abs_samples.tobytes()


def test_alpha_zero_overlap_is_one():
    rep = conditional_overlap(SK, 8, 0.0, delta_grid=[0.5, 1.0], config=EstimatorConfig(30, 1), c=1.0)
    for row in rep.events:
        assert row["overlap_at_least_delta"]["estimate"] == 1.0


def test_overlap_frequency_nonincreasing_in_alpha():
    cfg = EstimatorConfig(300, 21)
    delta = 0.5
    freq = [conditional_overlap(SK, 12, a, [delta], cfg, c=1.0).abs_samples >= delta
            for a in (0.25, 0.5, 1.0, 2.0)]
    for lo, hi in zip(freq, freq[1:]):
        d = hi.astype(float) - lo.astype(float)
        se = d.std(ddof=1) / math.sqrt(len(d))
        # an increase is only a failure if significant at 95% one-sided
        assert d.mean() <= 1.6448536269514722 * se + 1e-12


def test_default_delta_and_c():
    rep = conditional_overlap(SK, 10, 0.5, config=EstimatorConfig(40, 2))
    assert 10 ** -0.2 <= rep.default_delta <= 1
    assert rep.c > 0


def test_field_symmetry_is_statistical_for_odd_mixtures():
    # for even mixtures M(h) = M(-h) per sample; odd degrees make it a real test
    fc = field_curve(MIX23, 10, (-0.5, 0.0, 0.5), EstimatorConfig(400, 9))
    (row,) = fc.symmetry
    assert row["stderr"] > 0
    assert abs(row["estimate"]) <= 3 * row["stderr"]
    sk = field_curve(SK, 8, (-0.5, 0.0, 0.5), EstimatorConfig(50, 9))
    assert sk.symmetry[0]["estimate"] == 0.0 and sk.symmetry[0]["stderr"] == 0.0
