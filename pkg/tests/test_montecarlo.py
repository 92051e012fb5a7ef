import numpy as np
import pytest

from pspinlab.errors import KernelError
from pspinlab.montecarlo import (EstimatorConfig, derive_seed, jackknife_se,
                                 loo_variance_jackknife_se, map_samples, run_estimator, summarize)


def test_derive_seed_deterministic_and_64bit():
    assert derive_seed(7, 3) == derive_seed(7, 3)
    assert derive_seed(7, 3) != derive_seed(7, 4)
    assert derive_seed(7, 3) != derive_seed(8, 3)
    assert 0 <= derive_seed(2**64 - 1, 2**63) < 2**64


def test_derive_seed_no_collisions_first_million():
    seen = {derive_seed(123456789, i) for i in range(1_000_000)}
    assert len(seen) == 1_000_000


def test_constant_kernel():
    s = run_estimator(EstimatorConfig(50, 1), lambda seed: 2.5)
    assert (s.mean, s.variance, s.stderr) == (2.5, 0.0, 0.0)


def test_normal_kernel_mean():
    def kernel(seed):
        return np.random.default_rng(seed).standard_normal()
    s = run_estimator(EstimatorConfig(100_000, 99), kernel)
    assert abs(s.mean) <= 3 * s.stderr
    assert s.stderr == pytest.approx(np.sqrt(s.variance / s.n), abs=1e-12)


def test_worker_count_invariance_bitwise():
    def kernel(seed):
        x = np.random.default_rng(seed).standard_normal(3)
        return {"a": float(x[0]), "b": float(x[1] * x[2])}
    serial = run_estimator(EstimatorConfig(400, 5, workers=1), kernel)
    threaded = run_estimator(EstimatorConfig(400, 5, workers=8), kernel)
    for k in serial:
        assert serial[k] == threaded[k]


def test_kernel_error_carries_index():
    seeds = [derive_seed(3, i) for i in range(10)]

    def kernel(seed):
        if seed == seeds[6]:
            raise RuntimeError("boom")
        return 0.0
    with pytest.raises(KernelError) as info:
        map_samples(EstimatorConfig(10, 3), kernel)
    assert info.value.index == 6


def test_histogram_counts_sum_to_n():
    s = summarize(np.linspace(-1, 1, 37), bins=np.linspace(-1.1, 1.1, 12))
    assert s.histogram[1].sum() == 37


def test_variance_jackknife_closed_form_matches_generic():
    x = np.random.default_rng(0).standard_normal(60)
    generic = jackknife_se(x, lambda v: np.var(v, ddof=1))
    assert loo_variance_jackknife_se(x) == pytest.approx(generic, rel=1e-10)


def test_config_validation():
    with pytest.raises(ValueError):
        EstimatorConfig(1, 0)
