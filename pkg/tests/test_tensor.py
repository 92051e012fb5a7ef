import itertools
import struct

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pspinlab import (energy, featurize, gauge_transform, inner, load_stack, ou_couple,
                      sample_disorder, save_stack, xi)
from pspinlab.errors import (BadMagic, CapExceeded, ChecksumMismatch, ShapeMismatch,
                             VersionMismatch)
from pspinlab.tensor import TensorStack, zeros

from oracles import MIX23, MIX234, SK, pairs_with_overlap, random_spins


def test_sampling_is_deterministic():
    a = sample_disorder(MIX23, 5, 42)
    b = sample_disorder(MIX23, 5, 42)
    assert a.data.tobytes() == b.data.tobytes()
    assert a.data.tobytes() != sample_disorder(MIX23, 5, 43).data.tobytes()


def test_layout_and_blocks():
    g = sample_disorder(MIX23, 4, 1)
    assert len(g) == 16 + 64
    assert g.block(3).shape == (4, 4, 4)
    assert g.block(2)[1, 3] == g.data[1 * 4 + 3]
    with pytest.raises(ValueError):
        g.data[0] = 1.0


def test_entry_cap():
    with pytest.raises(CapExceeded):
        sample_disorder(MIX23, 600, 0)
    with pytest.raises(CapExceeded):
        featurize(MIX23, 10, np.ones(10), cap=100)


def test_entries_standard_gaussian():
    x = np.concatenate([sample_disorder(SK, 8, s).data for s in range(3200)])
    assert x.size == 204_800
    se_mean = x.std(ddof=1) / np.sqrt(x.size)
    assert abs(x.mean()) <= 3 * se_mean
    sq = x**2
    assert abs(sq.mean() - 1) <= 3 * sq.std(ddof=1) / np.sqrt(x.size)


def test_covariance_matches_n_xi():
    n = 8
    s1, s2 = pairs_with_overlap(n, 0.5)
    assert s1 @ s2 / n == 0.5
    h = np.array([[energy(g, s1), energy(g, s2)] for g in
                  (sample_disorder(SK, n, seed) for seed in range(20_000))])
    d = (h - h.mean(axis=0))
    prod = d[:, 0] * d[:, 1]
    cov, se = prod.mean(), prod.std(ddof=1) / np.sqrt(len(prod))
    assert abs(cov - n * xi(SK, 0.5)) <= 3 * se


def test_ou_endpoints():
    g, gp = sample_disorder(MIX23, 4, 1), sample_disorder(MIX23, 4, 2)
    assert ou_couple(g, gp, 0.0).data.tobytes() == g.data.tobytes()
    assert np.max(np.abs(ou_couple(g, gp, 50.0).data - gp.data)) <= 1e-9


def test_ou_correlation_and_marginal():
    g, gp = sample_disorder(SK, 317, 1), sample_disorder(SK, 317, 2)
    assert g.data.size > 100_000
    gt = ou_couple(g, gp, 0.5).data
    prod = g.data * gt
    assert abs(prod.mean() - np.exp(-0.5)) <= 3 * prod.std(ddof=1) / np.sqrt(prod.size)
    sq = gt**2
    assert abs(sq.mean() - 1) <= 3 * sq.std(ddof=1) / np.sqrt(sq.size)


def test_ou_shape_mismatch():
    with pytest.raises(ShapeMismatch):
        ou_couple(sample_disorder(SK, 3, 1), sample_disorder(SK, 4, 1), 1.0)
    with pytest.raises(ShapeMismatch):
        ou_couple(sample_disorder(SK, 3, 1), sample_disorder(MIX23, 3, 1), 1.0)


def test_gauge_identity_map_and_involution(rng):
    g = sample_disorder(MIX234, 5, 3)
    assert gauge_transform(g, np.ones(5)).data.tobytes() == g.data.tobytes()
    eps = random_spins(rng, 5)
    twice = gauge_transform(gauge_transform(g, eps), eps)
    assert twice.data.tobytes() == g.data.tobytes()
    with pytest.raises(ShapeMismatch):
        gauge_transform(g, np.ones(4))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32), n=st.integers(1, 6), mix=st.sampled_from([SK, MIX23, MIX234]))
def test_gauge_invariance_property(seed, n, mix):
    rng = np.random.default_rng(seed)
    g = sample_disorder(mix, n, seed)
    sigma, eps = random_spins(rng, n), random_spins(rng, n)
    lhs = energy(gauge_transform(g, eps), sigma * eps)
    assert abs(lhs - energy(g, sigma)) <= 1e-10


@pytest.mark.parametrize("mix", [SK, MIX23, MIX234])
def test_feature_kernel_exhaustive(mix):
    for n in range(1, 6):
        states = [np.array(s) for s in itertools.product([-1, 1], repeat=n)]
        feats = [featurize(mix, n, s) for s in states]
        for a, fa in zip(states, feats):
            assert inner(fa, fa) == pytest.approx(n, abs=1e-9)
            for b, fb in zip(states, feats):
                assert abs(inner(fa, fb) - n * xi(mix, a @ b / n)) <= 1e-9


def test_feature_kernel_n6_sk():
    n = 6
    states = [np.array(s) for s in itertools.product([-1, 1], repeat=n)]
    feats = np.array([featurize(SK, n, s).data for s in states])
    gram = feats @ feats.T
    overlaps = np.array(states) @ np.array(states).T / n
    assert np.max(np.abs(gram - n * xi(SK, overlaps))) <= 1e-9


def test_energy_is_inner_with_features(rng):
    for mix in (SK, MIX23, MIX234):
        g = sample_disorder(mix, 6, int(rng.integers(1 << 30)))
        s = random_spins(rng, 6)
        assert abs(energy(g, s) - inner(featurize(mix, 6, s), g)) <= 1e-9


def test_inner_properties():
    a, b = sample_disorder(MIX23, 4, 1), sample_disorder(MIX23, 4, 2)
    assert inner(a, a) >= 0
    assert inner(a, b) == inner(b, a)
    assert inner(zeros(MIX23, 4), a) == 0.0


def test_save_load_roundtrip(tmp_path):
    g = sample_disorder(MIX234, 4, 9)
    path = tmp_path / "g.pspn"
    save_stack(g, path)
    back = load_stack(path)
    assert back.data.tobytes() == g.data.tobytes()
    assert back.spec == g.spec and back.n == g.n
    raw = path.read_bytes()
    assert raw[:4] == b"PSPN"
    assert struct.unpack_from("<HIH", raw, 4) == (1, 4, 3)


def test_load_rejects_bad_files(tmp_path):
    g = sample_disorder(SK, 3, 1)
    path = tmp_path / "g.pspn"
    save_stack(g, path)
    raw = bytearray(path.read_bytes())

    bad = tmp_path / "magic"
    bad.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(BadMagic):
        load_stack(bad)

    ver = bytearray(raw)
    ver[4:6] = struct.pack("<H", 255)
    bad.write_bytes(bytes(ver))
    with pytest.raises(VersionMismatch):
        load_stack(bad)

    flip = bytearray(raw)
    flip[40] ^= 0xFF
    bad.write_bytes(bytes(flip))
    with pytest.raises(ChecksumMismatch):
        load_stack(bad)

    with pytest.raises(OSError):
        load_stack(tmp_path / "missing")


def test_stack_validation():
    with pytest.raises(ShapeMismatch):
        TensorStack(SK, 3, np.zeros(8))
    with pytest.raises(ValueError):
        TensorStack(SK, 1, np.array([np.nan]))
