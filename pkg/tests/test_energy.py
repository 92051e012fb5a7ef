import numpy as np
import pytest

from pspinlab import energy, engine_flip, engine_new, sample_disorder
from pspinlab.errors import IndexOutOfRange, ShapeMismatch
from pspinlab.tensor import TensorStack, zeros

from oracles import MIX23, MIX234, SK, all_states, brute_energies, random_spins

MIX4 = [SK, MIX23, MIX234]


def test_single_spin_constant():
    g = sample_disorder(SK, 1, 5)
    assert energy(g, [1]) == energy(g, [-1]) == pytest.approx(g.data[0])


def test_two_spin_hand_example():
    g = TensorStack(SK, 2, np.array([0.0, 1.0, 1.0, 0.0]))
    for s1 in (-1, 1):
        for s2 in (-1, 1):
            assert energy(g, [s1, s2]) == pytest.approx(np.sqrt(2) * s1 * s2, abs=1e-15)


@pytest.mark.parametrize("mix", MIX4)
def test_energy_matches_einsum_oracle(mix):
    g = sample_disorder(mix, 5, 11)
    states = all_states(5)
    ours = np.array([energy(g, s) for s in states])
    assert np.max(np.abs(ours - brute_energies(g, states))) <= 1e-9


def test_energy_shape_and_values_checked():
    g = sample_disorder(SK, 3, 1)
    with pytest.raises(ShapeMismatch):
        energy(g, [1, 1])
    with pytest.raises(ValueError):
        energy(g, [1, 0, 1])


def test_engine_initial_state():
    g = sample_disorder(MIX23, 6, 2)
    e = engine_new(g, np.ones(6))
    assert e.energy == pytest.approx(energy(g, np.ones(6)), rel=1e-12)
    assert e.magnetization == 6
    assert engine_new(zeros(MIX23, 6), np.ones(6)).energy == 0.0


def test_flip_twice_restores():
    g = sample_disorder(MIX234, 5, 3)
    e = engine_new(g, np.ones(5))
    start = e.energy
    engine_flip(e, 2)
    engine_flip(e, 2)
    assert abs(e.energy - start) <= 1e-9
    with pytest.raises(IndexOutOfRange):
        engine_flip(e, 5)


@pytest.mark.parametrize("mix", MIX4)
def test_flip_delta_matches_naive(mix, rng):
    for _ in range(20):
        n = int(rng.integers(1, 9))
        g = sample_disorder(mix, n, int(rng.integers(1 << 40)))
        sigma = random_spins(rng, n)
        e = engine_new(g, sigma)
        k = int(rng.integers(n))
        before = energy(g, sigma)
        after_state = sigma.copy()
        after_state[k] *= -1
        delta = engine_flip(e, k) - before
        assert abs(delta - (energy(g, after_state) - before)) <= 1e-9
        assert np.array_equal(e.spins, after_state)


@pytest.mark.parametrize("mix", MIX4)
def test_random_flip_sequence_tracks_naive(mix, rng):
    n = 10 if mix is not MIX234 else 7
    g = sample_disorder(mix, n, 77)
    e = engine_new(g, random_spins(rng, n))
    for k in rng.integers(0, n, size=10_000):
        e.flip(int(k))
        assert e.magnetization == int(e.sigma.sum())
    assert abs(e.energy - energy(g, e.sigma)) <= 1e-9 * n


def test_gray_sweep_visits_all_states_and_ends_consistent():
    n = 8
    g = sample_disorder(MIX23, n, 4)
    e = engine_new(g, np.ones(n))
    seen = {e.spins.tobytes()}
    for step in range(1, 2**n):
        k = (step & -step).bit_length() - 1
        e.flip(k)
        seen.add(e.spins.tobytes())
    assert len(seen) == 2**n
    assert abs(e.energy - energy(g, e.sigma)) <= 1e-9


@pytest.mark.parametrize("mix, n", [(SK, 7), (MIX23, 6), (MIX234, 5)])
def test_flip_cost_instrumentation(mix, n):
    g = sample_disorder(mix, n, 1)
    e = engine_new(g, np.ones(n))
    e.flip(0)
    expected = sum(n if p == 2 else n**p - (n - 1) ** p for p in mix.degrees)
    assert e.touched == expected
