import numpy as np
import pytest
from hypothesis import given, strategies as st

from pspinlab import validate_mixture, xi, parse_mixture
from pspinlab.errors import (BadDegree, DomainError, DuplicateDegree, NonPositiveCoefficient,
                             NotNormalized)

from oracles import MIX23, MIX234, SK


def test_sk_spec():
    spec = validate_mixture([(2, 1.0)])
    assert spec.degrees == (2,)
    assert spec.p_max == 2
    assert xi(spec, 0.3) == pytest.approx(0.09)


def test_two_term_mixture_is_valid():
    spec = validate_mixture([(3, 0.8), (2, 0.6)])
    assert spec.degrees == (2, 3)
    assert spec.p_max == 3


@pytest.mark.parametrize("raw, err", [
    ([(2, 1.0), (3, 1.0)], NotNormalized),
    ([(1, 1.0)], BadDegree),
    ([(2, 0.6), (2, 0.8)], DuplicateDegree),
    ([(2, 1.0), (3, 0.0)], NonPositiveCoefficient),
    ([(2, -1.0)], NonPositiveCoefficient),
])
def test_rejects(raw, err):
    with pytest.raises(err):
        validate_mixture(raw)


def test_no_silent_renormalization():
    with pytest.raises(NotNormalized):
        validate_mixture([(2, 1.0 + 1e-9)])


def test_xi_values():
    assert xi(SK, 0.0) == 0.0
    for spec in (SK, MIX23, MIX234):
        assert xi(spec, 1.0) == pytest.approx(1.0, abs=1e-12)
    # 0.36 * 0.25 + 0.64 * 0.125
    assert xi(MIX23, 0.5) == pytest.approx(0.17, abs=1e-15)


def test_xi_domain():
    with pytest.raises(DomainError):
        xi(SK, 1.1)


@pytest.mark.parametrize("spec", [SK, MIX23, MIX234])
def test_xi_nonneg_nondecreasing_convex_on_unit_interval(spec):
    s = np.linspace(0, 1, 201)
    v = xi(spec, s)
    d1 = np.diff(v)
    assert np.all(v >= 0)
    assert np.all(d1 >= -1e-15)
    assert np.all(np.diff(d1) >= -1e-15)


@pytest.mark.parametrize("spec", [SK, MIX23, MIX234, validate_mixture([(2, 0.6), (4, 0.8)])])
def test_xi_even_iff_all_degrees_even(spec):
    s = np.linspace(0.1, 1, 10)
    symmetric = np.allclose(xi(spec, -s), xi(spec, s), atol=1e-14)
    assert symmetric == spec.is_even


@given(st.floats(-1, 1))
def test_xi_bounded_by_one(s):
    assert abs(xi(MIX234, s)) <= 1 + 1e-12


def test_parse_mixture():
    assert parse_mixture("2:0.6, 3:0.8") == MIX23
