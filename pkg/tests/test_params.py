import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays
from scipy import stats

from pvsubspace.errors import ConfigError, NonPositiveLogInput, OutOfBounds
from pvsubspace.params import (DIODE_SI_2CM2, ParameterDef, ParameterSpace, Transform, denormalize,
                               load_space, normalize, sample_uniform)

SPACE = DIODE_SI_2CM2
LOWER = np.array([p.lower for p in SPACE.params])
UPPER = np.array([p.upper for p in SPACE.params])
MID = np.array([0.149735, 2.2e-9, 1.5, 0.415625, 234.375])

unit_points = arrays(float, 5, elements=st.floats(-1.0, 1.0, allow_nan=False))


def test_upper_isc_maps_to_plus_one():
    x = normalize(SPACE, [0.23958, *MID[1:]])
    assert x[0] == 1.0


def test_lower_is_maps_to_minus_one():
    x = normalize(SPACE, [MID[0], 2.2e-11, *MID[2:]])
    assert x[1] == -1.0
    # printed bound of log(Is) is -24.54
    assert math.log(2.2e-11) == pytest.approx(-24.54, abs=0.005)
    assert math.log(2.2e-7) == pytest.approx(-15.33, abs=0.01)


def test_midpoint_maps_to_zero():
    x = normalize(SPACE, MID)
    np.testing.assert_allclose(x, 0.0, atol=1e-14)


def test_denormalize_origin_gives_midpoints():
    p = denormalize(SPACE, np.zeros(5))
    assert p[0] == pytest.approx(0.149735, rel=1e-15)
    assert p[1] == pytest.approx(math.sqrt(2.2e-11 * 2.2e-7), rel=1e-13)
    np.testing.assert_allclose(p[2:], MID[2:], rtol=1e-15)


def test_denormalize_upper_is():
    p = denormalize(SPACE, [0, 1.0, 0, 0, 0])
    assert p[1] == 2.2e-7


def test_corners_are_exact():
    np.testing.assert_array_equal(denormalize(SPACE, np.ones(5)), UPPER)
    np.testing.assert_array_equal(denormalize(SPACE, -np.ones(5)), LOWER)
    np.testing.assert_array_equal(normalize(SPACE, UPPER), np.ones(5))
    np.testing.assert_array_equal(normalize(SPACE, LOWER), -np.ones(5))


def test_round_trip_random(rng):
    for x in rng.uniform(-1, 1, (100, 5)):
        np.testing.assert_allclose(normalize(SPACE, denormalize(SPACE, x)), x, rtol=1e-14, atol=1e-14)


@given(unit_points)
def test_round_trip_from_cube(x):
    np.testing.assert_allclose(normalize(SPACE, denormalize(SPACE, x)), x, rtol=1e-12, atol=1e-12)


@given(arrays(float, 5, elements=st.floats(0.0, 1.0)))
def test_round_trip_from_box(u):
    lo = np.array([p.transformed_bounds[0] for p in SPACE.params])
    hi = np.array([p.transformed_bounds[1] for p in SPACE.params])
    t = lo + u * (hi - lo)
    physical = t.copy()
    physical[1] = math.exp(t[1])
    physical = np.clip(physical, LOWER, UPPER)
    np.testing.assert_allclose(denormalize(SPACE, normalize(SPACE, physical)), physical, rtol=1e-12)


@given(unit_points, st.integers(0, 4), st.floats(1e-6, 0.5))
def test_normalize_strictly_increasing(x, i, dx):
    lo = x.copy()
    hi = x.copy()
    hi[i] = min(1.0, x[i] + dx)
    lo[i] = hi[i] - dx
    if lo[i] < -1.0:
        return
    a = normalize(SPACE, denormalize(SPACE, lo))
    b = normalize(SPACE, denormalize(SPACE, hi))
    assert b[i] > a[i]


def test_out_of_bounds_errors():
    with pytest.raises(OutOfBounds) as err:
        normalize(SPACE, [0.3, *MID[1:]])
    assert err.value.name == "Isc"
    with pytest.raises(NonPositiveLogInput):
        normalize(SPACE, [MID[0], 0.0, *MID[2:]])
    with pytest.raises(OutOfBounds):
        denormalize(SPACE, [0, 0, 1.0000001, 0, 0])


def test_parameter_def_invariants():
    with pytest.raises(ConfigError):
        ParameterDef("a", 1.0, 1.0)
    with pytest.raises(ConfigError):
        ParameterDef("a", 0.0, 1.0, Transform.LOG)
    with pytest.raises(ConfigError):
        ParameterSpace((ParameterDef("a", 0, 1), ParameterDef("a", 0, 2)))


def test_sample_uniform_deterministic():
    a = sample_uniform(SPACE, 3, seed=42)
    b = sample_uniform(SPACE, 3, seed=42)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, sample_uniform(SPACE, 3, seed=43))


def test_sample_uniform_independent_of_batching():
    whole = sample_uniform(SPACE, 50, seed=9)
    parts = np.vstack([sample_uniform(SPACE, 7, seed=9, start=s)[: min(7, 50 - s)] for s in range(0, 50, 7)])
    np.testing.assert_array_equal(whole, parts)
    np.testing.assert_array_equal(whole[:10], sample_uniform(SPACE, 10, seed=9))


def test_sample_uniform_moments_and_range():
    x = sample_uniform(SPACE, 10 ** 5, seed=1)
    assert x.shape == (10 ** 5, 5)
    assert np.all((x >= -1.0) & (x <= 1.0))
    # 3 sigma / sqrt(N) for Uniform(-1, 1)
    assert np.all(np.abs(x.mean(axis=0)) < 3 * (1 / math.sqrt(3)) / math.sqrt(10 ** 5))


def test_sample_uniform_ks():
    x = sample_uniform(SPACE, 10 ** 4, seed=2024)
    for j in range(5):
        assert stats.kstest(x[:, j], stats.uniform(loc=-1, scale=2).cdf).pvalue > 0.001


def test_load_space_json(tmp_path):
    doc = '{"params":[{"name":"Isc","lower":0.05989,"upper":0.23958,"transform":"linear"},' \
          '{"name":"Is","lower":2.2e-11,"upper":2.2e-7,"transform":"log"}]}'
    path = tmp_path / "space.json"
    path.write_text(doc)
    space = load_space(path)
    assert space.names == ["Isc", "Is"]
    assert space.params[1].transform is Transform.LOG
    assert load_space("diode-si-2cm2") is DIODE_SI_2CM2
    assert ParameterSpace.from_dict(DIODE_SI_2CM2.to_dict()) == DIODE_SI_2CM2
