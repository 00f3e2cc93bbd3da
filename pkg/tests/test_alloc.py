import logging

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from geoadapt.alloc import SingularMixer, mix, mixer_matrix, realize, saturate, unmix
from geoadapt.model import QuadParams

P = QuadParams()
forces = st.floats(-20, 20, allow_nan=False)
moments = st.tuples(*[st.floats(-2, 2, allow_nan=False)] * 3).map(np.array)


def test_mix_examples():
    assert np.allclose(mix(4.0, np.zeros(3), P), [1, 1, 1, 1])
    assert np.allclose(mix(4.0, np.array([0, 0, 0.2112]), P), [0.5, 1.5, 0.5, 1.5])
    assert np.allclose(mix(0.0, np.array([0.169, 0, 0]), P), [0, 0.5, 0, -0.5])


def test_mix_solves_linear_system():
    B = mixer_matrix(P.d, P.c_tf)
    u = np.array([5.0, 0.1, -0.2, 0.03])
    assert np.allclose(mix(u[0], u[1:], P), np.linalg.solve(B, u), atol=1e-14)


def test_mixer_determinant():
    B = mixer_matrix(P.d, P.c_tf)
    assert np.isclose(abs(np.linalg.det(B)), 8 * P.d**2 * P.c_tf, rtol=1e-12)


def test_singular_mixer():
    bad = QuadParams()
    object.__setattr__(bad, "d", 0.0)
    with pytest.raises(SingularMixer):
        mix(1.0, np.zeros(3), bad)


def test_saturate_examples():
    assert np.array_equal(saturate([1, 1, 1, 1], P), [1, 1, 1, 1])
    assert np.array_equal(saturate([5, 1, 1, 1], P), [3.2, 1, 1, 1])
    assert np.array_equal(saturate([-0.5, 1, 1, 1], P), [0, 1, 1, 1])
    ideal = QuadParams(f_min=-np.inf)
    assert np.array_equal(saturate([-0.5, 1, 1, 1], ideal), [-0.5, 1, 1, 1])


def test_lower_clamp_is_logged(caplog):
    with caplog.at_level(logging.DEBUG, logger="geoadapt.alloc"):
        saturate([-1.0, 1, 1, 1], P)
    assert "below f_min" in caplog.text


def test_unmix_examples():
    f, M = unmix([1, 1, 1, 1], P)
    assert f == 4.0 and np.allclose(M, 0)
    rotors, f_real, M_real = realize(*unmix([5, 1, 1, 1], P), P)
    assert np.allclose(rotors, [3.2, 1, 1, 1], atol=1e-14)
    assert f_real == pytest.approx(6.2)
    assert not np.allclose(M_real, unmix([5, 1, 1, 1], P)[1])


@given(forces, moments)
def test_round_trip(f, M):
    f2, M2 = unmix(mix(f, M, P), P)
    assert abs(f2 - f) < 1e-12 and np.max(np.abs(M2 - M)) < 1e-12


@given(forces, moments, forces, moments, st.floats(-3, 3), st.floats(-3, 3))
def test_mix_is_linear(f1, M1, f2, M2, a, b):
    lhs = mix(a * f1 + b * f2, a * M1 + b * M2, P)
    rhs = a * mix(f1, M1, P) + b * mix(f2, M2, P)
    assert np.allclose(lhs, rhs, atol=1e-12)


@given(st.tuples(*[st.floats(-10, 10)] * 4).map(np.array))
def test_saturated_thrusts_in_range(t):
    s = saturate(t, P)
    assert np.all(s >= P.f_min) and np.all(s <= P.f_max)
