import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm, polar
from scipy.spatial.transform import Rotation

from geoadapt.geom import (E1, E2, E3, Degenerate, NotSkew, angle_between, e_omega, e_r,
                           exp_so3, hat, is_rotation, project_so3, psi, skew_part, vee)

from conftest import rotations, unit_vectors, vec3


def test_hat_examples():
    assert np.array_equal(hat([0, 0, 0]), np.zeros((3, 3)))
    assert np.allclose(hat(E1) @ E2, E3)
    assert np.array_equal(hat([1, 2, 3]), np.array([[0, -3, 2], [3, 0, -1], [-2, 1, 0]]))


def test_vee_examples():
    assert np.array_equal(vee(hat([1, 2, 3])), [1, 2, 3])
    assert np.array_equal(vee(np.zeros((3, 3))), np.zeros(3))
    assert np.array_equal(vee([[0, -3, 2], [3, 0, -1], [-2, 1, 0]]), [1, 2, 3])


def test_vee_rejects_non_skew():
    with pytest.raises(NotSkew):
        vee(np.eye(3))
    vee(hat([1, 2, 3]) + 1e-8 * np.eye(3))  # within tolerance


@given(vec3, vec3)
def test_hat_is_cross_product_and_skew(v, w):
    assert np.allclose(hat(v) @ w, np.cross(v, w), atol=1e-12)
    assert np.array_equal(hat(v) + hat(v).T, np.zeros((3, 3)))
    assert np.array_equal(vee(hat(v)), v)


@given(st.tuples(*[st.floats(-5, 5)] * 9).map(lambda t: np.array(t).reshape(3, 3)))
def test_skew_part_is_skew(m):
    s = skew_part(m)
    assert np.allclose(s, -s.T)


def test_exp_examples():
    assert np.array_equal(exp_so3([0, 0, 0]), np.eye(3))
    assert np.allclose(exp_so3(math.pi * E3), np.diag([-1.0, -1.0, 1.0]), atol=1e-15)
    assert math.isclose(np.trace(exp_so3(0.5 * math.pi * E1)), 1.0, abs_tol=1e-15)


@given(vec3)
def test_exp_matches_scipy(v):
    assert np.allclose(exp_so3(v), Rotation.from_rotvec(v).as_matrix(), atol=1e-12)
    assert is_rotation(exp_so3(v))


@given(st.floats(-1e-8, 1e-8), unit_vectors())
def test_exp_small_angle_series_matches_matrix_exponential(a, s):
    assert np.allclose(exp_so3(a * s), expm(hat(a * s)), atol=1e-15)


@given(rotations())
def test_trace_identity(R):
    angle = np.linalg.norm(Rotation.from_matrix(R).as_rotvec())
    assert math.isclose(np.trace(R), 1 + 2 * math.cos(angle), abs_tol=1e-9)


def test_project_examples(rng):
    R = exp_so3([0.3, -1.2, 0.7])
    assert np.allclose(project_so3(R), R, atol=1e-14)
    assert np.allclose(project_so3(1.001 * np.eye(3)), np.eye(3), atol=1e-15)
    Rp = project_so3(R + 1e-4 * rng.normal(size=(3, 3)))
    assert np.linalg.norm(Rp.T @ Rp - np.eye(3)) <= 1e-12


@given(rotations(), st.tuples(*[st.floats(-0.05, 0.05)] * 9).map(lambda t: np.array(t).reshape(3, 3)))
def test_project_matches_polar_factor(R, E):
    u, _ = polar(R + E)
    assert np.allclose(project_so3(R + E), u, atol=1e-10)


def test_project_rejects_degenerate():
    with pytest.raises(Degenerate):
        project_so3(np.diag([1.0, 1.0, 0.0]))
    with pytest.raises(Degenerate):
        project_so3(np.diag([1.0, 1.0, -1.0]))


def test_is_rotation():
    assert is_rotation(np.eye(3))
    assert not is_rotation(np.diag([1.0, 1.0, -1.0]))
    assert not is_rotation(1.01 * np.eye(3))
    assert not is_rotation(np.full((3, 3), np.nan))


@given(unit_vectors(), st.floats(0, math.pi))
def test_psi_and_e_r_about_axis(s, phi):
    R = exp_so3(phi * s)
    assert math.isclose(psi(R, np.eye(3)), 1 - math.cos(phi), abs_tol=1e-12)
    assert np.allclose(e_r(R, np.eye(3)), math.sin(phi) * s, atol=1e-12)


@given(rotations(), unit_vectors())
def test_critical_points(Rd, s):
    R = Rd @ exp_so3(math.pi * s)
    assert math.isclose(psi(R, Rd), 2.0, abs_tol=1e-12)
    assert np.linalg.norm(e_r(R, Rd)) <= 1e-9
    assert psi(Rd, Rd) == pytest.approx(0.0, abs=1e-14)
    assert np.allclose(e_r(Rd, Rd), 0.0, atol=1e-14)


@given(rotations(), rotations())
def test_error_function_bounds(R, Rd):
    p, er = psi(R, Rd), e_r(R, Rd)
    assert -1e-15 <= p <= 2 + 1e-15
    assert 0.5 * er @ er <= p + 1e-12
    assert np.linalg.norm(er) <= 1 + 1e-12
    assert math.isclose(np.linalg.norm(er), math.sqrt(max(p * (2 - p), 0.0)), abs_tol=1e-7)


@given(rotations(), rotations())
def test_e_r_matches_definition(R, Rd):
    m = Rd.T @ R - R.T @ Rd
    assert np.allclose(e_r(R, Rd), 0.5 * vee(m), atol=1e-14)


def test_e_omega_examples():
    R = exp_so3([0.1, 0.2, 0.3])
    assert np.allclose(e_omega(R, [1, 2, 3], R, [1, 2, 3]), 0, atol=1e-15)
    assert np.array_equal(e_omega(np.eye(3), [1, 0, 0], np.eye(3), [0, 0, 0]), [1, 0, 0])


def test_angle_between_small_and_right_angles():
    assert angle_between(E1, E1) == 0.0
    assert math.isclose(angle_between(E1, E2), math.pi / 2)
    assert math.isclose(angle_between(E1, [1.0, 1e-9, 0.0]), 1e-9, rel_tol=1e-9)
