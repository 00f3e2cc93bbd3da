import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from geoadapt.geom import exp_so3

settings.register_profile("default", max_examples=100, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

finite = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False, allow_infinity=False)
vec3 = st.tuples(finite, finite, finite).map(np.array)


@st.composite
def unit_vectors(draw):
    v = draw(st.tuples(*[st.floats(-1, 1, allow_nan=False)] * 3).filter(
        lambda t: np.linalg.norm(t) > 1e-3))
    v = np.array(v)
    return v / np.linalg.norm(v)


@st.composite
def rotations(draw, max_angle=np.pi):
    axis = draw(unit_vectors())
    angle = draw(st.floats(0.0, max_angle, allow_nan=False))
    return exp_so3(angle * axis)


def random_rotations(rng, n):
    """``n`` rotations from random axes and angles uniform on [0, pi]."""
    axes = rng.normal(size=(n, 3))
    axes /= np.linalg.norm(axes, axis=1, keepdims=True)
    angles = rng.uniform(0.0, np.pi, size=n)
    return [exp_so3(a * ax) for a, ax in zip(angles, axes)]


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


# one line per acceptance criterion, filled in by tests/test_acceptance.py
ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(n: int, ok: bool, detail: str) -> bool:
    ACCEPTANCE[n] = (bool(ok), detail)
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
