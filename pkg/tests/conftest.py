import pytest

from curvequant.curve import make_segment, make_unit_circle, make_unit_triangle_boundary

M = 20_000


@pytest.fixture(scope="session")
def segment():
    return make_segment(0.0, 1.0, M)


@pytest.fixture(scope="session")
def circle():
    return make_unit_circle(M)


@pytest.fixture(scope="session")
def triangle():
    return make_unit_triangle_boundary(M)
