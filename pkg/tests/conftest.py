import numpy as np
import pytest

from halfspace_bubbles import EllipticSystemSpec, make_bubble_params


def spec_m1(c: float) -> EllipticSystemSpec:
    return EllipticSystemSpec(N=3, m=1, A=[[5.0]], B=[[3.0]], c=[c])


def spec_m2_symmetric() -> EllipticSystemSpec:
    return EllipticSystemSpec(
        N=4, m=2, A=[[1.0, 2.0], [2.0, 1.0]], B=[[1.0, 1.0], [1.0, 1.0]], c=[-1.0, -1.0]
    )


@pytest.fixture
def spec_f1():
    """N=3, single component, zero boundary coefficient."""
    return spec_m1(0.0)


@pytest.fixture
def spec_f2():
    """N=3, single component, c = -1 (center pushed below the boundary)."""
    return spec_m1(-1.0)


@pytest.fixture
def spec_f3():
    """N=4, two symmetric components, c = (-1, -1)."""
    return spec_m2_symmetric()


@pytest.fixture
def params_f1(spec_f1):
    return make_bubble_params(spec_f1, sigma=1.0)


@pytest.fixture
def params_f2(spec_f2):
    return make_bubble_params(spec_f2, sigma=1.0)


@pytest.fixture
def params_f3(spec_f3):
    return make_bubble_params(spec_f3, sigma=1.0)


@pytest.fixture(params=["f1", "f2", "f3"])
def fixture_pair(request):
    """(spec, params) for each of the three standard fixtures."""
    spec = {"f1": spec_m1(0.0), "f2": spec_m1(-1.0), "f3": spec_m2_symmetric()}[request.param]
    return spec, make_bubble_params(spec, sigma=1.0)


def random_halfspace_points(N: int, n: int, seed: int, lo=-10.0, hi=10.0, hi_last=10.0):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(lo, hi, size=(n, N))
    pts[:, -1] = rng.uniform(0.0, hi_last, size=n)
    return pts


def random_boundary_points(N: int, n: int, seed: int, lo=-10.0, hi=10.0):
    pts = random_halfspace_points(N, n, seed, lo, hi)
    pts[:, -1] = 0.0
    return pts
