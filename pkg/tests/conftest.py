import numpy as np
import pytest

from finslerlab import metrics
from finslerlab.config import sample_points
from finslerlab.jets import BasePoint


def seeded_points(structure, count, seed, half_width=0.5):
    box = np.array([[-half_width, half_width]] * structure.n)
    return sample_points(structure, count, seed, box)


@pytest.fixture(scope="session")
def euclid2():
    return metrics.euclidean(2)


@pytest.fixture(scope="session")
def diag_riemannian():
    return metrics.riemannian(2, "diagonal", [4.0, 1.0])


@pytest.fixture(scope="session")
def sphere2():
    return metrics.sphere_chart(2)


@pytest.fixture(scope="session")
def sphere3():
    return metrics.sphere_chart(3)


@pytest.fixture(scope="session")
def hyperbolic2():
    return metrics.hyperbolic_chart(2)


@pytest.fixture(scope="session")
def randers_generic():
    """Non-Berwald Randers: x-dependent 1-form, |b| <= 0.32 on the chart."""
    return metrics.randers(2, b_expressions=["0.2 + 0.1*sin(x2)", "0.1*x1"])


@pytest.fixture(scope="session")
def randers_half():
    """Randers with a constant 1-form of norm 0.5 (Berwald, locally Minkowski)."""
    return metrics.randers(2, b=[0.5, 0.0])


@pytest.fixture(scope="session")
def randers_invalid():
    """Randers with |b| = 1.5: strong convexity fails."""
    return metrics.randers(2, b=[1.5, 0.0])


@pytest.fixture(scope="session")
def quartic2():
    return metrics.perturbed_quartic(2, c=0.5)


@pytest.fixture
def point2():
    return BasePoint([0.4, -0.3], [0.9, 0.7])
