import numpy as np
import pytest

from bragg_sense.units_grid import MomentumDistribution


@pytest.fixture(scope="session")
def rng():
    return np.random.default_rng(20260810)


def delta_distribution(q: float) -> MomentumDistribution:
    """Single-node distribution concentrating all weight at one momentum."""
    return MomentumDistribution(
        sigma_q=1e-6,
        nodes=np.array([q]),
        weights=np.array([1.0]),
        density=np.array([1.0]),
    )
