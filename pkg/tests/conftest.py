import numpy as np
import pytest

from reachset.config import ExperimentConfig
from reachset.distributions import sample_fan
from reachset.kde import estimate
from reachset.models import CaseIParams, Grid2D, WeightedGrid

FAST_SEARCH = {"n_starts": 2, "max_iter": 120}


def _weighted_grid(w, xs=None, ys=None) -> WeightedGrid:
    w = np.asarray(w, dtype=float)
    N = w.shape[0]
    xs = np.arange(N, dtype=float) if xs is None else np.asarray(xs, dtype=float)
    ys = np.arange(N, dtype=float) if ys is None else np.asarray(ys, dtype=float)
    return WeightedGrid(grid=Grid2D(xs, ys), z_kde=w.copy(), w=w / w.sum(), bandwidth=(1.0, 1.0))


def _blob(N: int, center=None, sigma: float = 1.5) -> np.ndarray:
    c = (N - 1) / 2 if center is None else center
    ii, jj = np.meshgrid(np.arange(N), np.arange(N), indexing="ij")
    return np.exp(-0.5 * ((ii - c) ** 2 + (jj - c) ** 2) / sigma**2)


@pytest.fixture(scope="session")
def make_wg():
    """Weighted grid on integer node coordinates from raw (unnormalized) weights"""
    return _weighted_grid


@pytest.fixture(scope="session")
def blob():
    """Positive Gaussian bump of weights on an N x N grid"""
    return _blob


@pytest.fixture(scope="session")
def fan_samples():
    return sample_fan(CaseIParams.default(), 1000, 7)


@pytest.fixture(scope="session")
def fan_wg(fan_samples):
    return estimate(fan_samples, 20)


@pytest.fixture(scope="session")
def small_config():
    """An experiment small enough to solve in a few seconds"""
    return ExperimentConfig(
        name="small",
        case="fan",
        n_ds=400,
        grid=12,
        n_s=25,
        n_p=2,
        n_test=2000,
        budget=20.0,
        round_budget=10.0,
        search=dict(FAST_SEARCH),
        ns_list=[20, 25],
        repeats=2,
    )
