import pytest

from oscilloflow.config import InitialDataSpec, SimulationConfig
from oscilloflow.oscillation import OscillationProfile
from oscilloflow.spectral import TorusGrid, forward_transform


def make_sqg_config(n=32, kind="sine", N=1.0, t_end=0.2, dt_max=0.01, interval=0.05,
                    generator="cmt", target_h2=2.0, params=None, alpha=0.5, **kwargs):
    return SimulationConfig(
        equation_kind="SQG",
        grid=TorusGrid(2, n),
        profile=OscillationProfile(kind, N),
        t_end=t_end,
        dt_max=dt_max,
        diagnostic_interval=interval,
        initial_data=InitialDataSpec(generator, target_h2, 0, dict(params or {})),
        alpha=alpha,
        **kwargs,
    )


def make_ns_config(n=16, dim=3, kind="sine", N=1.0, t_end=0.1, dt_max=0.01, interval=0.05,
                   generator="taylor_green_3d", target_h2=None, **kwargs):
    return SimulationConfig(
        equation_kind="NS",
        grid=TorusGrid(dim, n),
        profile=OscillationProfile(kind, N),
        t_end=t_end,
        dt_max=dt_max,
        diagnostic_interval=interval,
        initial_data=InitialDataSpec(generator, target_h2),
        **kwargs,
    )


@pytest.fixture
def sqg_config():
    return make_sqg_config


@pytest.fixture
def ns_config():
    return make_ns_config


@pytest.fixture
def grid2d():
    return TorusGrid(2, 64)


@pytest.fixture
def grid3d():
    return TorusGrid(3, 32)


def field_from(fn, grid):
    """Transform of fn(*coordinates) sampled on grid."""
    return forward_transform(fn(*grid.coordinates()), grid)
