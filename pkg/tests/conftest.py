import numpy as np
import pytest

from tickvol import _kernels
from tickvol.dynamics import ModelSpec, ParamVector
from tickvol.pipeline import ChangeSeries
from tickvol.sim import SimSpec, simulate


@pytest.fixture(scope="session", autouse=True)
def _warm_kernels():
    # compile (or load cached) JIT kernels before any timed test runs
    _kernels.warmup()


@pytest.fixture
def rng():
    return np.random.default_rng(20240915)


def make_series(values, day="2024-01-02", frequency=1.0):
    values = np.asarray(values, dtype=np.int64)
    tod = np.arange(1, values.size + 1, dtype=float) * frequency
    return ChangeSeries(changes=values, time_of_day=tod, day=day,
                        frequency=frequency)


def zero_heavy_series(n=23400, sigma2=3.0, pi=0.4, seed=3):
    """Static zero-inflated Skellam draws: ~55% zeros with visible +/-2..8
    tails, mimicking 1-second tick changes. |y| <= 10 in practice."""
    spec = ModelSpec("zi_skellam")
    params = ParamVector.from_dict(
        spec, dict(theta=0.0, omega=float(np.log(sigma2)), alpha=0.0, phi=0.0,
                   pi=pi))
    return simulate(SimSpec(model=spec, params=params, n=n, seed=seed))[0]
