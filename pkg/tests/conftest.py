import numpy as np
import pytest

from hawkes import EventSequence, ExpKernel, HawkesModel


@pytest.fixture
def fig1_model():
    """lam = 1/2 with mu(t) = exp(-2t): branching ratio 0.5, long-run rate 1."""
    return HawkesModel(0.5, ExpKernel(1.0, 2.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240613)


def make_events(times, horizon=None, **kw):
    times = np.asarray(times, dtype=float)
    if horizon is None:
        horizon = float(times[-1]) if times.size else 1.0
    return EventSequence(times, horizon, **kw)
