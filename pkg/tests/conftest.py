import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from rjs.games import prisoners_dilemma
from rjs.strategies import constant_strategy, grim_trigger

# derandomized so repeated runs of the suite are identical
settings.register_profile("repro", derandomize=True, deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("repro")


@pytest.fixture
def pd():
    return prisoners_dilemma()


@pytest.fixture
def grim_pair(pd):
    return [grim_trigger(pd, i, 0, 1, {1}) for i in range(2)]


@pytest.fixture
def always(pd):
    def make(*actions):
        return [constant_strategy(pd, i, a) for i, a in enumerate(actions)]
    return make


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
