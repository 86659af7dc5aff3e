import numpy as np
import pytest

from spinxbar.config import ExperimentConfig


@pytest.fixture(scope="session")
def cfg():
    return ExperimentConfig.from_dict()


@pytest.fixture(scope="session")
def designs(cfg):
    return dict(cfg.designs)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_pm1(rng, shape):
    return rng.choice(np.array([-1, 1], dtype=np.int8), size=shape)
