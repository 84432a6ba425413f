import numpy as np
import pytest

from normirl.environments import CupEnv, PathEnv, SphereEnv


@pytest.fixture(scope="session")
def cup():
    return CupEnv()


@pytest.fixture(scope="session")
def sphere():
    return SphereEnv()


@pytest.fixture(scope="session")
def path2():
    return PathEnv(waypoint_dim=1, horizon=2, n_features=2)


@pytest.fixture(scope="session")
def path3():
    return PathEnv(waypoint_dim=1, horizon=3, n_features=2)


@pytest.fixture(scope="session")
def path5():
    return PathEnv(waypoint_dim=1, horizon=5, n_features=2)


@pytest.fixture()
def rng():
    return np.random.default_rng(0)
