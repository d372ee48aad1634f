import numpy as np
import pytest

from slicesim import GainModel, SimConfig, build_default_topology
from slicesim.topology import GainTables


@pytest.fixture(scope="session")
def cfg():
    return SimConfig().desk_scale()


@pytest.fixture(scope="session")
def topology(cfg):
    return build_default_topology(cfg)


@pytest.fixture(scope="session")
def gain_model(cfg):
    return GainModel.from_config(cfg)


@pytest.fixture(scope="session")
def tables(topology, gain_model):
    return GainTables(topology, gain_model)


@pytest.fixture()
def rng():
    return np.random.Generator(np.random.PCG64(1234))
