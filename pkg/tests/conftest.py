import pytest

from secrecyplan.config import ExperimentConfig
from secrecyplan.mdp import build_kernel, joint_dims


@pytest.fixture(scope="session")
def table_config():
    """Default benchmark configuration (2-level channels, 5-unit batteries)."""
    cfg = ExperimentConfig()
    cfg.validate()
    return cfg


@pytest.fixture(scope="session")
def table_model(table_config):
    return table_config.system_model()


@pytest.fixture(scope="session")
def table_dims(table_model):
    return joint_dims(table_model)


@pytest.fixture(scope="session")
def table_kernel(table_model):
    return build_kernel(table_model)
