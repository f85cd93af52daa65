import numpy as np
import pytest
from hypothesis import settings, HealthCheck

from tdoa_toolkit.dataset.config import GenerationConfig
from tdoa_toolkit.dataset.generate import generate_dataset

settings.register_profile("ci", max_examples=25, deadline=None, suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("ci")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: end-to-end runs that take more than a few seconds")


def small_generation_config(**changes) -> GenerationConfig:
    """Small rooms and short clips; a room renders in a fraction of a second."""
    values = dict(rooms=2, mics=3, signal_len=256, preroll=64, room_dim_range=(2.0, 4.0), max_order=2,
                  rir_len=512, path_segments=8)
    values.update(changes)
    return GenerationConfig(**values)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)


@pytest.fixture
def tiny_config() -> GenerationConfig:
    return small_generation_config()


@pytest.fixture(scope="session")
def tiny_dataset(tmp_path_factory):
    """A three-room dataset shared by the read-only tests."""
    root = tmp_path_factory.mktemp("datasets") / "tiny"
    generate_dataset(root, small_generation_config(rooms=3), master_seed=7, progress=False)
    return root
