import numpy as np
import pytest
import torch

from v2s.core.config import TrainConfig
from v2s.data.synthetic import SyntheticSpec, make_synthetic_corpus


def pytest_addoption(parser):
    parser.addoption("--runslow", action="store_true", default=False, help="run long acceptance experiments")


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: long-running acceptance experiment, needs --runslow")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture
def np_rng():
    return np.random.default_rng(1234)


@pytest.fixture
def noise(np_rng):
    """One second of float64 noise in [-0.5, 0.5]."""
    return torch.from_numpy(np_rng.uniform(-0.5, 0.5, 16000))


@pytest.fixture
def tiny_config():
    return TrainConfig(
        model_width_scale=0.25,
        batch_size=2,
        total_gen_steps=2,
        seed=0,
        log_wall_time=False,
        log_interval=0,
    )


@pytest.fixture(scope="session")
def tiny_corpus(tmp_path_factory):
    """Four 25-frame clips, all in the train split."""
    out = tmp_path_factory.mktemp("tiny_corpus")
    return make_synthetic_corpus(SyntheticSpec(num_clips=4, frames_per_clip=25, seed=3), out)


@pytest.fixture(scope="session")
def corpus20(tmp_path_factory):
    out = tmp_path_factory.mktemp("corpus20")
    return make_synthetic_corpus(SyntheticSpec(num_clips=20, frames_per_clip=25, seed=7, rest_probability=0.1), out)
