from typing import Any

import numpy as np
import pytest

from lfads.augmentations import AugmentationStack
from lfads.datasets import LorenzConfig, TrialBatch, TrialDataset, generate_lorenz
from lfads.model import LFADS

TINY_DIMS = dict(encod_dim=6, ci_enc_dim=6, ic_dim=4, con_dim=4, co_dim=2, gen_dim=8, fac_dim=3)


def pytest_addoption(parser: Any) -> None:
    parser.addoption("--runslow", action="store_true", default=False, help="run long training tests")


def pytest_configure(config: Any) -> None:
    config.addinivalue_line("markers", "slow: long-running training runs")


def pytest_collection_modifyitems(config: Any, items: list) -> None:
    if config.getoption("--runslow"):
        return
    skip_slow = pytest.mark.skip(reason="needs --runslow")
    for item in items:
        if "slow" in item.keywords:
            item.add_marker(skip_slow)


@pytest.fixture(scope="session")
def tiny_lorenz() -> TrialDataset:
    cfg = LorenzConfig(
        n_trials=24,
        n_bins=10,
        n_neurons=5,
        n_heldout=2,
        fp_steps=2,
        base_rate=0.5,
        burn_in=100,
        valid_fraction=0.25,
        seed=0,
    )
    return generate_lorenz(cfg)


def make_model(dataset: TrialDataset, **overrides: Any) -> LFADS:
    """
    A small model wired to a dataset's dimensions.
    """
    kwargs: dict = dict(
        encod_steps=dataset.encod_steps,
        recon_steps=dataset.recon_steps,
        n_heldin=dataset.n_heldin,
        n_recon=dataset.n_recon,
        **TINY_DIMS,
    )
    kwargs.update(overrides)
    kwargs.setdefault("train_aug_stack", AugmentationStack())
    return LFADS(**kwargs)


@pytest.fixture
def model_factory():
    return make_model


@pytest.fixture
def train_batch(tiny_lorenz: TrialDataset) -> TrialBatch:
    return TrialBatch.from_dataset(tiny_lorenz, tiny_lorenz.indices("train")[:4])


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
