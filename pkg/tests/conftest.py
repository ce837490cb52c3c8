import numpy as np
import pytest

from latmorph.dataset import SplitSpec, generate_synthetic_dataset, split_dataset
from latmorph.vae import TrainConfig, build_model, train

# small shared configuration for fast model-level tests
TINY_CONFIG = TrainConfig(
    batch_size=16,
    max_epochs=4,
    patience_epochs=3,
    beta=0.001,
    latent_dim=8,
    split=SplitSpec(0.8, 0),
    seed=3,
)
TINY_CHANNELS = (8, 12, 16, 24)


@pytest.fixture(scope="session")
def small_dataset():
    return generate_synthetic_dataset(60, seed=5)


@pytest.fixture(scope="session")
def small_split(small_dataset):
    return split_dataset(small_dataset, TINY_CONFIG.split)


@pytest.fixture(scope="session")
def tiny_geometry_checkpoint(small_split):
    train_ds, test_ds = small_split
    model = build_model("geometry", TINY_CONFIG, channels=TINY_CHANNELS)
    return train(model, train_ds, test_ds, TINY_CONFIG)


@pytest.fixture(scope="session")
def tiny_hybrid_checkpoint(small_split):
    train_ds, test_ds = small_split
    model = build_model("hybrid", TINY_CONFIG, channels=TINY_CHANNELS)
    return train(model, train_ds, test_ds, TINY_CONFIG)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
