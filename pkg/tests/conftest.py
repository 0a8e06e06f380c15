import numpy as np
import pytest

import spectraforge as sf
from spectraforge.decoder import TrainConfig
from spectraforge.pipeline import encode_dataset, train_on_dataset


@pytest.fixture(scope="session")
def tiny_dataset():
    """12 small cuboids (6 patterns x 2 depths) shared across tests."""
    return sf.generate_cube_dataset(face_resolution=10, n_patterns=6, n_depths=2, seed=0)


@pytest.fixture(scope="session")
def tiny_encodings(tiny_dataset):
    return encode_dataset(tiny_dataset, kind="pat", k=15, h=15, seed=0)


@pytest.fixture(scope="session")
def tiny_model(tiny_dataset, tiny_encodings):
    cfg = TrainConfig(epochs=8, batch_size=8, seed=0)
    model, history = train_on_dataset(
        tiny_dataset, tiny_encodings, hidden=(32, 64, 64), config=cfg, init_seed=0
    )
    return model, history


@pytest.fixture()
def rng():
    return np.random.default_rng(12345)
