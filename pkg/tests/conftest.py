import json
import os

import numpy as np
import pytest

from config import settings
from kmsa.core import KmsaConfig, config_from_dict
from kmsa.data_manager import SyntheticSpec, generate_synthetic


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


@pytest.fixture
def small_data():
    """3 classi x 6 campioni, 2 viste informative + 1 di rumore, 4 feature."""
    return generate_synthetic(SyntheticSpec(classes=3, per_class=6, informative_views=2,
                                            noise_views=1, view_dim=4, seed=7))


@pytest.fixture
def small_cfg():
    return KmsaConfig(d=2, max_iters=5)


@pytest.fixture
def weighting_cfg():
    """Preset di config/weighting.json: tracce dei pesi positive per pca e lda."""
    with open(os.path.join(settings.CONFIG_DIR, "weighting.json"), encoding="utf-8") as f:
        return config_from_dict(json.load(f))
