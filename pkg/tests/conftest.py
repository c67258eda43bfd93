from typing import List, Sequence

import numpy as np
import pytest

# Import models
from app.models import ContinuousVariable, FeatureSpec, GlobalSummary

# Import services
from app.services import federation_service, features_service, summary_service


def federate(datasets: Sequence[np.ndarray], h: int = 5, seed: int = 0) -> GlobalSummary:
    summary, _ = federation_service.simulate(list(datasets), h=h, seed=seed)
    return summary


def continuous_summary(data: np.ndarray, h: int = 4, seed: int = 7, sigma: float = 1.0):
    """
    Summary over plain continuous columns with unit bandwidths; also returns the feature maps.
    """
    spec = FeatureSpec(h=h, seed=seed, variables=[ContinuousVariable(sigma=sigma) for _ in range(data.shape[1])])
    maps = features_service.draw_feature_maps(spec)
    moments = summary_service.compute_local_moments(data, maps)
    return summary_service.aggregate([moments]), maps


def mean_shift_clients(K: int = 4, n_k: int = 150, seed: int = 0) -> List[np.ndarray]:
    """
    V0 shifts its mean by domain, V1 = V0 + noise, V2 independent noise.
    """
    rng = np.random.default_rng(seed)
    datasets = []
    for k in range(K):
        v0 = 3.0 * k + rng.standard_normal(n_k)
        v1 = v0 + 0.3 * rng.standard_normal(n_k)
        v2 = rng.standard_normal(n_k)
        datasets.append(np.column_stack([v0, v1, v2]))
    return datasets


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)


@pytest.fixture
def shifted_clients() -> List[np.ndarray]:
    return mean_shift_clients()


@pytest.fixture
def shifted_summary(shifted_clients) -> GlobalSummary:
    return federate(shifted_clients)
