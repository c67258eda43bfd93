import numpy as np
import pytest

# Import models
from app.models import DiscoveryConfig, Direction, GenConfig

# Import services
from app.services import citest_service, icp_service
from app.services.bench_service import BenchService

from tests.conftest import federate


pytestmark = pytest.mark.acceptance


def test_type_i_rate_under_linear_confounding():
    rejections = 0
    for seed in range(500):
        rng = np.random.default_rng([seed, 100])
        z = rng.standard_normal(1000)
        data = np.column_stack([z + rng.standard_normal(1000), z + rng.standard_normal(1000), z])
        result = citest_service.test_ci(federate([data], seed=seed), 0, 1, (2,))
        rejections += not result.independent
    assert 0.02 <= rejections / 500 <= 0.09


def test_power_on_postnonlinear_data():
    service = BenchService(DiscoveryConfig(), replications=200, base=GenConfig(K=10))
    table = service.power([1000], K=10)
    assert table["power"].iloc[0] >= 0.90
    assert table["power_central"].iloc[0] >= 0.90


def test_linear_benchmark_accuracy():
    service = BenchService(DiscoveryConfig(), h=5, replications=10, base=GenConfig(d=6, K=10, n_k=100))
    table, _ = service.run("linear")
    row = table.iloc[0]
    assert row["skeleton_f1_mean"] >= 0.85
    assert row["direction_f1_mean"] >= 0.60
    assert row["skeleton_shd_mean"] <= 2.0


def test_direction_scores_on_changing_pairs():
    correct = 0
    for seed in range(50):
        rng = np.random.default_rng([seed, 200])
        datasets = []
        for _ in range(10):
            x = rng.uniform(-1, 1) + rng.uniform(0.5, 2.0) * rng.standard_normal(100)
            y = rng.uniform(0.5, 2.5) * x + rng.uniform(0.5, 2.0) * rng.standard_normal(100)
            datasets.append(np.column_stack([x, y]))
        score = icp_service.score_direction(federate(datasets, seed=seed), 0, 1)
        correct += score.decision == Direction.FORWARD
    assert correct >= 35
