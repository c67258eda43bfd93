import numpy as np
import pytest

# Import models
from app.models import DiscoveryConfig, Direction, GenConfig

# Import services
from app.services import datagen_service, graph_service
from app.services.discovery_service import DiscoveryService, _level_subsets

# Import Exceptions
from app import exceptions

from tests.conftest import federate


@pytest.fixture
def benchmark_summary():
    benchmark = datagen_service.generate(GenConfig(d=5, K=4, n_k=60, n_changing=2, seed=11))
    return federate(benchmark.datasets, seed=11)


def test_level_subsets_order():
    assert _level_subsets({3, 1}, {2, 3}, 1) == [(1,), (3,), (2,)]
    assert _level_subsets({1, 2}, {2, 3}, 0) == [()]
    assert _level_subsets({1}, {2}, 2) == []


def test_mean_shift_is_a_changing_module(shifted_summary):
    service = DiscoveryService(shifted_summary)
    g = service.detect_changing_modules(graph_service.complete_augmented(shifted_summary.d))
    assert 0 in g.changing_modules
    assert all(g.is_directed(g.surrogate, i) for i in g.changing_modules)
    assert service.test_counts["changing"] > 0


def test_strongly_dependent_pair_stays_adjacent(shifted_summary):
    result = DiscoveryService(shifted_summary).run()
    assert frozenset((0, 1)) in result.pattern.skeleton()


def test_run_outputs_are_consistent(benchmark_summary):
    result = DiscoveryService(benchmark_summary, DiscoveryConfig(max_cond_size=2)).run()
    assert result.pattern.d == 5
    assert result.dag.is_acyclic()
    assert result.dag.skeleton() == result.pattern.skeleton()
    assert set(result.pattern.directed_edges()) <= set(result.dag.edges)
    assert sum(1 for line in result.trace if line.startswith("CI ")) == \
        result.test_counts["changing"] + result.test_counts["skeleton"]
    assert sum(1 for line in result.trace if line.startswith("ICP ")) == result.test_counts["icp"]


def test_run_is_deterministic_across_worker_counts(benchmark_summary):
    serial = DiscoveryService(benchmark_summary, DiscoveryConfig(workers=1)).run()
    threaded = DiscoveryService(benchmark_summary, DiscoveryConfig(workers=4)).run()
    assert serial.trace == threaded.trace
    assert np.array_equal(serial.pattern.adjacency, threaded.pattern.adjacency)
    assert serial.dag.edges == threaded.dag.edges


def test_max_cond_zero_uses_only_marginal_tests(benchmark_summary):
    result = DiscoveryService(benchmark_summary, DiscoveryConfig(max_cond_size=0)).run()
    assert all(" Z={} " in line for line in result.trace if line.startswith("CI "))


def test_removed_edges_keep_their_sepsets(benchmark_summary):
    result = DiscoveryService(benchmark_summary).run()
    g = result.augmented
    for i in range(g.n_nodes):
        for j in range(i + 1, g.n_nodes):
            if not g.adjacent(i, j):
                assert g.sepset(i, j) is not None


def test_phase_errors_carry_the_phase(benchmark_summary, monkeypatch):
    service = DiscoveryService(benchmark_summary)

    def broken(*args, **kwargs):
        raise exceptions.NumericError("singular")

    monkeypatch.setattr(service.tester, "evaluate", broken)
    with pytest.raises(exceptions.DiscoveryPhaseError) as error:
        service.run()
    assert error.value.phase == "changing"


# Scenarios
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def changing_chain(K: int = 10, n_k: int = 100, seed: int = 5):
    """
    V0 -> V1 -> V2 where V0 is homogeneous, V1 gets a small domain offset and V2 a large unrelated one.
    """
    rng = np.random.default_rng(seed)
    small = np.linspace(-1.0, 1.0, K)
    large = 3.0 * np.linspace(-1.0, 1.0, K)[rng.permutation(K)]
    datasets = []
    for k in range(K):
        v0 = rng.standard_normal(n_k)
        v1 = 0.6 * v0 + small[k] + 0.8 * rng.standard_normal(n_k)
        v2 = 0.6 * v1 + large[k] + 0.8 * rng.standard_normal(n_k)
        datasets.append(np.column_stack([v0, v1, v2]))
    return datasets


def test_changing_chain_is_recovered_through_both_rules():
    result = DiscoveryService(federate(changing_chain(), seed=5), DiscoveryConfig(alpha=0.01)).run()
    g = result.augmented

    assert set(g.changing_modules) == {1, 2}
    assert not g.adjacent(g.surrogate, 0)
    assert result.pattern.skeleton() == {frozenset((0, 1)), frozenset((1, 2))}
    assert 1 in g.sepset(0, 2)

    # rule i orients 0 -> 1 through the surrogate, the direction score orients the changing pair
    assert [(score.x, score.y, score.decision) for score in result.icp_scores] == [(1, 2, Direction.FORWARD)]
    assert result.pattern.directed_edges() == [(0, 1), (1, 2)]
    assert result.pattern.undirected_edges() == []
    assert result.dag.edges == [(0, 1), (1, 2)]


def test_homogeneous_chain_keeps_the_mediator_in_the_sepset():
    rng = np.random.default_rng(21)
    v0 = rng.standard_normal(1000)
    v1 = 0.6 * v0 + 0.8 * rng.standard_normal(1000)
    v2 = 0.6 * v1 + 0.8 * rng.standard_normal(1000)
    result = DiscoveryService(federate([np.column_stack([v0, v1, v2])], seed=21), DiscoveryConfig(alpha=0.01)).run()
    g = result.augmented

    assert not g.changing_modules
    assert result.pattern.skeleton() == {frozenset((0, 1)), frozenset((1, 2))}
    assert not g.adjacent(0, 2)
    assert 1 in g.sepset(0, 2)
    assert result.pattern.directed_edges() == []
    assert result.icp_scores == []


def test_homogeneous_clients_report_no_changing_modules():
    empty = 0
    for seed in range(20):
        rng = np.random.default_rng([seed, 300])
        datasets = []
        for _ in range(4):
            v0 = rng.standard_normal(250)
            datasets.append(np.column_stack([v0, v0 + rng.standard_normal(250)]))
        service = DiscoveryService(federate(datasets, seed=seed))
        g = service.detect_changing_modules(graph_service.complete_augmented(2))
        empty += not g.changing_modules
    assert empty >= 15
