import logging
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import networkx as nx

# Import models
from app.models import Benchmark, Dag, Family, GenConfig

# Import Exceptions
from app import exceptions


# Tangent inputs are clipped to stay clear of the poles at +/- pi/2
TAN_CLIP = 1.4

POWER_COLUMNS = ["W", "X", "Y", "Z"]


def variable_names(d: int) -> List[str]:
    return [f"V{i}" for i in range(d)]


def _square(signed: bool) -> Callable[[np.ndarray], np.ndarray]:
    if signed:
        return lambda x: x * np.abs(x)
    return lambda x: x ** 2


def _functional_set(signed_square: bool) -> List[Callable[[np.ndarray], np.ndarray]]:
    return [lambda x: x, _square(signed_square), np.sinc, np.tanh]


def _postnonlinear_set() -> List[Callable[[np.ndarray], np.ndarray]]:
    return [lambda x: x, _square(True), np.sin, lambda x: np.tan(np.clip(x, -TAN_CLIP, TAN_CLIP))]


# Graphs
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def gen_er_dag(d: int, edge_factor: int = 1, seed: int = 0) -> Dag:
    """
    Erdos-Renyi DAG with exactly edge_factor * d edges, oriented along a random topological order.
    """
    if d < 1:
        raise exceptions.InvalidConfiguration(f"d must be at least 1, got {d}.")
    if d == 1:
        return Dag(d=1)

    n_edges = edge_factor * d
    max_edges = d * (d - 1) // 2
    if n_edges > max_edges:
        raise exceptions.InvalidConfiguration(f"Cannot place {n_edges} edges on {d} variables (at most {max_edges}).")

    rng = np.random.default_rng([seed, 0])
    skeleton = nx.gnm_random_graph(d, n_edges, seed=int(rng.integers(2 ** 32)))
    rank = {int(node): position for position, node in enumerate(rng.permutation(d))}
    edges = sorted((i, j) if rank[i] < rank[j] else (j, i) for i, j in skeleton.edges())
    return Dag(d=d, edges=edges)


def choose_changing(d: int, n_changing: int, seed: int = 0) -> List[int]:
    if n_changing > d:
        raise exceptions.InvalidConfiguration(f"n_changing ({n_changing}) cannot exceed d ({d}).")
    rng = np.random.default_rng([seed, 3])
    return sorted(int(i) for i in rng.choice(d, size=n_changing, replace=False))


# Structural Causal Models
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def gen_linear_gaussian(dag: Dag, cfg: GenConfig, changing: Optional[Sequence[int]] = None) -> List[np.ndarray]:
    """
    Linear Gaussian data per client. Changing modules redraw their coefficients and noise scale for every client.
    """
    changing = set(choose_changing(dag.d, cfg.n_changing, cfg.seed) if changing is None else changing)
    order = dag.topological_order()

    rng = np.random.default_rng([cfg.seed, 1])
    coefficients = {edge: rng.uniform(0.5, 2.5) for edge in dag.directed_edges()}
    noise_variance = rng.uniform(1.0, 2.0, dag.d)

    datasets = []
    for client in range(1, cfg.K + 1):
        data = np.zeros((cfg.n_k, dag.d))
        for i in order:
            parents = dag.parents(i)
            noise = np.random.default_rng([cfg.seed, 2, client, i]).standard_normal(cfg.n_k)
            if i in changing:
                module_rng = np.random.default_rng([cfg.seed, 4, client, i])
                weights = module_rng.uniform(0.5, 2.5, len(parents))
                scale = module_rng.uniform(1.0, 3.0)
            else:
                weights = np.array([coefficients[(j, i)] for j in parents])
                scale = np.sqrt(noise_variance[i])
            data[:, i] = (data[:, parents] @ weights if parents else 0.0) + scale * noise
        datasets.append(data)
    return datasets


def gen_general_functional(dag: Dag, cfg: GenConfig, changing: Optional[Sequence[int]] = None) -> List[np.ndarray]:
    """
    Each edge applies a function drawn from linear, square, sinc and tanh. Every variable is standardized
    with its pooled mean and deviation before its children use it.
    """
    changing = set(choose_changing(dag.d, cfg.n_changing, cfg.seed) if changing is None else changing)
    functions = _functional_set(cfg.signed_square)

    rng = np.random.default_rng([cfg.seed, 1])
    edge_function: Dict = {edge: functions[int(rng.integers(len(functions)))] for edge in dag.directed_edges()}
    coefficients = {edge: rng.uniform(0.5, 2.5) for edge in dag.directed_edges()}
    uniform_noise = rng.integers(2, size=dag.d).astype(bool)

    datasets = [np.zeros((cfg.n_k, dag.d)) for _ in range(cfg.K)]
    for i in dag.topological_order():
        parents = dag.parents(i)
        for client, data in enumerate(datasets, start=1):
            noise_rng = np.random.default_rng([cfg.seed, 2, client, i])
            if uniform_noise[i]:
                noise = noise_rng.uniform(-0.5, 0.5, cfg.n_k)
            else:
                noise = noise_rng.standard_normal(cfg.n_k)

            if i in changing:
                module_rng = np.random.default_rng([cfg.seed, 4, client, i])
                weights = module_rng.uniform(0.5, 2.5, len(parents))
                scale = module_rng.uniform(1.0, 3.0)
            else:
                weights = [coefficients[(j, i)] for j in parents]
                scale = 1.0

            column = scale * noise
            for weight, j in zip(weights, parents):
                column = column + weight * edge_function[(j, i)](data[:, j])
            data[:, i] = column

        pooled = np.concatenate([data[:, i] for data in datasets])
        mean, std = pooled.mean(), pooled.std()
        for data in datasets:
            data[:, i] = (data[:, i] - mean) / (std if std > 0 else 1.0)
    return datasets


def gen_postnonlinear_power(n: int, K: int, seed: int = 0) -> List[np.ndarray]:
    """
    Columns W, X, Y, Z with X and Y sharing the W component and Z independent of both, split into K clients.
    """
    if K < 1 or n < 1 or n % K:
        raise exceptions.InvalidConfiguration(f"n ({n}) must be a positive multiple of K ({K}).")

    rng = np.random.default_rng([seed, 5])
    functions = _postnonlinear_set()
    f_hat = functions[int(rng.integers(len(functions)))]
    g_hat = functions[int(rng.integers(len(functions)))]

    def draw() -> np.ndarray:
        if rng.integers(2):
            return rng.uniform(-0.5, 0.5, n)
        return rng.standard_normal(n)

    w, z, noise_x, noise_y = draw(), draw(), draw(), draw()
    x = g_hat(f_hat(w) + noise_x)
    y = g_hat(f_hat(w) + noise_y)
    data = np.column_stack([w, x, y, z])
    return [part.copy() for part in np.split(data, K)]


def shuffle_domains(datasets: Sequence[np.ndarray], seed: int = 0) -> List[np.ndarray]:
    """
    Relabel domains by permuting the client order.
    """
    permutation = np.random.default_rng([seed, 6]).permutation(len(datasets))
    return [datasets[int(k)] for k in permutation]


# Benchmarks
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def generate(cfg: GenConfig) -> Benchmark:
    """
    Full benchmark instance for a configuration.
    """
    if cfg.family == Family.POSTNONLINEAR_POWER:
        datasets = gen_postnonlinear_power(cfg.n_k * cfg.K, cfg.K, cfg.seed)
        return Benchmark(config=cfg, dag=Dag(d=4, edges=[(0, 1), (0, 2)]), changing=[], datasets=datasets,
                         columns=list(POWER_COLUMNS))

    dag = gen_er_dag(cfg.d, cfg.edge_factor, cfg.seed)
    changing = choose_changing(cfg.d, cfg.n_changing, cfg.seed)
    if cfg.family == Family.LINEAR_GAUSSIAN:
        datasets = gen_linear_gaussian(dag, cfg, changing)
    else:
        datasets = gen_general_functional(dag, cfg, changing)

    logging.info(f"Generated {cfg.family.value} benchmark: d={cfg.d}, K={cfg.K}, n_k={cfg.n_k}, "
                 f"{len(dag.edges)} edges, changing={changing}")
    return Benchmark(config=cfg, dag=dag, changing=changing, datasets=datasets, columns=variable_names(cfg.d))
