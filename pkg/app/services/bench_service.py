import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
import pandas as pd

# Import models
from app.models import DiscoveryConfig, EvalReport, Family, GenConfig

# Import services
from app.services import citest_service, datagen_service, federation_service, metrics_service
from app.services.discovery_service import DiscoveryService

# Import Exceptions
from app import exceptions


SUITES = ("linear", "functional", "dense", "hyper-h", "power", "shuffle")
VARY_KEYS = ("d", "K", "n_k")
DEFAULT_VALUES = {
    "d": [6, 12, 18, 24, 30],
    "K": [2, 4, 8, 16, 32],
    "n_k": [25, 50, 100, 200, 400],
    "h": [5, 10, 15],
    "n": [200, 400, 600, 800, 1000],
}


class BenchService:
    """
    Benchmark sweeps: each row aggregates replications over consecutive seeds.
    """

    def __init__(self, discovery: DiscoveryConfig, h: int = 5, replications: int = 10, workers: int = 1,
                 base: Optional[GenConfig] = None):
        if replications < 1:
            raise exceptions.InvalidConfiguration(f"replications must be at least 1, got {replications}.")
        self.discovery = discovery
        self.h = h
        self.replications = replications
        self.workers = workers
        self.base = base or GenConfig()

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Replications

    def _map(self, fn: Callable, items: Sequence) -> List:
        if self.workers <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.workers) as pool:
            return list(pool.map(fn, items))

    def replicate(self, cfg: GenConfig, h: Optional[int] = None, shuffle: bool = False) -> Tuple[EvalReport, float]:
        """
        Generate, federate, discover and evaluate one instance.
        """
        started = time.perf_counter()
        benchmark = datagen_service.generate(cfg)
        datasets = benchmark.datasets
        if shuffle:
            datasets = datagen_service.shuffle_domains(datasets, cfg.seed)
        summary, _ = federation_service.simulate(datasets, h=h or self.h, seed=cfg.seed)
        config = self.discovery.model_copy(update={"seed": cfg.seed, "workers": 1})
        result = DiscoveryService(summary, config).run()
        report = metrics_service.evaluate(result.dag, benchmark.dag)
        return report, time.perf_counter() - started

    def _row(self, label: Dict, outcomes: List[Tuple[EvalReport, float]]) -> Dict:
        summary = metrics_service.summarize([report for report, _ in outcomes])
        row = dict(label)
        for metric, (mean, std) in summary.items():
            row[f"{metric}_mean"] = mean
            row[f"{metric}_std"] = std
        row["runtime_s"] = float(np.mean([seconds for _, seconds in outcomes]))
        return row

    def _configs(self, **updates) -> List[GenConfig]:
        return [self.base.model_copy(update=dict(updates, seed=self.base.seed + r)) for r in range(self.replications)]

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Suites

    def structure_sweep(self, suite: str, family: Family, edge_factor: int, vary: Optional[str],
                        values: Optional[List[int]]) -> pd.DataFrame:
        if vary is not None and vary not in VARY_KEYS:
            raise exceptions.InvalidConfiguration(f"--vary must be one of {', '.join(VARY_KEYS)}, got {vary!r}.")
        settings = [(vary, value) for value in (values or DEFAULT_VALUES[vary])] if vary else [(None, None)]

        rows = []
        for key, value in settings:
            updates = {"family": family, "edge_factor": edge_factor}
            if key is not None:
                updates[key] = value
            configs = self._configs(**updates)
            logging.info(f"Suite {suite}: {key or 'default'}={value if value is not None else '-'}, {len(configs)} replications")
            outcomes = self._map(self.replicate, configs)
            rows.append(self._row({"suite": suite, "vary": key or "", "value": value if value is not None else ""}, outcomes))
        return pd.DataFrame(rows)

    def hyper_h(self, values: Optional[List[int]]) -> pd.DataFrame:
        rows = []
        configs = self._configs(family=Family.LINEAR_GAUSSIAN)
        for h in values or DEFAULT_VALUES["h"]:
            outcomes = self._map(lambda cfg: self.replicate(cfg, h=h), configs)
            rows.append(self._row({"suite": "hyper-h", "vary": "h", "value": h}, outcomes))
        return pd.DataFrame(rows)

    def power(self, values: Optional[List[int]], K: int = 10) -> pd.DataFrame:
        """
        Rejection rate of X vs Y given Z (dependent) and of X vs Z (independent) on post-nonlinear data,
        federated from the clients and centralized with exact kernels on the pooled rows.
        """
        rows = []
        for n in values or DEFAULT_VALUES["n"]:
            def trial(seed: int) -> Tuple[bool, bool, bool, bool]:
                datasets = datagen_service.gen_postnonlinear_power(n, K, seed)
                summary, _ = federation_service.simulate(datasets, h=self.h, seed=seed,
                                                         columns=datagen_service.POWER_COLUMNS)
                dependent = citest_service.test_ci(summary, 1, 2, (3,), self.discovery.gamma, self.discovery.alpha)
                null = citest_service.test_ci(summary, 1, 3, (), self.discovery.gamma, self.discovery.alpha)
                pooled = np.vstack(datasets)
                central_dependent = citest_service.pooled_kernel_ci(pooled, 1, 2, (3,), self.discovery.gamma,
                                                                    self.discovery.alpha)
                central_null = citest_service.pooled_kernel_ci(pooled, 1, 3, (), self.discovery.gamma, self.discovery.alpha)
                return (not dependent.independent, not null.independent,
                        not central_dependent.independent, not central_null.independent)

            started = time.perf_counter()
            outcomes = self._map(trial, [self.base.seed + r for r in range(self.replications)])
            rows.append({"suite": "power", "vary": "n", "value": n,
                         "power": float(np.mean([outcome[0] for outcome in outcomes])),
                         "type_i": float(np.mean([outcome[1] for outcome in outcomes])),
                         "power_central": float(np.mean([outcome[2] for outcome in outcomes])),
                         "type_i_central": float(np.mean([outcome[3] for outcome in outcomes])),
                         "runtime_s": (time.perf_counter() - started) / self.replications})
        return pd.DataFrame(rows)

    def shuffle(self) -> Tuple[pd.DataFrame, Dict[str, float]]:
        configs = self._configs(family=Family.LINEAR_GAUSSIAN)
        original = self._map(self.replicate, configs)
        shuffled = self._map(lambda cfg: self.replicate(cfg, shuffle=True), configs)
        p_values = metrics_service.paired_significance([r for r, _ in original], [r for r, _ in shuffled])
        rows = [self._row({"suite": "shuffle", "vary": "domains", "value": "original"}, original),
                self._row({"suite": "shuffle", "vary": "domains", "value": "shuffled"}, shuffled)]
        return pd.DataFrame(rows), p_values

    def run(self, suite: str, vary: Optional[str] = None, values: Optional[List[int]] = None) -> Tuple[pd.DataFrame, Dict[str, float]]:
        if suite not in SUITES:
            raise exceptions.InvalidConfiguration(f"Unknown suite {suite!r}; choose from {', '.join(SUITES)}.")

        if suite == "linear":
            return self.structure_sweep(suite, Family.LINEAR_GAUSSIAN, 1, vary, values), {}
        if suite == "functional":
            return self.structure_sweep(suite, Family.GENERAL_FUNCTIONAL, 1, vary, values), {}
        if suite == "dense":
            return self.structure_sweep(suite, Family.LINEAR_GAUSSIAN, 2, vary, values), {}
        if suite == "hyper-h":
            return self.hyper_h(values), {}
        if suite == "power":
            return self.power(values, K=self.base.K), {}
        return self.shuffle()


def plot_table(table: pd.DataFrame, path: str) -> None:
    """
    F1 (or power, federated and centralized) against the swept value, one PNG per table.
    """
    figure, axis = plt.subplots(figsize=(6, 4))
    x = [str(value) for value in table["value"]]
    if "power" in table.columns:
        axis.plot(x, table["power"], marker="o", label="power")
        axis.plot(x, table["type_i"], marker="s", label="type I")
        if "power_central" in table.columns:
            axis.plot(x, table["power_central"], marker="o", linestyle="--", label="power (centralized)")
            axis.plot(x, table["type_i_central"], marker="s", linestyle="--", label="type I (centralized)")
        axis.set_ylabel("rejection rate")
    else:
        for part in ("skeleton", "direction"):
            axis.errorbar(x, table[f"{part}_f1_mean"], yerr=table[f"{part}_f1_std"], marker="o", capsize=3, label=f"{part} F1")
        axis.set_ylabel("F1")
    axis.set_xlabel(str(table["vary"].iloc[0]) or "setting")
    axis.set_ylim(0, 1.05)
    axis.legend()
    figure.tight_layout()
    figure.savefig(path, dpi=120)
    plt.close(figure)
