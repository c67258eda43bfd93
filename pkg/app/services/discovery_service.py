import logging
from concurrent.futures import ThreadPoolExecutor
from functools import partial
from itertools import combinations
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, TypeVar

# Import models
from app.models import (AugmentedGraph, CITestResult, DiscoveryConfig, DiscoveryResult, Direction,
                        GlobalSummary, IcpScore)

# Import services
from app.services import graph_service, icp_service
from app.services.citest_service import IndependenceTester, trace_logger

# Import Exceptions
from app import exceptions


T = TypeVar("T")
R = TypeVar("R")

# (x, y, candidate conditioning sets in enumeration order)
SearchTask = Tuple[int, int, List[Tuple[int, ...]]]


class DiscoveryService:
    """
    Server-side driver: changing-module detection, skeleton search over the augmented graph,
    direction determination and DAG extension, all from one GlobalSummary.
    """

    def __init__(self, summary: GlobalSummary, config: Optional[DiscoveryConfig] = None):
        self.summary = summary
        self.config = config or DiscoveryConfig()
        self.tester = IndependenceTester(summary, gamma=self.config.gamma, alpha=self.config.alpha)
        self.icp_scores: List[IcpScore] = []
        self.test_counts = {"changing": 0, "skeleton": 0}

    @property
    def trace(self) -> List[str]:
        return self.tester.trace

    # Helpers
    # --------------------------------------------------------------------------------------------------------------------------------------------------- #

    def _map(self, fn: Callable[[T], R], items: Sequence[T]) -> List[R]:
        """
        Ordered map, threaded when more than one worker is configured.
        """
        if self.config.workers <= 1 or len(items) <= 1:
            return [fn(item) for item in items]
        with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
            return list(pool.map(fn, items))

    def _search(self, phase: str, task: SearchTask) -> List[CITestResult]:
        """
        Evaluate conditioning sets in order until the first independence.
        """
        x, y, subsets = task
        results = []
        for subset in subsets:
            try:
                result = self.tester.evaluate(x, y, subset)
            except exceptions.InvalidConfiguration:
                raise
            except exceptions.FedCDHException as e:
                raise exceptions.DiscoveryPhaseError(phase, f"test of {x} and {y} given {subset}: {str(e)}")
            results.append(result)
            if result.independent:
                break
        return results

    def _run_tasks(self, tasks: List[SearchTask], phase: str) -> List[Tuple[int, int, Tuple[int, ...]]]:
        """
        Run search tasks and record their tests in enumeration order.
        Returns the (x, y, sepset) triples of every found independence.
        """
        removals = []
        for task, results in zip(tasks, self._map(partial(self._search, phase), tasks)):
            for result in results:
                self.tester.record(result)
                self.test_counts[phase] += 1
            if results and results[-1].independent:
                removals.append((task[0], task[1], results[-1].z))
        return removals

    # Phases
    # --------------------------------------------------------------------------------------------------------------------------------------------------- #

    def detect_changing_modules(self, g: AugmentedGraph) -> AugmentedGraph:
        """
        Test the surrogate against each observed variable given subsets of its observed neighbors.
        Surviving surrogate edges mark the changing modules.
        """
        g = g.copy()
        u = g.surrogate
        tasks: List[SearchTask] = []
        for i in range(g.d):
            others = [j for j in g.neighbors(i) if j != u]
            subsets = [subset for size in range(min(self.config.max_cond_size, len(others)) + 1)
                       for subset in combinations(others, size)]
            tasks.append((u, i, subsets))

        removals = self._run_tasks(tasks, "changing")

        for x, y, sepset in removals:
            g.remove_edge(x, y, sepset)
        g = graph_service.orient_surrogate_edges(g)
        logging.info(f"Changing modules: {sorted(g.changing_modules)}")
        return g

    def discover_skeleton(self, g: AugmentedGraph) -> AugmentedGraph:
        """
        Level-synchronous removal over observed pairs; neighbor sets come from the snapshot taken at each level.
        """
        g = g.copy()
        for level in range(self.config.max_cond_size + 1):
            snapshot = {i: set(g.neighbors(i)) for i in range(g.n_nodes)}
            tasks: List[SearchTask] = []
            for i, j in g.edges():
                if j == g.surrogate:
                    continue
                subsets = _level_subsets(snapshot[i] - {j}, snapshot[j] - {i}, level)
                if subsets:
                    tasks.append((i, j, subsets))
            if not tasks:
                break

            removals = self._run_tasks(tasks, "skeleton")

            for x, y, sepset in removals:
                g.remove_edge(x, y, sepset)
            logging.info(f"Skeleton level {level}: removed {len(removals)} edges, {g.edge_count()} remain")
        return g

    def orient(self, g: AugmentedGraph) -> AugmentedGraph:
        """
        Rule i through the surrogate, rule ii on adjacent pairs of changing modules, then closure.
        """
        g = graph_service.orient_surrogate_triples(g)

        changing = g.changing_modules
        for x, y in g.edges():
            if x not in changing or y not in changing or not g.is_undirected(x, y):
                continue
            try:
                score = icp_service.score_direction(self.summary, x, y, self.config.gamma, self.config.tie_tol)
            except exceptions.PreconditionViolation as e:
                logging.warning(f"Skipping direction scoring for ({x}, {y}): {str(e)}")
                continue
            except exceptions.FedCDHException as e:
                raise exceptions.DiscoveryPhaseError("orient", f"pair ({x}, {y}): {str(e)}")

            self.icp_scores.append(score)
            line = score.trace_line()
            self.trace.append(line)
            trace_logger.info(line)
            if score.decision == Direction.FORWARD:
                graph_service.orient_edge(g, x, y)
            elif score.decision == Direction.BACKWARD:
                graph_service.orient_edge(g, y, x)

        g = graph_service.apply_orientation_rules(g)
        if g.conflicts:
            logging.warning(f"Orientation conflicts left undirected: {sorted(g.conflicts)}")
        return g

    def run(self) -> DiscoveryResult:
        if self.summary.d < 1:
            raise exceptions.InvalidConfiguration("The summary holds no observed variables.")

        g = graph_service.complete_augmented(self.summary.d)
        g = self.detect_changing_modules(g)
        g = self.discover_skeleton(g)
        g = self.orient(g)

        pattern = g.to_pattern()
        try:
            dag = graph_service.cpdag_to_dag(pattern)
        except exceptions.FedCDHException as e:
            raise exceptions.DiscoveryPhaseError("extension", str(e))

        logging.info(f"Discovery finished after {self.tester.count} tests with {len(dag.edges)} edges")
        return DiscoveryResult(augmented=g, pattern=pattern, dag=dag, trace=list(self.trace),
                               test_counts=dict(self.test_counts, icp=len(self.icp_scores)),
                               icp_scores=list(self.icp_scores))


def _level_subsets(side_i: Iterable[int], side_j: Iterable[int], level: int) -> List[Tuple[int, ...]]:
    """
    Conditioning sets of one size from i's neighbors, then the new ones from j's, lexicographic.
    """
    subsets = list(combinations(sorted(side_i), level))
    seen = set(subsets)
    for subset in combinations(sorted(side_j), level):
        if subset not in seen:
            subsets.append(subset)
            seen.add(subset)
    return subsets
