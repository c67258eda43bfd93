import logging
from itertools import combinations
from typing import Dict, List, Tuple

import numpy as np
import networkx as nx

# Import models
from app.models import AugmentedGraph, Dag, Mark, PatternGraph, PatternState

# Import Exceptions
from app import exceptions


# Construction
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def complete_augmented(d: int) -> AugmentedGraph:
    """
    Completely undirected graph over d observed variables plus the surrogate node.
    """
    if d < 1:
        raise exceptions.InvalidConfiguration(f"An augmented graph needs at least one observed variable, got d={d}.")

    n_nodes = d + 1
    marks = np.full((n_nodes, n_nodes), Mark.UNDIRECTED, dtype=np.int8)
    np.fill_diagonal(marks, Mark.NONE)
    return AugmentedGraph(d=d, marks=marks)


# Orientation Helpers
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def _try_orient(g: AugmentedGraph, i: int, j: int) -> bool:
    """
    Orient i -> j if the edge is undirected, not in conflict, and closes no directed cycle.
    Returns True when the graph changed.
    """
    if not g.adjacent(i, j) or g.in_conflict(i, j):
        return False
    if not g.is_undirected(i, j):
        if g.is_directed(j, i):
            g.record_conflict(i, j)
        return False
    if g.has_directed_path(j, i):
        logging.warning(f"Orientation {i}->{j} would close a directed cycle; left undirected")
        g.record_conflict(i, j)
        return False
    g.orient(i, j)
    return True


def orient_edge(g: AugmentedGraph, i: int, j: int) -> bool:
    """Cycle-checked orientation of a single undirected edge, in place."""
    return _try_orient(g, i, j)


def _apply_demands(g: AugmentedGraph, demands: Dict[Tuple[int, int], set]) -> None:
    """
    Apply collected orientation demands keyed by unordered pair. A pair demanded both ways is a
    conflict and stays as it is.
    """
    for pair in sorted(demands):
        heads = demands[pair]
        if len(heads) > 1:
            logging.warning(f"Conflicting orientation demands on edge {pair[0]}-{pair[1]}; left undirected")
            g.record_conflict(*pair)
            continue
        head = next(iter(heads))
        tail = pair[0] if head == pair[1] else pair[1]
        _try_orient(g, tail, head)


def _demand(demands: Dict[Tuple[int, int], set], tail: int, head: int) -> None:
    pair = (tail, head) if tail < head else (head, tail)
    demands.setdefault(pair, set()).add(head)


def orient_surrogate_edges(g: AugmentedGraph) -> AugmentedGraph:
    """
    Every surviving edge between the surrogate node and an observed variable points away from the surrogate.
    """
    g = g.copy()
    for i in sorted(g.changing_modules):
        g.orient(g.surrogate, i)
    return g


def surrogate_triple_demands(g: AugmentedGraph) -> Dict[Tuple[int, int], set]:
    """
    Rule i over unshielded triples U -> V_i - V_j with U and V_j non-adjacent: V_i outside
    sepset(U, V_j) gives the collider U -> V_i <- V_j, V_i inside it gives V_i -> V_j.
    """
    demands: Dict[Tuple[int, int], set] = {}
    u = g.surrogate
    for i in sorted(g.changing_modules):
        for j in g.neighbors(i):
            if j == u or g.adjacent(u, j):
                continue
            sepset = g.sepset(u, j)
            if sepset is None:
                continue
            if i in sepset:
                _demand(demands, i, j)
            else:
                _demand(demands, j, i)
    return demands


def orient_surrogate_triples(g: AugmentedGraph) -> AugmentedGraph:
    """
    Rule i alone: surrogate edges plus the unshielded triples through the surrogate.
    """
    g = orient_surrogate_edges(g)
    _apply_demands(g, surrogate_triple_demands(g))
    return g


def collider_demands(g: AugmentedGraph) -> Dict[Tuple[int, int], set]:
    """
    Unshielded colliders among observed triples a - b - c with b outside sepset(a, c).
    """
    demands: Dict[Tuple[int, int], set] = {}
    for b in range(g.d):
        observed = [k for k in g.neighbors(b) if k != g.surrogate]
        for a, c in combinations(observed, 2):
            if g.adjacent(a, c):
                continue
            sepset = g.sepset(a, c)
            if sepset is None or b in sepset:
                continue
            _demand(demands, a, b)
            _demand(demands, c, b)
    return demands


def orient_colliders(g: AugmentedGraph) -> AugmentedGraph:
    g = g.copy()
    _apply_demands(g, collider_demands(g))
    return g


# Meek Rules
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def _rule1(g: AugmentedGraph) -> bool:
    """a -> b - c with a, c non-adjacent: orient b -> c."""
    changed = False
    for b in range(g.n_nodes):
        for c in g.undirected_neighbors(b):
            if any(not g.adjacent(a, c) for a in g.parents(b) if a != c):
                changed |= _try_orient(g, b, c)
    return changed


def _rule2(g: AugmentedGraph) -> bool:
    """a -> b -> c with a - c: orient a -> c."""
    changed = False
    for a in range(g.n_nodes):
        for c in g.undirected_neighbors(a):
            if any(g.is_directed(b, c) for b in g.children(a)):
                changed |= _try_orient(g, a, c)
    return changed


def _rule3(g: AugmentedGraph) -> bool:
    """a - b -> d, a - c -> d, b and c non-adjacent, a - d: orient a -> d."""
    changed = False
    for a in range(g.n_nodes):
        for d in g.undirected_neighbors(a):
            candidates = [b for b in g.undirected_neighbors(a) if b != d and g.is_directed(b, d)]
            if any(not g.adjacent(b, c) for b, c in combinations(candidates, 2)):
                changed |= _try_orient(g, a, d)
    return changed


def apply_meek_rules(g: AugmentedGraph) -> AugmentedGraph:
    g = g.copy()
    changed = True
    while changed:
        changed = _rule1(g)
        changed |= _rule2(g)
        changed |= _rule3(g)
    return g


def apply_orientation_rules(g: AugmentedGraph) -> AugmentedGraph:
    """
    Surrogate orientation, rule-i triples and observed colliders from the recorded sepsets,
    then propagation to a fixpoint. Never removes an edge, never closes a cycle.
    """
    g = orient_surrogate_edges(g)
    demands = surrogate_triple_demands(g)
    for pair, heads in collider_demands(g).items():
        demands.setdefault(pair, set()).update(heads)
    _apply_demands(g, demands)
    return apply_meek_rules(g)


# Pattern to DAG
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def cpdag_to_dag(p: PatternGraph) -> Dag:
    """
    Consistent DAG extension of a pattern by repeated sink elimination, highest index first,
    so a free undirected edge points from its lower to its higher index.
    When no consistent extension exists the remaining undirected edges follow a topological
    order of the directed part and the result is flagged as forced.
    """
    if not p.is_acyclic():
        raise exceptions.InputError("The directed part of the pattern contains a cycle.")

    adjacency = p.adjacency.copy()
    directed: List[Tuple[int, int]] = p.directed_edges()
    remaining = set(range(p.d))

    while remaining:
        sink = _find_sink(adjacency, remaining)
        if sink is None:
            break
        for y in sorted(remaining):
            if adjacency[sink, y] == PatternState.UNDIRECTED:
                directed.append((y, sink))
        remaining.discard(sink)

    forced = bool(remaining)
    if forced:
        logging.warning(f"Pattern has no consistent extension; orienting {len(remaining)} remaining nodes by tie-break")
        directed.extend(_forced_orientation(p, adjacency, remaining, directed))

    dag = Dag(d=p.d, edges=sorted(set(directed)), forced=forced)
    if not dag.is_acyclic():
        raise exceptions.NumericError("DAG extension produced a cycle.")
    return dag


def _find_sink(adjacency: np.ndarray, remaining: set):
    for x in sorted(remaining, reverse=True):
        others = [y for y in remaining if y != x]
        if any(adjacency[x, y] == PatternState.DIRECTED for y in others):
            continue
        undirected = [y for y in others if adjacency[x, y] == PatternState.UNDIRECTED]
        adjacent = [y for y in others if adjacency[x, y] != PatternState.ABSENT or adjacency[y, x] != PatternState.ABSENT]
        if all(adjacency[y, z] != PatternState.ABSENT or adjacency[z, y] != PatternState.ABSENT
               for y in undirected for z in adjacent if z != y):
            return x
    return None


def _forced_orientation(p: PatternGraph, adjacency: np.ndarray, remaining: set, directed: List[Tuple[int, int]]) -> List[Tuple[int, int]]:
    graph = nx.DiGraph()
    graph.add_nodes_from(range(p.d))
    graph.add_edges_from(directed)
    rank = {node: position for position, node in enumerate(nx.lexicographical_topological_sort(graph))}
    extra = []
    for x, y in combinations(sorted(remaining), 2):
        if adjacency[x, y] == PatternState.UNDIRECTED:
            extra.append((x, y) if rank[x] < rank[y] else (y, x))
    return extra
