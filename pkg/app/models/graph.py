# Typing Imports
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

from enum import IntEnum

# Numpy and networkx
import numpy as np
import networkx as nx

# Pydantic
from pydantic import BaseModel, ConfigDict, Field


class Mark(IntEnum):
    """Mark stored at one endpoint of an edge. NONE means the edge is absent."""
    NONE = 0
    TAIL = 1
    ARROW = 2
    UNDIRECTED = 3


class PatternState(IntEnum):
    """Adjacency-matrix codes shared by the text format and PatternGraph."""
    ABSENT = 0
    DIRECTED = 1
    UNDIRECTED = 2


def _pair(i: int, j: int) -> Tuple[int, int]:
    return (i, j) if i < j else (j, i)


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  AugmentedGraph

class AugmentedGraph(BaseModel):
    """
    Mixed graph over d observed variables plus the surrogate node, which takes index d.
    marks[i, j] is the mark at j's end of the edge i - j.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    d: int
    marks: np.ndarray
    sepsets: Dict[Tuple[int, int], Tuple[int, ...]] = Field(default_factory=dict)
    conflicts: Set[Tuple[int, int]] = Field(default_factory=set)

    @property
    def n_nodes(self) -> int:
        return self.d + 1

    @property
    def surrogate(self) -> int:
        return self.d

    @property
    def changing_modules(self) -> FrozenSet[int]:
        return frozenset(int(i) for i in np.flatnonzero(self.marks[self.d, :self.d] != Mark.NONE))

    # Queries
    # ------------------------------------------------------------------------------------------------------------------------- #

    def adjacent(self, i: int, j: int) -> bool:
        return self.marks[i, j] != Mark.NONE

    def neighbors(self, i: int) -> List[int]:
        return [int(j) for j in np.flatnonzero(self.marks[i] != Mark.NONE)]

    def is_directed(self, i: int, j: int) -> bool:
        """True when the edge is i -> j."""
        return self.marks[i, j] == Mark.ARROW and self.marks[j, i] == Mark.TAIL

    def is_undirected(self, i: int, j: int) -> bool:
        return self.marks[i, j] == Mark.UNDIRECTED and self.marks[j, i] == Mark.UNDIRECTED

    def parents(self, j: int) -> List[int]:
        return [i for i in self.neighbors(j) if self.is_directed(i, j)]

    def children(self, i: int) -> List[int]:
        return [j for j in self.neighbors(i) if self.is_directed(i, j)]

    def undirected_neighbors(self, i: int) -> List[int]:
        return [j for j in self.neighbors(i) if self.is_undirected(i, j)]

    def edges(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.marks != Mark.NONE, k=1))
        return [(int(i), int(j)) for i, j in zip(rows, cols)]

    def edge_count(self) -> int:
        return len(self.edges())

    def in_conflict(self, i: int, j: int) -> bool:
        return _pair(i, j) in self.conflicts

    def sepset(self, i: int, j: int) -> Optional[Tuple[int, ...]]:
        return self.sepsets.get(_pair(i, j))

    def has_directed_path(self, source: int, target: int) -> bool:
        """Directed reachability over currently oriented edges."""
        seen = {source}
        stack = [source]
        while stack:
            node = stack.pop()
            if node == target:
                return True
            for child in self.children(node):
                if child not in seen:
                    seen.add(child)
                    stack.append(child)
        return False

    # Mutations
    # ------------------------------------------------------------------------------------------------------------------------- #

    def remove_edge(self, i: int, j: int, sepset: Tuple[int, ...]) -> None:
        self.marks[i, j] = Mark.NONE
        self.marks[j, i] = Mark.NONE
        self.sepsets[_pair(i, j)] = tuple(sorted(sepset))

    def orient(self, i: int, j: int) -> None:
        """Orient the existing edge as i -> j."""
        self.marks[i, j] = Mark.ARROW
        self.marks[j, i] = Mark.TAIL

    def record_conflict(self, i: int, j: int) -> None:
        self.conflicts.add(_pair(i, j))

    def copy(self) -> "AugmentedGraph":
        return AugmentedGraph(d=self.d, marks=self.marks.copy(), sepsets=dict(self.sepsets), conflicts=set(self.conflicts))

    def to_pattern(self) -> "PatternGraph":
        """Observed-variable pattern with the surrogate node removed."""
        d = self.d
        adjacency = np.zeros((d, d), dtype=np.int8)
        for i, j in self.edges():
            if j == d:
                continue
            if self.is_directed(i, j):
                adjacency[i, j] = PatternState.DIRECTED
            elif self.is_directed(j, i):
                adjacency[j, i] = PatternState.DIRECTED
            else:
                adjacency[i, j] = adjacency[j, i] = PatternState.UNDIRECTED
        return PatternGraph(d=d, adjacency=adjacency)


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  PatternGraph and Dag

class PatternGraph(BaseModel):
    """
    Partially directed graph over observed variables.
    adjacency[i, j] = 1 for i -> j; adjacency[i, j] = adjacency[j, i] = 2 for i - j.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    d: int
    adjacency: np.ndarray

    def directed_edges(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(self.adjacency == PatternState.DIRECTED)
        return [(int(i), int(j)) for i, j in zip(rows, cols)]

    def undirected_edges(self) -> List[Tuple[int, int]]:
        rows, cols = np.nonzero(np.triu(self.adjacency == PatternState.UNDIRECTED, k=1))
        return [(int(i), int(j)) for i, j in zip(rows, cols)]

    def skeleton(self) -> Set[FrozenSet[int]]:
        return {frozenset(edge) for edge in self.directed_edges() + self.undirected_edges()}

    def directed_part(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.d))
        graph.add_edges_from(self.directed_edges())
        return graph

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.directed_part())


class Dag(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    d: int
    edges: List[Tuple[int, int]] = Field(default_factory=list)

    # Set when no consistent extension existed and a tie-break orientation was forced
    forced: bool = False

    def directed_edges(self) -> List[Tuple[int, int]]:
        return sorted(self.edges)

    def undirected_edges(self) -> List[Tuple[int, int]]:
        return []

    def skeleton(self) -> Set[FrozenSet[int]]:
        return {frozenset(edge) for edge in self.edges}

    def to_networkx(self) -> nx.DiGraph:
        graph = nx.DiGraph()
        graph.add_nodes_from(range(self.d))
        graph.add_edges_from(self.edges)
        return graph

    def is_acyclic(self) -> bool:
        return nx.is_directed_acyclic_graph(self.to_networkx())

    def adjacency(self) -> np.ndarray:
        matrix = np.zeros((self.d, self.d), dtype=np.int8)
        for i, j in self.edges:
            matrix[i, j] = PatternState.DIRECTED
        return matrix

    def to_pattern(self) -> PatternGraph:
        return PatternGraph(d=self.d, adjacency=self.adjacency())

    def parents(self, j: int) -> List[int]:
        return sorted(i for i, k in self.edges if k == j)

    def topological_order(self) -> List[int]:
        return list(nx.lexicographical_topological_sort(self.to_networkx()))
