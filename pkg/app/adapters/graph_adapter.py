import os
from typing import Any, Dict, List, Union

import numpy as np
import orjson

# Model Imports
from app.models import AugmentedGraph, Dag, PatternGraph, PatternState

# Import Exceptions
from app import exceptions


Graph = Union[AugmentedGraph, PatternGraph, Dag]


class GraphAdapter:
    """
    Adjacency-matrix text files (0 absent, 1 i->j, 2 undirected) and edge-list JSON files for every graph type.
    """

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Conversions

    @staticmethod
    def adjacency(graph: Graph) -> np.ndarray:
        """
        Text-format matrix; for the augmented graph the surrogate row and column come last.
        """
        if isinstance(graph, Dag):
            return graph.adjacency()
        if isinstance(graph, PatternGraph):
            return graph.adjacency.copy()

        matrix = np.zeros((graph.n_nodes, graph.n_nodes), dtype=np.int8)
        for i, j in graph.edges():
            if graph.is_directed(i, j):
                matrix[i, j] = PatternState.DIRECTED
            elif graph.is_directed(j, i):
                matrix[j, i] = PatternState.DIRECTED
            else:
                matrix[i, j] = matrix[j, i] = PatternState.UNDIRECTED
        return matrix

    @classmethod
    def to_text(cls, graph: Graph) -> str:
        return "".join(" ".join(str(int(v)) for v in row) + "\n" for row in cls.adjacency(graph))

    @classmethod
    def to_document(cls, graph: Graph) -> Dict[str, Any]:
        matrix = cls.adjacency(graph)
        edges: List[Dict[str, Any]] = []
        for i, j in zip(*np.nonzero(matrix)):
            if matrix[i, j] == PatternState.DIRECTED:
                edges.append({"from": int(i), "to": int(j), "mark": "directed"})
            elif i < j:
                edges.append({"from": int(i), "to": int(j), "mark": "undirected"})

        document: Dict[str, Any] = {"d": graph.d, "edges": edges}
        if isinstance(graph, AugmentedGraph):
            document["surrogate"] = graph.surrogate
            document["changing_modules"] = sorted(graph.changing_modules)
        if isinstance(graph, Dag):
            document["forced"] = graph.forced
        return document

    @classmethod
    def to_json(cls, graph: Graph) -> bytes:
        return orjson.dumps(cls.to_document(graph), option=orjson.OPT_INDENT_2)

    @staticmethod
    def pattern_from_matrix(matrix: np.ndarray) -> PatternGraph:
        matrix = np.asarray(matrix, dtype=np.int8)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            raise exceptions.InputError(f"Adjacency matrix must be square, got shape {matrix.shape}.")
        if not np.isin(matrix, [PatternState.ABSENT, PatternState.DIRECTED, PatternState.UNDIRECTED]).all():
            raise exceptions.InputError("Adjacency entries must be 0, 1 or 2.")
        undirected = matrix == PatternState.UNDIRECTED
        if (undirected != undirected.T).any():
            raise exceptions.InputError("Undirected entries must be symmetric.")
        directed = matrix == PatternState.DIRECTED
        if (directed & (directed.T | undirected.T)).any():
            raise exceptions.InputError("A pair carries more than one edge.")
        if np.diag(matrix).any():
            raise exceptions.InputError("Self loops are not allowed.")
        return PatternGraph(d=matrix.shape[0], adjacency=matrix)

    @classmethod
    def pattern_from_document(cls, document: Dict[str, Any]) -> PatternGraph:
        try:
            d = int(document["d"])
            matrix = np.zeros((d, d), dtype=np.int8)
            for edge in document["edges"]:
                i, j = int(edge["from"]), int(edge["to"])
                if edge["mark"] == "directed":
                    matrix[i, j] = PatternState.DIRECTED
                elif edge["mark"] == "undirected":
                    matrix[i, j] = matrix[j, i] = PatternState.UNDIRECTED
                else:
                    raise exceptions.InputError(f"Unknown edge mark {edge['mark']!r}.")
        except (KeyError, TypeError, ValueError, IndexError) as e:
            raise exceptions.InputError(f"Malformed graph document: {str(e)}")
        return cls.pattern_from_matrix(matrix)

    # ------------------------------------------------------------------------------------------------------------------------- #
    # Files

    @classmethod
    def write(cls, graph: Graph, path: str) -> None:
        """
        Format follows the extension: .json edge list, anything else adjacency text.
        """
        if path.endswith(".json"):
            with open(path, "wb") as handle:
                handle.write(cls.to_json(graph))
        else:
            with open(path, "w") as handle:
                handle.write(cls.to_text(graph))

    @classmethod
    def read_pattern(cls, path: str) -> PatternGraph:
        if not os.path.exists(path):
            raise FileNotFoundError(f"Graph file not found: {path}")
        try:
            if path.endswith(".json"):
                with open(path, "rb") as handle:
                    return cls.pattern_from_document(orjson.loads(handle.read()))
            matrix = np.loadtxt(path, dtype=np.int64, ndmin=2)
        except (orjson.JSONDecodeError, ValueError) as e:
            raise exceptions.InputError(f"{path}: {str(e)}")
        return cls.pattern_from_matrix(matrix)

    @classmethod
    def read_graph(cls, path: str) -> Union[PatternGraph, Dag]:
        """
        A Dag when every edge is directed, the pattern otherwise.
        """
        pattern = cls.read_pattern(path)
        if pattern.undirected_edges():
            return pattern
        return Dag(d=pattern.d, edges=pattern.directed_edges())

    @classmethod
    def read_dag(cls, path: str) -> Dag:
        graph = cls.read_graph(path)
        if not isinstance(graph, Dag) or not graph.is_acyclic():
            raise exceptions.InputError(f"{path} does not hold a DAG.")
        return graph
