import io
import logging
from typing import Dict, List, Sequence, Set, Tuple, Union

import numpy as np
import orjson
import pandas as pd
from rich.console import Console
from rich.table import Table
from scipy import stats

# Import models
from app.models import Dag, EvalReport, MetricSet, PatternGraph

# Import Exceptions
from app import exceptions


Graph = Union[Dag, PatternGraph]

SIGNIFICANCE_METRICS = ["skeleton_f1", "skeleton_shd", "direction_f1", "direction_shd"]


def _ratio(numerator: int, denominator: int) -> float:
    return numerator / denominator if denominator else 0.0


def _metric_set(predicted: Set, truth: Set, shd: int) -> MetricSet:
    tp = len(predicted & truth)
    precision = _ratio(tp, len(predicted))
    recall = _ratio(tp, len(truth))
    f1 = 2 * precision * recall / (precision + recall) if precision + recall > 0 else 0.0
    return MetricSet(f1=f1, precision=precision, recall=recall, shd=shd)


def structural_hamming_distance(pred: Graph, truth: Dag, reversal_cost: int = 1) -> int:
    """
    Missing or extra adjacencies cost 1, reversed edges cost reversal_cost, an undirected
    predicted edge against a directed true edge costs 1.
    """
    pred_directed = set(pred.directed_edges())
    truth_directed = set(truth.directed_edges())
    distance = 0
    for pair in pred.skeleton() | truth.skeleton():
        i, j = sorted(pair)
        if pair not in pred.skeleton() or pair not in truth.skeleton():
            distance += 1
            continue
        true_edge = (i, j) if (i, j) in truth_directed else (j, i)
        if true_edge in pred_directed:
            continue
        if (true_edge[1], true_edge[0]) in pred_directed:
            distance += reversal_cost
        else:
            distance += 1
    return distance


def evaluate(pred: Graph, truth: Dag, reversal_cost: int = 1) -> EvalReport:
    if pred.d != truth.d:
        raise exceptions.InputError(f"Predicted graph has {pred.d} variables, truth has {truth.d}.")

    pred_skeleton, truth_skeleton = pred.skeleton(), truth.skeleton()
    skeleton = _metric_set(pred_skeleton, truth_skeleton, len(pred_skeleton ^ truth_skeleton))
    direction = _metric_set(set(pred.directed_edges()), set(truth.directed_edges()),
                            structural_hamming_distance(pred, truth, reversal_cost))
    return EvalReport(skeleton=skeleton, direction=direction)


# Aggregation
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def summarize(reports: Sequence[EvalReport]) -> Dict[str, Tuple[float, float]]:
    """
    Mean and (population) standard deviation of every metric across replications.
    """
    if not reports:
        raise exceptions.InputError("Nothing to summarize.")
    frame = pd.DataFrame([report.flat() for report in reports])
    return {column: (float(frame[column].mean()), float(frame[column].std(ddof=0))) for column in frame.columns}


def paired_significance(first: Sequence[EvalReport], second: Sequence[EvalReport]) -> Dict[str, float]:
    """
    Wilcoxon signed-rank p-values between two paired series of reports.
    """
    if len(first) != len(second) or not first:
        raise exceptions.InputError(f"Paired series must be nonempty and equally long, got {len(first)} and {len(second)}.")

    a = pd.DataFrame([report.flat() for report in first])
    b = pd.DataFrame([report.flat() for report in second])
    p_values = {}
    for metric in SIGNIFICANCE_METRICS:
        differences = a[metric].to_numpy(dtype=float) - b[metric].to_numpy(dtype=float)
        if np.allclose(differences, 0.0):
            p_values[metric] = 1.0
            continue
        try:
            p_values[metric] = float(stats.wilcoxon(a[metric], b[metric]).pvalue)
        except ValueError as e:
            logging.warning(f"Wilcoxon test on {metric} failed: {str(e)}")
            p_values[metric] = 1.0
    return p_values


# Rendering
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


def render_json(payload) -> bytes:
    if hasattr(payload, "model_dump"):
        payload = payload.model_dump(mode="json")
    return orjson.dumps(payload, option=orjson.OPT_INDENT_2 | orjson.OPT_SORT_KEYS | orjson.OPT_SERIALIZE_NUMPY)


def render_table(rows: List[Dict], title: str = "") -> str:
    """
    Aligned plain-text table of flat rows.
    """
    table = Table(title=title or None)
    columns = list(rows[0].keys()) if rows else []
    for column in columns:
        table.add_column(column, justify="right" if _is_number(rows[0][column]) else "left")
    for row in rows:
        table.add_row(*[_format(row[column]) for column in columns])

    buffer = io.StringIO()
    Console(file=buffer, width=max(120, 16 * len(columns)), color_system=None).print(table)
    return buffer.getvalue()


def report_rows(report: EvalReport) -> List[Dict]:
    return [{"part": part, **getattr(report, part).model_dump()} for part in ("skeleton", "direction")]


def summary_rows(summary: Dict[str, Tuple[float, float]]) -> List[Dict]:
    return [{"metric": metric, "mean": mean, "std": std, "mean ± std": f"{mean:.3f} ± {std:.3f}"}
            for metric, (mean, std) in summary.items()]


def _is_number(value) -> bool:
    return isinstance(value, (int, float, np.integer, np.floating)) and not isinstance(value, bool)


def _format(value) -> str:
    if isinstance(value, (float, np.floating)):
        return f"{value:.4f}"
    return str(value)
