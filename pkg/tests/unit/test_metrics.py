import numpy as np
import pytest

# Import models
from app.models import Dag, EvalReport, MetricSet, PatternGraph, PatternState

# Import services
from app.services import metrics_service

# Import Exceptions
from app import exceptions


TRUTH = Dag(d=4, edges=[(0, 1), (1, 2), (3, 2)])


def report(f1: float, shd: int) -> EvalReport:
    part = MetricSet(f1=f1, precision=f1, recall=f1, shd=shd)
    return EvalReport(skeleton=part, direction=part)


def test_perfect_prediction():
    result = metrics_service.evaluate(TRUTH, TRUTH)
    assert result.skeleton.f1 == 1.0
    assert result.direction.f1 == 1.0
    assert result.skeleton.shd == 0
    assert result.direction.shd == 0


def test_reversed_edge():
    pred = Dag(d=4, edges=[(1, 0), (1, 2), (3, 2)])
    result = metrics_service.evaluate(pred, TRUTH)
    assert result.skeleton.f1 == 1.0
    assert result.direction.precision == pytest.approx(2 / 3)
    assert result.direction.shd == 1
    assert metrics_service.evaluate(pred, TRUTH, reversal_cost=2).direction.shd == 2


def test_missing_and_extra_edges():
    pred = Dag(d=4, edges=[(0, 1), (0, 3)])
    result = metrics_service.evaluate(pred, TRUTH)
    assert result.skeleton.precision == 0.5
    assert result.skeleton.recall == pytest.approx(1 / 3)
    assert result.skeleton.shd == 3
    assert result.direction.shd == 3


def test_undirected_prediction_costs_one():
    adjacency = np.zeros((4, 4), dtype=np.int8)
    adjacency[0, 1] = adjacency[1, 0] = PatternState.UNDIRECTED
    adjacency[1, 2] = adjacency[3, 2] = PatternState.DIRECTED
    result = metrics_service.evaluate(PatternGraph(d=4, adjacency=adjacency), TRUTH)
    assert result.skeleton.f1 == 1.0
    assert result.direction.recall == pytest.approx(2 / 3)
    assert result.direction.shd == 1


def test_empty_prediction():
    result = metrics_service.evaluate(Dag(d=4), TRUTH)
    assert result.skeleton.f1 == 0.0
    assert result.skeleton.precision == 0.0
    assert result.skeleton.shd == 3


def test_dimension_mismatch():
    with pytest.raises(exceptions.InputError):
        metrics_service.evaluate(Dag(d=3), TRUTH)


def test_summarize():
    summary = metrics_service.summarize([report(1.0, 0), report(0.5, 2)])
    assert summary["skeleton_f1"] == (pytest.approx(0.75), pytest.approx(0.25))
    assert summary["direction_shd"] == (pytest.approx(1.0), pytest.approx(1.0))


def test_paired_significance_of_identical_series():
    series = [report(0.5 + 0.1 * k, k) for k in range(5)]
    p_values = metrics_service.paired_significance(series, series)
    assert set(p_values) == set(metrics_service.SIGNIFICANCE_METRICS)
    assert all(p == 1.0 for p in p_values.values())


def test_paired_significance_detects_consistent_gain():
    better = [report(0.9, 0) for _ in range(8)]
    worse = [report(0.1 + 0.01 * k, 5 + k) for k in range(8)]
    assert metrics_service.paired_significance(better, worse)["skeleton_f1"] < 0.05


def test_render_table_and_json():
    rows = metrics_service.report_rows(metrics_service.evaluate(TRUTH, TRUTH))
    text = metrics_service.render_table(rows, title="Evaluation")
    assert "skeleton" in text and "direction" in text and "f1" in text
    assert metrics_service.render_json({"b": 1, "a": 2}).index(b'"a"') < metrics_service.render_json({"b": 1, "a": 2}).index(b'"b"')
