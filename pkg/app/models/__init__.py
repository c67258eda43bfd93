from app.models.graph import AugmentedGraph, Dag, Mark, PatternGraph, PatternState
from app.models.features import (ContinuousFeatureMap, ContinuousVariable, DiscreteFeatureMap, DiscreteVariable,
                                 FeatureMap, FeatureSpec)
from app.models.summary import GlobalSummary, LocalMoments
from app.models.results import CITestResult, Direction, DiscoveryResult, EvalReport, IcpScore, MetricSet
from app.models.settings import DiscoveryConfig, Family, GenConfig
from app.models.datagen import Benchmark


__all__ = [

    "AugmentedGraph",
    "Dag",
    "Mark",
    "PatternGraph",
    "PatternState",
    "ContinuousFeatureMap",
    "ContinuousVariable",
    "DiscreteFeatureMap",
    "DiscreteVariable",
    "FeatureMap",
    "FeatureSpec",
    "GlobalSummary",
    "LocalMoments",
    "CITestResult",
    "Direction",
    "DiscoveryResult",
    "EvalReport",
    "IcpScore",
    "MetricSet",
    "DiscoveryConfig",
    "Family",
    "GenConfig",
    "Benchmark"
]
