# Typing Imports
from typing import Dict, List, Tuple

from enum import Enum

# Pydantic
from pydantic import BaseModel, ConfigDict, Field

# Import models
from app.models.graph import AugmentedGraph, Dag, PatternGraph


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  Independence Tests

class CITestResult(BaseModel):
    x: Tuple[int, ...]
    y: Tuple[int, ...]
    z: Tuple[int, ...] = ()
    statistic: float = Field(..., ge=0)
    mean: float
    variance: float
    k_hat: float
    theta_hat: float
    p_value: float = Field(..., ge=0, le=1)
    independent: bool
    degenerate: bool = Field(default=False, description="True when the null moments vanished and independence was returned")

    def trace_line(self) -> str:
        decision = "indep" if self.independent else "dep"
        return (f"CI X={{{_join(self.x)}}} Y={{{_join(self.y)}}} Z={{{_join(self.z)}}} "
                f"stat={self.statistic:.6e} p={self.p_value:.6e} dec={decision}")


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  Independent Change Scores

class Direction(str, Enum):
    FORWARD = "X->Y"
    BACKWARD = "Y->X"
    TIE = "tie"


class IcpScore(BaseModel):
    x: int
    y: int
    delta_xy: float = Field(..., ge=0)
    delta_yx: float = Field(..., ge=0)
    decision: Direction

    def trace_line(self) -> str:
        return f"ICP X={self.x} Y={self.y} dxy={self.delta_xy:.6e} dyx={self.delta_yx:.6e} dec={self.decision.value}"


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  Evaluation

class MetricSet(BaseModel):
    f1: float
    precision: float
    recall: float
    shd: int = Field(..., ge=0)


class EvalReport(BaseModel):
    skeleton: MetricSet
    direction: MetricSet

    def flat(self) -> dict:
        row = {}
        for part in ("skeleton", "direction"):
            for key, value in getattr(self, part).model_dump().items():
                row[f"{part}_{key}"] = value
        return row


def _join(indices: Tuple[int, ...]) -> str:
    return ",".join(str(i) for i in indices)


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  Discovery Output

class DiscoveryResult(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True)

    augmented: AugmentedGraph
    pattern: PatternGraph
    dag: Dag
    trace: List[str] = Field(default_factory=list)
    test_counts: Dict[str, int] = Field(default_factory=dict)
    icp_scores: List[IcpScore] = Field(default_factory=list)
