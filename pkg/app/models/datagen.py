# Typing Imports
from typing import List

import numpy as np

# Pydantic
from pydantic import BaseModel, ConfigDict, Field

# Import models
from app.models.graph import Dag
from app.models.settings import GenConfig


class Benchmark(BaseModel):
    """
    One generated instance: ground truth plus the per-client sample matrices (n_k x d each).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: GenConfig
    dag: Dag
    changing: List[int] = Field(default_factory=list)
    datasets: List[np.ndarray]
    columns: List[str]

    @property
    def pooled(self) -> np.ndarray:
        return np.vstack(self.datasets)
