# Typing Imports
from typing import Literal

from enum import Enum

# Pydantic
from pydantic import BaseModel, Field, model_validator


class DiscoveryConfig(BaseModel):
    alpha: float = Field(default=0.05, gt=0, lt=1, description="Significance level of every independence test")
    gamma: float = Field(default=1e-3, gt=0, description="Ridge parameter")
    max_cond_size: int = Field(default=3, ge=0)
    tie_tol: float = Field(default=1e-9, ge=0, description="Relative tolerance under which two change scores tie")
    seed: int = Field(default=0, ge=0)
    workers: int = Field(default=1, ge=1, description="Threads used for the tests of one cardinality level")


class Family(str, Enum):
    LINEAR_GAUSSIAN = "linear_gaussian"
    GENERAL_FUNCTIONAL = "general_functional"
    POSTNONLINEAR_POWER = "postnonlinear_power"


class GenConfig(BaseModel):
    d: int = Field(default=6, ge=1)
    K: int = Field(default=10, ge=1)
    n_k: int = Field(default=100, ge=1)
    edge_factor: Literal[1, 2] = 1
    family: Family = Family.LINEAR_GAUSSIAN
    n_changing: int = Field(default=2, ge=0)
    seed: int = Field(default=0, ge=0)
    signed_square: bool = Field(default=True, description="Apply square as x*|x|; plain x**2 when false")

    @model_validator(mode='after')
    def check_changing(self) -> 'GenConfig':
        if self.n_changing > self.d:
            raise ValueError(f"n_changing ({self.n_changing}) cannot exceed d ({self.d})")
        return self
