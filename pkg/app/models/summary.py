# Typing Imports
from functools import cached_property
from typing import Optional

import numpy as np

# Pydantic
from pydantic import BaseModel, ConfigDict, Field


class LocalMoments(BaseModel):
    """
    Raw (uncentered) moments of one client's random features.
    s1 is d' x h, s2 is d' x d' x h x h, scalar_moments is d x 3 holding (count, sum, sum of squares).
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    client_id: str
    domain_index: int = Field(..., ge=1)
    n_k: int = Field(..., ge=1)
    s1: np.ndarray
    s2: np.ndarray
    scalar_moments: Optional[np.ndarray] = None

    @property
    def n_variables(self) -> int:
        return int(self.s1.shape[0])

    @property
    def h(self) -> int:
        return int(self.s1.shape[1])


class GlobalSummary(BaseModel):
    """
    Server-side sums of all clients' moments. The only stand-in for raw data downstream.
    """
    model_config = ConfigDict(arbitrary_types_allowed=True)

    n: int = Field(..., ge=1)
    m1: np.ndarray
    m2: np.ndarray
    n_clients: int = Field(default=1, ge=1)

    @property
    def n_variables(self) -> int:
        return int(self.m1.shape[0])

    @property
    def d(self) -> int:
        """Observed variable count; the surrogate takes the last index."""
        return self.n_variables - 1

    @property
    def h(self) -> int:
        return int(self.m1.shape[1])

    @cached_property
    def centered(self) -> np.ndarray:
        """Globally centered covariance blocks, d' x d' x h x h, divided by n."""
        mean_outer = np.einsum('ah,bg->abhg', self.m1, self.m1) / self.n
        return (self.m2 - mean_outer) / self.n
