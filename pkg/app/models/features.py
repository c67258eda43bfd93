# Typing Imports
from typing import List, Literal, Union

from typing_extensions import Annotated

import numpy as np

# Pydantic
from pydantic import BaseModel, ConfigDict, Field


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  FeatureSpec

class ContinuousVariable(BaseModel):
    kind: Literal["continuous"] = "continuous"
    sigma: float = Field(..., gt=0, description="Gaussian kernel bandwidth")


class DiscreteVariable(BaseModel):
    kind: Literal["discrete"] = "discrete"
    k: int = Field(..., ge=1, description="Number of categories")


VariableSpec = Annotated[Union[ContinuousVariable, DiscreteVariable], Field(discriminator="kind")]


class FeatureSpec(BaseModel):
    """
    Broadcast to every client so that all of them embed identically.
    """
    h: int = Field(default=5, ge=1)
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    variables: List[VariableSpec]
    one_hot_discrete: bool = Field(default=False, description="Exact one-hot delta features, only honored when h >= K")

    @property
    def n_variables(self) -> int:
        return len(self.variables)


# ------------------------------------------------------------------------------------------------------------------------- #
# ------------------------------------------------------------------------------------------------------------------------- #
#  Feature Maps

class ContinuousFeatureMap(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    w: np.ndarray
    b: np.ndarray

    @property
    def h(self) -> int:
        return int(self.w.shape[0])


class DiscreteFeatureMap(BaseModel):
    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    # K x h table of +/-1 entries
    signs: np.ndarray
    one_hot: bool = False

    @property
    def h(self) -> int:
        return int(self.signs.shape[1])

    @property
    def k(self) -> int:
        return int(self.signs.shape[0])


FeatureMap = Union[ContinuousFeatureMap, DiscreteFeatureMap]
