# Typing Imports
from typing import Any, Dict, List, Optional

from enum import Enum

# Pydantic
from pydantic import BaseModel, Field

# Models
from app.models import FeatureSpec


PROTOCOL_VERSION = 1


# Protocol Schemas
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


class MessageKind(str, Enum):
    HELLO = "Hello"
    SCALAR_MOMENTS = "ScalarMoments"
    FEATURE_SPEC = "FeatureSpecBroadcast"
    LOCAL_MOMENTS = "LocalMomentsUpload"
    ACK = "Ack"
    ERROR = "Error"


class ProtocolMessage(BaseModel):
    """
    Envelope of every frame. kind stays a plain string so that unknown kinds still parse and can be answered.
    """
    version: int = PROTOCOL_VERSION
    kind: str
    client_id: str = ""
    payload: Dict[str, Any] = Field(default_factory=dict)


class Mode(str, Enum):
    TWO_ROUND = "two_round"
    SINGLE_ROUND = "single_round"


class HelloPayload(BaseModel):
    columns: List[str]
    n_k: int = Field(..., ge=1)


class AckPayload(BaseModel):
    mode: Optional[Mode] = None
    message: str = ""


class ScalarMomentsPayload(BaseModel):
    # d rows of (count, sum, sum of squares)
    moments: List[List[float]]


class FeatureSpecPayload(BaseModel):
    spec: FeatureSpec
    domain_index: int = Field(..., ge=1)


class LocalMomentsPayload(BaseModel):
    header: Dict[str, int] = Field(..., description="Tensor header: version, d_prime, h, n_k")
    body: str = Field(..., description="Base64 of s1 then s2 as row-major float64 little-endian")


class ErrorPayload(BaseModel):
    code: str
    reason: str


# Report Schemas
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #


class RunReport(BaseModel):
    """
    Deterministic part of a result bundle. Timings live in the manifest.
    """
    config: Dict[str, Any]
    n: int
    K: int
    d: int
    h: int
    mode: Mode = Mode.TWO_ROUND
    columns: List[str] = Field(default_factory=list)
    test_counts: Dict[str, int] = Field(default_factory=dict)
    changing_modules: List[int] = Field(default_factory=list)
    conflicts: List[List[int]] = Field(default_factory=list)
    upload_bytes: Dict[str, int] = Field(default_factory=dict)
    forced_extension: bool = False


class RunManifest(BaseModel):
    command: str
    config: Dict[str, Any] = Field(default_factory=dict)
    seed: int = 0
    inputs: List[str] = Field(default_factory=list)
    # sha256 per input file; directories are expanded to their files
    input_digests: Dict[str, str] = Field(default_factory=dict)
    # Command flags not captured by config (mode, workers, output directory)
    invocation: Dict[str, Any] = Field(default_factory=dict)
    outputs: List[str] = Field(default_factory=list)
    version: str = "0.1.0"
    timings: Dict[str, float] = Field(default_factory=dict)
