# Load Environment variables
import os
from typing import List, Optional

from dotenv import load_dotenv, dotenv_values

# Pydantic
from pydantic import BaseModel, Field, ValidationError, field_validator

# Import Exceptions
from app import exceptions

# Load the environment variables
load_dotenv()


def _env_list(name: str) -> List[str]:
    raw = os.getenv(name, "")
    return [item.strip() for item in raw.split(",") if item.strip()]


class FedCDHConfig(BaseModel):

    # Random features
    H: int = Field(default=int(os.getenv('FEDCDH_H', 5)), ge=1)
    SEED: int = Field(default=int(os.getenv('FEDCDH_SEED', 0)), ge=0)
    ONE_HOT_DISCRETE: bool = os.getenv('FEDCDH_ONE_HOT_DISCRETE', 'false').lower() in ('1', 'true', 'yes')
    FIXED_BANDWIDTH: float = Field(default=float(os.getenv('FEDCDH_FIXED_BANDWIDTH', 1.0)), gt=0)

    # Discovery
    ALPHA: float = float(os.getenv('FEDCDH_ALPHA', 0.05))
    GAMMA: float = Field(default=float(os.getenv('FEDCDH_GAMMA', 1e-3)), gt=0)
    MAX_COND: int = Field(default=int(os.getenv('FEDCDH_MAX_COND', 3)), ge=0)
    TIE_TOL: float = Field(default=float(os.getenv('FEDCDH_TIE_TOL', 1e-9)), ge=0)

    # Federation server
    BIND: str = os.getenv('FEDCDH_BIND', '127.0.0.1:7845')
    ROSTER: List[str] = Field(default_factory=lambda: _env_list('FEDCDH_ROSTER'))
    ROSTER_TIMEOUT: float = float(os.getenv('FEDCDH_ROSTER_TIMEOUT', 60))
    IO_TIMEOUT: float = float(os.getenv('FEDCDH_IO_TIMEOUT', 30))

    # Output
    LOG_LEVEL: str = os.getenv('FEDCDH_LOG_LEVEL', 'INFO')
    OUTPUT_ROOT: str = os.getenv('FEDCDH_OUTPUT_ROOT', 'runs')

    @field_validator('ALPHA')
    @classmethod
    def check_alpha(cls, value: float) -> float:
        if not 0 < value < 1:
            raise ValueError("ALPHA must lie strictly between 0 and 1")
        return value


def load_config_file(path: Optional[str]) -> dict:
    """
    Read a key=value config file. Keys may carry the FEDCDH_ prefix or not.
    """
    if not path:
        return {}
    if not os.path.exists(path):
        raise FileNotFoundError(f"Config file not found: {path}")

    values = {}
    for key, value in dotenv_values(path).items():
        if value is None:
            continue
        key = key.upper()
        if key.startswith('FEDCDH_'):
            key = key[len('FEDCDH_'):]
        values[key] = value
    return values


def resolve_config(config_file: Optional[str] = None, **flags) -> FedCDHConfig:
    """
    Merge flags > config file > environment defaults into a validated config.
    Flags whose value is None are treated as not given.
    """
    merged = fedcdh_config.model_dump()
    file_values = load_config_file(config_file)
    if 'ROSTER' in file_values and isinstance(file_values['ROSTER'], str):
        file_values['ROSTER'] = [item.strip() for item in file_values['ROSTER'].split(',') if item.strip()]
    merged.update(file_values)
    merged.update({key.upper(): value for key, value in flags.items() if value is not None})
    try:
        return FedCDHConfig(**merged)
    except ValidationError as e:
        raise exceptions.InvalidConfiguration(f"Invalid configuration: {str(e)}")


# Instance of config
fedcdh_config = FedCDHConfig()
