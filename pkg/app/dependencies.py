from typing import Optional

from pydantic import ValidationError
from rich.console import Console

# Import Config
from app.config import FedCDHConfig, resolve_config

# Import services
from app.services import AppService

# Import Models
from app.models import GenConfig

# Import Exceptions
from app import exceptions


def get_settings(config_file: Optional[str] = None, **flags) -> FedCDHConfig:
    """
    Settings for one command: flags over the config file over the environment.
    """
    return resolve_config(config_file, **flags)


def get_gen_config(**values) -> GenConfig:
    try:
        return GenConfig(**{key: value for key, value in values.items() if value is not None})
    except ValidationError as e:
        raise exceptions.InvalidConfiguration(f"Invalid generator configuration: {str(e)}")


# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# --------------------------------------------------------------------------------------------------------------------------------------------------- #
# Application Service


def get_app_service(settings: FedCDHConfig, console: Optional[Console] = None) -> AppService:
    """
    Get the application facade bound to resolved settings.
    """
    return AppService(settings=settings, console=console)
