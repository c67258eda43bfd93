import logging
from typing import Annotated, Optional

import typer
from rich.logging import RichHandler

# Import Config
from app.config import fedcdh_config

# Commands Import
from app.commands import bench_router, discover_router, eval_router, gen_router


def include_router(app: typer.Typer, router: typer.Typer) -> None:
    """
    Mount a command module's commands at the top level.
    """
    app.registered_commands.extend(router.registered_commands)


def configure_logging(level: str) -> None:
    logging.basicConfig(level=level.upper(), format="%(message)s", datefmt="[%X]",
                        handlers=[RichHandler(rich_tracebacks=True, show_path=False)], force=True)


# Main Application
app = typer.Typer(name="fedcdh", help="Federated causal discovery from heterogeneous clients.", no_args_is_help=True)


@app.callback()
def main(log_level: Annotated[Optional[str], typer.Option(help="Logging level; FEDCDH_LOG_LEVEL by default")] = None):
    configure_logging(log_level or fedcdh_config.LOG_LEVEL)


include_router(app, gen_router)
include_router(app, discover_router)
include_router(app, eval_router)
include_router(app, bench_router)


if __name__ == "__main__":
    app()
