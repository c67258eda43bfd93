from typing import Annotated, Optional

import typer

# Import Models
from app.models import Family

# Import Dependencies
from app.dependencies import get_app_service, get_gen_config, get_settings
from app.services.app_service import guarded


# Initialize a router
router = typer.Typer()


@router.command("gen")
def gen(
    d: Annotated[int, typer.Option(help="Number of observed variables")] = 6,
    K: Annotated[int, typer.Option("--K", help="Number of clients")] = 10,
    n_k: Annotated[int, typer.Option("--n-k", help="Samples per client")] = 100,
    edge_factor: Annotated[int, typer.Option(help="Expected edges per variable (1 or 2)")] = 1,
    family: Annotated[Family, typer.Option(help="Data-generating family")] = Family.LINEAR_GAUSSIAN,
    n_changing: Annotated[int, typer.Option(help="Variables whose mechanism changes across clients")] = 2,
    seed: Annotated[Optional[int], typer.Option(help="Random seed")] = None,
    signed_square: Annotated[bool, typer.Option(help="Use x*|x| for the square nonlinearity")] = True,
    out: Annotated[Optional[str], typer.Option(help="Output directory; a timestamped run directory by default")] = None,
    config: Annotated[Optional[str], typer.Option(help="key=value config file")] = None,
):
    """
    Generate a synthetic multi-client benchmark with its ground truth.
    """
    def body() -> str:
        settings = get_settings(config, seed=seed)
        cfg = get_gen_config(d=d, K=K, n_k=n_k, edge_factor=edge_factor, family=family, n_changing=n_changing,
                             seed=settings.SEED, signed_square=signed_square)
        return get_app_service(settings).generate(cfg, out)

    typer.echo(guarded(body))
