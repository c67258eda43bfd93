from typing import Annotated, List, Optional

import typer

# Import Dependencies
from app.dependencies import get_app_service, get_gen_config, get_settings
from app.services.app_service import guarded


# Initialize a router
router = typer.Typer()


@router.command("bench")
def bench(
    suite: Annotated[str, typer.Option(help="linear, functional, dense, hyper-h, power or shuffle")],
    vary: Annotated[Optional[str], typer.Option(help="Swept quantity for structure suites: d, K or n_k")] = None,
    values: Annotated[Optional[List[int]], typer.Option(help="Swept values (repeat per value)")] = None,
    replications: Annotated[int, typer.Option(help="Seeds per row")] = 10,
    workers: Annotated[int, typer.Option(help="Concurrent replications")] = 1,
    d: Annotated[int, typer.Option(help="Variables in the default slice")] = 6,
    K: Annotated[int, typer.Option("--K", help="Clients in the default slice")] = 10,
    n_k: Annotated[int, typer.Option("--n-k", help="Samples per client in the default slice")] = 100,
    seed: Annotated[Optional[int], typer.Option(help="First replication seed")] = None,
    plot: Annotated[bool, typer.Option("--plot", help="Write a PNG per table")] = False,
    out: Annotated[Optional[str], typer.Option(help="Output directory")] = None,
    config: Annotated[Optional[str], typer.Option(help="key=value config file")] = None,
):
    """
    Benchmark sweeps; writes one CSV table per suite.
    """
    def body() -> str:
        settings = get_settings(config, seed=seed)
        base = get_gen_config(d=d, K=K, n_k=n_k, seed=settings.SEED)
        return get_app_service(settings).bench(suite, out, replications, workers, vary, values or None, plot, base)

    typer.echo(guarded(body))
