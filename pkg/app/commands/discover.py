from typing import Annotated, List, Optional

import typer

# Import Dependencies
from app.dependencies import get_app_service, get_settings
from app.services.app_service import guarded

# Import Exceptions
from app import exceptions


# Initialize a router
router = typer.Typer()


@router.command("discover")
def discover(
    data: Annotated[Optional[str], typer.Option(help="Directory of client CSVs (simulated federation), or the client's own CSV with --client")] = None,
    server: Annotated[bool, typer.Option("--server", help="Run the aggregation server and discovery over TCP")] = False,
    client: Annotated[bool, typer.Option("--client", help="Join a running server with the CSV given by --data")] = False,
    address: Annotated[Optional[str], typer.Option(help="host:port to bind (--server) or to connect to (--client)")] = None,
    client_id: Annotated[Optional[str], typer.Option(help="Client id; the CSV file stem by default")] = None,
    roster: Annotated[Optional[List[str]], typer.Option(help="Expected client id (repeat per client)")] = None,
    h: Annotated[Optional[int], typer.Option("--h", help="Random features per variable")] = None,
    alpha: Annotated[Optional[float], typer.Option(help="Significance level")] = None,
    gamma: Annotated[Optional[float], typer.Option(help="Ridge parameter")] = None,
    max_cond: Annotated[Optional[int], typer.Option(help="Largest conditioning set size")] = None,
    seed: Annotated[Optional[int], typer.Option(help="Feature seed")] = None,
    single_round: Annotated[bool, typer.Option("--single-round", help="Skip the bandwidth round")] = False,
    workers: Annotated[int, typer.Option(help="Threads for the tests of one level")] = 1,
    out: Annotated[Optional[str], typer.Option(help="Result bundle directory")] = None,
    config: Annotated[Optional[str], typer.Option(help="key=value config file")] = None,
):
    """
    Federated causal discovery: simulated from a data directory, or networked with --server / --client.
    """
    def body() -> str:
        if server and client:
            raise exceptions.InvalidConfiguration("Choose one of --server and --client.")
        if workers < 1:
            raise exceptions.InvalidConfiguration(f"--workers must be at least 1, got {workers}.")
        bind = address if server else None
        settings = get_settings(config, h=h, alpha=alpha, gamma=gamma, max_cond=max_cond, seed=seed, bind=bind,
                                roster=roster or None)
        service = get_app_service(settings)

        if client:
            if not data or not address:
                raise exceptions.InvalidConfiguration("--client needs --data FILE and --address host:port.")
            return service.join(address, data, client_id)
        if server:
            return service.serve(out, single_round=single_round, workers=workers)
        if not data:
            raise exceptions.InvalidConfiguration("Give --data DIR, or use --server / --client.")
        return service.discover_local(data, out, single_round=single_round, workers=workers)

    typer.echo(guarded(body))
