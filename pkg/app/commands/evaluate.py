from typing import Annotated, List, Optional

import typer

# Import Dependencies
from app.dependencies import get_app_service, get_settings
from app.services.app_service import guarded


# Initialize a router
router = typer.Typer()


@router.command("eval")
def evaluate(
    pred: Annotated[List[str], typer.Option(help="Predicted graph file (repeat for a batch)")],
    truth: Annotated[List[str], typer.Option(help="True DAG file, one per --pred")],
    out: Annotated[Optional[str], typer.Option(help="Directory for eval.json and eval.txt")] = None,
    reversal_cost: Annotated[int, typer.Option(help="SHD cost of a reversed edge (1 or 2)")] = 1,
    config: Annotated[Optional[str], typer.Option(help="key=value config file")] = None,
):
    """
    Compare predicted graphs against true DAGs: skeleton and direction precision, recall, F1 and SHD.
    """
    def body():
        return get_app_service(get_settings(config)).evaluate(pred, truth, out, reversal_cost)

    guarded(body)
