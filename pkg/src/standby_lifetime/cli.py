#!/usr/bin/env python3
import logging

import typer

from .commands.asymptotics import sweep
from .commands.simulation import simulate
from .commands.transforms import invert, lst
from .commands.validate import validate

app = typer.Typer(
    name="standby-lifetime",
    help="Lifetime of an n-element cold-standby system with one repair device",
    no_args_is_help=True,
)


@app.callback()
def main(verbose: bool = typer.Option(False, "--verbose", "-v", help="Log progress at INFO level")):
    logging.basicConfig(
        level=logging.INFO if verbose else logging.WARNING,
        format="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        force=True,
    )


app.command()(simulate)
app.command()(lst)
app.command()(invert)
app.command()(sweep)
app.command()(validate)


if __name__ == "__main__":
    app()
