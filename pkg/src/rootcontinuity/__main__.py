import logging
from pathlib import Path
from typing import Optional

import click

import rootcontinuity
from rootcontinuity.cli import (
    MainGroup,
    align_command,
    bound_command,
    deflate_command,
    inverse_command,
    roots_command,
    separation_command,
)
from rootcontinuity.config import parse_config
from rootcontinuity.fuzz import estimate, fuzz


@click.group(cls=MainGroup)
@click.version_option(version=rootcontinuity.__version__)
@click.option("-v", "--verbose", is_flag=True, help="Increase logging verbosity")
@click.option(
    "-c",
    "--config",
    help="Config path with [roots] and [fuzz] sections",
    type=click.Path(exists=True, dir_okay=False),
)
@click.pass_context
def main(ctx: click.Context, *, verbose: bool, config: Optional[str]) -> None:
    """rootcontinuity computes how far the coefficients of a polynomial
    may move while its roots stay within a given distance, and checks
    these certificates on random deformations.

    Polynomials are JSON files like {"coeffs": [[re, im], ...]} with
    the constant term first; `-` reads one from stdin.
    """
    logging.basicConfig(level=logging.DEBUG if verbose else logging.INFO)
    ctx.obj = parse_config(Path(config) if config is not None else None)


main.add_command(roots_command)
main.add_command(deflate_command)
main.add_command(separation_command)
main.add_command(bound_command)
main.add_command(inverse_command)
main.add_command(align_command)
main.add_command(fuzz)
main.add_command(estimate)

if __name__ == "__main__":
    main(prog_name="rootcontinuity")
