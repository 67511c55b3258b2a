import json
import sys
from typing import Any, Callable, Optional, TextIO, TypeVar

import click

from rootcontinuity.alignment import is_epsilon_aligned
from rootcontinuity.bounds import (
    delta_aligned,
    delta_all_roots,
    delta_zero_root,
    epsilon_inverse,
)
from rootcontinuity.config import ParsedConfig, RootsConfig
from rootcontinuity.logger import logger
from rootcontinuity.output import dump_json
from rootcontinuity.poly import Polynomial, as_scalar, deflate, scalar_to_json
from rootcontinuity.roots import cluster_roots, find_clusters, find_roots, separation

EXIT_CODE_NEGATIVE = 1
EXIT_CODE_INPUT_ERROR = 2

HELP_POLY = 'JSON polynomial file like {"coeffs": [[re, im], ...]}, `-` for stdin.'
HELP_TOL = "Backward-error tolerance of the root finder."
HELP_MAX_ITER = "Iteration limit of the root finder."
HELP_ROOT_SEED = "Seed of the root finder's initial placement."
HELP_CLUSTER_TOL = "Distance below which computed roots are merged into one cluster."

F = TypeVar("F", bound=Callable[..., Any])


class MainGroup(click.Group):
    """Report library errors as `Error: ...` with the input-error exit code."""

    def invoke(self, ctx: click.Context) -> Any:
        try:
            return super().invoke(ctx)
        except (click.exceptions.Exit, click.exceptions.Abort):
            # Both derive from RuntimeError.
            raise
        except (ValueError, RuntimeError, ArithmeticError) as e:
            logger.debug("Command failed", exc_info=True)
            click.echo("Error: %s" % e, err=True)
            ctx.exit(EXIT_CODE_INPUT_ERROR)


class ComplexParamType(click.ParamType):
    name = "complex"

    def convert(self, value, param, ctx):
        if isinstance(value, complex):
            return value
        try:
            parts = [float(part) for part in str(value).split(",")]
            if len(parts) == 1:
                return as_scalar(parts[0])
            if len(parts) == 2:
                return as_scalar(complex(parts[0], parts[1]))
        except ValueError:
            pass
        self.fail("%r is not a complex number like RE,IM" % (value,), param, ctx)


COMPLEX = ComplexParamType()


def root_finder_options(seed_flag: str = "--seed") -> Callable[[F], F]:
    def decorator(command: F) -> F:
        command = click.option("--cluster-tol", type=float, help=HELP_CLUSTER_TOL)(
            command
        )
        command = click.option(seed_flag, "root_seed", type=int, help=HELP_ROOT_SEED)(
            command
        )
        command = click.option("--max-iter", type=int, help=HELP_MAX_ITER)(command)
        command = click.option("--tol", type=float, help=HELP_TOL)(command)
        return command

    return decorator


def roots_config(
    obj: Optional[ParsedConfig],
    *,
    tol: Optional[float],
    max_iter: Optional[int],
    root_seed: Optional[int],
    cluster_tol: Optional[float]
) -> RootsConfig:
    config = obj if obj is not None else ParsedConfig()
    return config.roots.with_overrides(
        tol=tol, max_iter=max_iter, seed=root_seed, cluster_tol=cluster_tol
    )


def load_polynomial(stream: TextIO) -> Polynomial:
    name = getattr(stream, "name", "<stream>")
    try:
        data = json.load(stream)
    except json.JSONDecodeError as e:
        raise ValueError("%s is not valid JSON: %s" % (name, e))
    return Polynomial.from_json(data)


def echo_json(data: Any) -> None:
    click.echo(dump_json(data))


@click.command("roots")
@click.argument("poly", type=click.File("r"))
@root_finder_options()
@click.pass_obj
def roots_command(
    obj: Optional[ParsedConfig],
    *,
    poly: TextIO,
    tol: Optional[float],
    max_iter: Optional[int],
    root_seed: Optional[int],
    cluster_tol: Optional[float]
) -> None:
    """Print the roots of POLY and their clusters."""
    config = roots_config(
        obj, tol=tol, max_iter=max_iter, root_seed=root_seed, cluster_tol=cluster_tol
    )
    rs = find_roots(load_polynomial(poly), config.finder_options())
    echo_json(
        {
            "roots": [scalar_to_json(z) for z in rs],
            "clusters": cluster_roots(rs, config.cluster_tol).to_json(),
        }
    )


@click.command("deflate")
@click.argument("poly", type=click.File("r"))
@click.option("--zeta", required=True, type=COMPLEX, help="Root to divide out, RE,IM")
def deflate_command(*, poly: TextIO, zeta: complex) -> None:
    """Divide POLY by (z - ZETA) and print the quotient."""
    echo_json(deflate(load_polynomial(poly), zeta).to_json())


@click.command("separation")
@click.argument("poly", type=click.File("r"))
@root_finder_options()
@click.pass_obj
def separation_command(
    obj: Optional[ParsedConfig],
    *,
    poly: TextIO,
    tol: Optional[float],
    max_iter: Optional[int],
    root_seed: Optional[int],
    cluster_tol: Optional[float]
) -> None:
    """Print the minimum distance between the distinct roots of POLY
    and the largest epsilon keeping the root balls disjoint.

    Both are null when POLY has a single distinct root.
    """
    config = roots_config(
        obj, tol=tol, max_iter=max_iter, root_seed=root_seed, cluster_tol=cluster_tol
    )
    rc = find_clusters(
        load_polynomial(poly), config.finder_options(), config.cluster_tol
    )
    sep: Optional[float] = None
    if len(rc.clusters) >= 2:
        sep = separation(rc)
    echo_json(
        {
            "clusters": rc.to_json(),
            "separation": sep,
            "epsilon_max": sep / 2 if sep is not None else None,
        }
    )


@click.command("bound")
@click.argument("poly", type=click.File("r"))
@click.option("--epsilon", required=True, type=float, help="Root tolerance")
@click.option(
    "--method",
    required=True,
    type=click.Choice(["zero-root", "all-roots", "aligned"]),
    help="Which theorem to certify",
)
@root_finder_options()
@click.pass_obj
def bound_command(
    obj: Optional[ParsedConfig],
    *,
    poly: TextIO,
    epsilon: float,
    method: str,
    tol: Optional[float],
    max_iter: Optional[int],
    root_seed: Optional[int],
    cluster_tol: Optional[float]
) -> None:
    """Certify a coefficient tolerance delta for the root tolerance EPSILON."""
    config = roots_config(
        obj, tol=tol, max_iter=max_iter, root_seed=root_seed, cluster_tol=cluster_tol
    )
    f = load_polynomial(poly)
    if method == "zero-root":
        certificate = delta_zero_root(f, epsilon)
    elif method == "all-roots":
        certificate = delta_all_roots(
            f,
            epsilon,
            options=config.finder_options(),
            cluster_tol=config.cluster_tol,
        )
    elif method == "aligned":
        certificate = delta_aligned(
            f,
            epsilon,
            options=config.finder_options(),
            cluster_tol=config.cluster_tol,
        )
    else:
        raise AssertionError(
            "unreachable if the `method`'s allowed `values` are in sync"
        )
    echo_json(certificate.to_json())


@click.command("inverse")
@click.argument("poly", type=click.File("r"))
@click.option("--delta", required=True, type=float, help="Coefficient tolerance")
@root_finder_options()
@click.pass_obj
def inverse_command(
    obj: Optional[ParsedConfig],
    *,
    poly: TextIO,
    delta: float,
    tol: Optional[float],
    max_iter: Optional[int],
    root_seed: Optional[int],
    cluster_tol: Optional[float]
) -> None:
    """Certify a root tolerance epsilon keeping monic coefficients within DELTA."""
    config = roots_config(
        obj, tol=tol, max_iter=max_iter, root_seed=root_seed, cluster_tol=cluster_tol
    )
    certificate = epsilon_inverse(
        load_polynomial(poly),
        delta,
        options=config.finder_options(),
        cluster_tol=config.cluster_tol,
    )
    echo_json(certificate.to_json())


@click.command("align")
@click.argument("f", type=click.File("r"))
@click.argument("g", type=click.File("r"))
@click.option("--epsilon", required=True, type=float, help="Root ball radius")
@click.option(
    "--slack",
    default=0.0,
    show_default=True,
    type=float,
    help="Extra radius allowed for root-finder error",
)
@root_finder_options()
@click.pass_obj
def align_command(
    obj: Optional[ParsedConfig],
    *,
    f: TextIO,
    g: TextIO,
    epsilon: float,
    slack: float,
    tol: Optional[float],
    max_iter: Optional[int],
    root_seed: Optional[int],
    cluster_tol: Optional[float]
) -> None:
    """Check that G is EPSILON-aligned to F.

    Exits with 1 when it is not.
    """
    config = roots_config(
        obj, tol=tol, max_iter=max_iter, root_seed=root_seed, cluster_tol=cluster_tol
    )
    options = config.finder_options()
    f_clusters = find_clusters(load_polynomial(f), options, config.cluster_tol)
    g_roots = find_roots(load_polynomial(g), options)
    report = is_epsilon_aligned(f_clusters, g_roots, epsilon, slack)
    echo_json(report.to_json())
    if not report.aligned:
        sys.exit(EXIT_CODE_NEGATIVE)
