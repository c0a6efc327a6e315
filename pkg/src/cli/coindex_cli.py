import json
import sys
from enum import StrEnum
from fractions import Fraction
from functools import wraps
from pathlib import Path
from typing import Any, Callable, Optional

import click
from pydantic import BaseModel, Field

from pi_coindex.arith import HRDecomposition
from pi_coindex.bilinear import Construction, apply, catalog, certify, nonsingularity_probe
from pi_coindex.bounds import BoundQuery, coindex_bounds, nonfaces_verified, radon_table, replay
from pi_coindex.kneser import chromatic_number, kneser_graph, sarkaria_decomposition, verify_decomposition
from pi_coindex.library import resolve
from pi_coindex.models import SCHEMA_VERSION, BoundCertificate, CertificateError, CoindexError
from pi_coindex.utils.logging_utils import configure_logging, get_logger
from pi_coindex.utils.settings import get_settings

log = get_logger(__name__)


class Status(StrEnum):
    OK = "ok"
    INPUT_ERROR = "input-error"
    BUDGET_EXCEEDED = "budget-exceeded"
    INTERNAL_ERROR = "internal-error"


EXIT_CODES = {
    Status.OK: 0,
    Status.INPUT_ERROR: 1,
    Status.BUDGET_EXCEEDED: 2,
    Status.INTERNAL_ERROR: 2,
}


class CommandResult(BaseModel):
    schema_version: str = SCHEMA_VERSION
    command: str
    status: Status = Status.OK
    payload: dict[str, Any] = Field(default_factory=dict)
    message: Optional[str] = None

    @property
    def exit_code(self) -> int:
        return EXIT_CODES[self.status]


def _emit(result: CommandResult) -> int:
    click.echo(result.model_dump_json(indent=2))
    return result.exit_code


def _command(name: str) -> Callable[[Callable[..., CommandResult | int]], Callable[..., int]]:
    """Turn library errors into an input-error document and crashes into internal-error."""

    def decorator(func: Callable[..., CommandResult | int]) -> Callable[..., int]:
        @wraps(func)
        def wrapper(*args: Any, **kwargs: Any) -> int:
            try:
                result = func(*args, **kwargs)
            except click.ClickException as e:
                result = CommandResult(command=name, status=Status.INPUT_ERROR, message=e.format_message())
            except (CoindexError, ValueError) as e:
                log.debug(f"{name} rejected its input: {e}")
                result = CommandResult(command=name, status=Status.INPUT_ERROR, message=str(e))
            except Exception as e:
                log.exception(f"{name} failed")
                result = CommandResult(command=name, status=Status.INTERNAL_ERROR, message=repr(e))
            return result if isinstance(result, int) else _emit(result)

        return wrapper

    return decorator


class CoindexGroup(click.Group):
    """Maps click usage errors to exit code 1 and command return values to exit codes."""

    def main(self, args=None, prog_name=None, complete_var=None, standalone_mode=True, **extra):  # type: ignore[override]
        try:
            rv = super().main(args, prog_name, complete_var, standalone_mode=False, **extra)
            code = rv if isinstance(rv, int) else 0
        except click.ClickException as e:
            e.show()
            code = EXIT_CODES[Status.INPUT_ERROR]
        except click.Abort:
            click.echo("Aborted!", err=True)
            code = EXIT_CODES[Status.INPUT_ERROR]
        if standalone_mode:
            sys.exit(code)
        return code


@click.group(cls=CoindexGroup, help="Certified coindex bounds for spaces of embeddings")
@click.option("-v", "--verbose", count=True, help="Repeat for more log output (-vvv traces the search)")
def cli(verbose: int) -> None:
    configure_logging(verbose)


@cli.command("info", help="f-vector, Euler characteristic, minimal nonfaces and bipartition property")
@click.argument("complex_spec")
@_command("info")
def info(complex_spec: str) -> CommandResult:
    complex_ = resolve(complex_spec)
    f_vector = complex_.f_vector()
    payload = {
        "complex": complex_.label,
        "n": complex_.n,
        "facets": len(complex_.facets),
        "dim": complex_.dim,
        "f_vector": list(f_vector.counts),
        "euler_characteristic": f_vector.euler_characteristic,
        "minimal_nonfaces": len(complex_.minimal_nonfaces()),
        "bipartition_property": complex_.bipartition_property(),
        "embed_dim": complex_.embed_dim,
    }
    return CommandResult(command="info", payload=payload)


@cli.command("chi", help="Chromatic number of the Kneser graph of minimal nonfaces")
@click.argument("complex_spec")
@click.option("--decompose", is_flag=True, help="Also emit and verify the Sarkaria decomposition")
@click.option("--node-budget", type=click.IntRange(min=1), default=None, help="Search node limit")
@_command("chi")
def chi(complex_spec: str, decompose: bool, node_budget: Optional[int]) -> CommandResult:
    complex_ = resolve(complex_spec)
    graph = kneser_graph(complex_)
    cert = chromatic_number(graph, node_budget=node_budget)
    payload: dict[str, Any] = {
        "complex": complex_.label,
        "vertices": len(graph),
        "edges": graph.num_edges,
        **cert.to_dict(graph),
    }
    if decompose:
        decomposition = sarkaria_decomposition(complex_, cert)
        payload["decomposition"] = decomposition.to_dict()
        payload["decomposition_verified"] = verify_decomposition(complex_, decomposition)
    status = Status.OK if cert.exact else Status.BUDGET_EXCEEDED
    message = None if cert.exact else f"chromatic number only bounded to [{cert.lower}, {cert.upper}]"
    return CommandResult(command="chi", status=status, payload=payload, message=message)


@cli.command("bound", help="Certified coindex interval for one query")
@click.argument("complex_spec")
@click.option("--d", "d", type=click.IntRange(min=0), required=True, help="Ambient dimension")
@click.option("--ell", type=click.IntRange(min=0), required=True, help="Number of sign-flipped coordinates")
@click.option("--embed-dim", type=click.IntRange(min=1), default=None, help="Known embedding dimension")
@click.option("--c", "c", type=click.IntRange(min=0), default=None, help="Use this many colors instead of the chromatic number")
@click.option("--horizon", type=click.IntRange(min=0), default=None, help="Largest d' tried by monotonicity")
@click.option("--node-budget", type=click.IntRange(min=1), default=None, help="Search node limit")
@click.option("--check", is_flag=True, help="Replay the certificate before printing it")
@_command("bound")
def bound(
    complex_spec: str,
    d: int,
    ell: int,
    embed_dim: Optional[int],
    c: Optional[int],
    horizon: Optional[int],
    node_budget: Optional[int],
    check: bool,
) -> CommandResult:
    complex_ = resolve(complex_spec)
    if ell > d:
        raise click.BadParameter(f"--ell {ell} exceeds --d {d}", param_hint="--ell")
    if horizon is not None and horizon < d:
        raise click.BadParameter(f"--horizon {horizon} is below --d {d}", param_hint="--horizon")
    query = BoundQuery(complex_, d, ell, c_override=c, embed_dim=embed_dim)
    cert = coindex_bounds(query, horizon=horizon, node_budget=node_budget)
    payload = cert.to_dict()
    status, message = Status.OK, None
    if cert.budget_exceeded:
        status, message = Status.BUDGET_EXCEEDED, "chromatic search ran out of budget; no coloring bound"
    if check:
        problems = replay(cert, complex_)
        payload["replay"] = {"verified": not problems, "problems": problems}
        if problems:
            status, message = Status.INTERNAL_ERROR, "certificate failed replay"
    return CommandResult(command="bound", status=status, payload=payload, message=message)


@cli.command("radon-table", help="Coindex table for boundaries of simplices")
@click.option("--pmax", type=click.IntRange(min=1), default=8, show_default=True)
@click.option("--dmax", type=click.IntRange(min=1), default=25, show_default=True)
@click.option("--format", "fmt", type=click.Choice(["json", "ascii", "csv"]), default="json", show_default=True)
@click.option("--check", is_flag=True, help="Replay every cell certificate")
@_command("radon-table")
def radon_table_cmd(pmax: int, dmax: int, fmt: str, check: bool) -> CommandResult | int:
    table = radon_table(pmax, dmax)
    problems = []
    if check:
        for cell in table.cells:
            if cell.certificate is not None:
                problems += [f"({cell.p}, {cell.d}): {p}" for p in replay(cell.certificate)]
    if fmt != "json":
        click.echo(table.to_ascii() if fmt == "ascii" else table.to_csv(), nl=False)
        if problems:
            click.echo("\n".join(problems), err=True)
            return EXIT_CODES[Status.INTERNAL_ERROR]
        return 0
    payload = table.to_dict()
    if check:
        payload["replay"] = {"verified": not problems, "problems": problems}
    status = Status.INTERNAL_ERROR if problems else Status.OK
    return CommandResult(command="radon-table", status=status, payload=payload)


@cli.command("rho", help="Hurwitz-Radon number with its decomposition")
@click.argument("n", type=int)
@_command("rho")
def rho(n: int) -> CommandResult:
    return CommandResult(command="rho", payload=HRDecomposition.from_int(n).to_dict())


@cli.group("bilinear", help="Catalog of nonsingular bilinear maps")
def bilinear() -> None:
    pass


@bilinear.command("list", help="Catalog entries up to an output dimension")
@click.option("--max-dim", type=click.IntRange(min=1), default=16, show_default=True)
@_command("bilinear list")
def bilinear_list(max_dim: int) -> CommandResult:
    entries = [construction.to_dict() for construction in catalog(max_dim)]
    return CommandResult(command="bilinear list", payload={"max_dim": max_dim, "constructions": entries})


@bilinear.command("show", help="Serialized tensor of a construction")
@click.argument("name")
@_command("bilinear show")
def bilinear_show(name: str) -> CommandResult:
    construction = Construction.parse(name)
    return CommandResult(command="bilinear show", payload=construction.build().to_dict())


@bilinear.command("verify", help="Exact certificate and randomized probe for a construction")
@click.argument("name")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Probe trials")
@click.option("--seed", type=int, default=None, help="Probe seed")
@_command("bilinear verify")
def bilinear_verify(name: str, trials: Optional[int], seed: Optional[int]) -> CommandResult:
    settings = get_settings()
    trials = trials if trials is not None else settings.probe_trials
    seed = seed if seed is not None else settings.probe_seed
    construction = Construction.parse(name)
    tensor = construction.build()
    evidence = certify(construction)
    probe = nonsingularity_probe(tensor, trials, seed)
    payload = {
        "construction": construction.to_dict(),
        "certificate": evidence.to_dict(),
        "probe": {"trials": trials, "seed": seed, "passed": probe},
    }
    return CommandResult(command="bilinear verify", payload=payload)


@bilinear.command("apply", help="Evaluate B(x, y) exactly; vectors are comma-separated rationals")
@click.argument("name")
@click.argument("x")
@click.argument("y")
@_command("bilinear apply")
def bilinear_apply(name: str, x: str, y: str) -> CommandResult:
    tensor = Construction.parse(name).build()
    result = apply(tensor, _rational_vector(x, "x"), _rational_vector(y, "y"))
    payload = {"construction": tensor.provenance, "dims": list(tensor.dims), "value": [str(v) for v in result]}
    return CommandResult(command="bilinear apply", payload=payload)


def _rational_vector(text: str, name: str) -> list[Fraction]:
    try:
        return [Fraction(part.strip()) for part in text.split(",")]
    except (ValueError, ZeroDivisionError) as e:
        raise click.BadParameter(f"'{text}' is not a comma-separated list of rationals", param_hint=name) from e


@cli.command("check", help="Replay a saved bound certificate")
@click.argument("certificate", type=click.Path(exists=True, dir_okay=False, path_type=Path))
@click.option("--complex", "complex_spec", default=None, help="Complex to check the recorded nonfaces against")
@click.option("--trials", type=click.IntRange(min=1), default=None, help="Probe trials per construction")
@_command("check")
def check(certificate: Path, complex_spec: Optional[str], trials: Optional[int]) -> CommandResult:
    try:
        data = json.loads(certificate.read_text())
    except json.JSONDecodeError as e:
        raise CertificateError(f"{certificate}: line {e.lineno}: {e.msg}") from e
    if isinstance(data, dict) and "payload" in data:
        data = data["payload"]
    if not isinstance(data, dict):
        raise CertificateError(f"{certificate}: expected a certificate object")
    cert = BoundCertificate.from_dict(data)
    complex_ = resolve(complex_spec) if complex_spec else None
    problems = replay(cert, complex_, trials=trials)
    checked = nonfaces_verified(cert, complex_)
    status = Status.OK if not problems else Status.INPUT_ERROR
    if problems:
        message = f"{len(problems)} derivation problem(s)"
    elif not checked:
        message = "recorded nonfaces were not checked against a complex; pass --complex"
    else:
        message = None
    payload = {"verified": not problems, "nonfaces_checked": checked, "problems": problems}
    return CommandResult(command="check", status=status, payload=payload, message=message)


def main() -> None:
    cli()


if __name__ == "__main__":
    main()
