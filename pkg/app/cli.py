"""Command-line interface: generate, bp, de, exit, scan and validate."""

import json
from pathlib import Path
from typing import Any, Dict, Optional

import click

from app.core.config import Config
from app.core.dependencies import Dependencies, initialize_dependencies
from app.core.error_handlers import cli_error_boundary
from app.core.exceptions import FileProcessingError, ValidationError
from app.models.requests import RunConfig
from app.validators.run_validator import RunValidator

MODEL_OPTIONS = [
    click.option("--config", "config_file", type=click.Path(dir_okay=False, path_type=Path),
                 help="JSON file with run parameters; flags override it."),
    click.option("--model", type=click.Choice(["symmetric", "single"]), help="Block model."),
    click.option("--n", type=int, help="Number of nodes."),
    click.option("--a", type=float, help="Within-community rate (edge probability a/n)."),
    click.option("--b", type=float, help="Across-community rate (edge probability b/n)."),
    click.option("--mu", type=float, help="Signal-to-noise ratio (a - b)/sqrt(b)."),
    click.option("--k-frac", type=float, help="Community fraction K/n."),
    click.option("--lambda", "lam", type=float, help="Single-community signal-to-noise ratio."),
    click.option("--p-over-q", type=float, help="Ratio p/q."),
    click.option("--p", type=float, help="In-community edge probability."),
    click.option("--q", type=float, help="Background edge probability."),
    click.option("--alpha", type=float, help="Side-information flip probability."),
    click.option("--epsilon", type=float, help="Probability that side information is revealed."),
    click.option("--seed", type=int, help="Master random seed."),
    click.option("--out", type=click.Path(file_okay=False, path_type=Path),
                 help="Output root; a fresh run directory is created inside."),
    click.option("--tol", type=float, help="Density-evolution fixed-point tolerance."),
    click.option("--threads", type=int, envvar="EXITSBM_THREADS", help="Worker cap."),
]


def model_options(func):
    for option in reversed(MODEL_OPTIONS):
        func = option(func)
    return func


def _load_config_file(path: Optional[Path]) -> Dict[str, Any]:
    if path is None:
        return {}
    try:
        data = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as e:
        raise FileProcessingError(f"Cannot read config file: {path}", details={"reason": str(e)}) from e
    except json.JSONDecodeError as e:
        raise ValidationError(f"Config file is not valid JSON: {path}", details={"reason": str(e)}) from e
    if not isinstance(data, dict):
        raise ValidationError("Config file must hold a JSON object", details={"path": str(path)})
    return data


def build_run_config(params: Dict[str, Any]) -> RunConfig:
    """Overlay command-line flags on the JSON config file; flags win."""
    params = dict(params)
    base = _load_config_file(params.pop("config_file", None))

    vary = params.pop("vary", ())
    scan_range = params.pop("scan_range", None)
    overrides = {key: value for key, value in params.items() if value is not None and value is not False}
    if vary:
        overrides["vary"] = RunValidator.parse_vary(list(vary))
    if scan_range is not None:
        overrides["scan_range"] = RunValidator.parse_range(scan_range)
    if "lam" in overrides:
        base.pop("lambda", None)
    if isinstance(base.get("scan_range"), str):
        base["scan_range"] = RunValidator.parse_range(base["scan_range"])
    return RunConfig.model_validate({**base, **overrides})


def _emit(manifest, report=None) -> None:
    payload = {"run_id": manifest.run_id, "run_dir": manifest.run_dir,
               "manifest": str(Path(manifest.run_dir) / "manifest.json")}
    if report is not None:
        payload["report"] = report.model_dump(mode="json")
    click.echo(json.dumps(payload, indent=2, default=str))


@click.group()
@click.pass_context
def cli(ctx: click.Context):
    """Belief propagation, density evolution and EXIT-chart analysis for block models with side information."""
    with cli_error_boundary(ctx):
        ctx.obj = initialize_dependencies(Config.from_env())


def _deps(ctx: click.Context) -> Dependencies:
    return ctx.find_object(Dependencies)


@cli.command()
@model_options
@click.pass_context
def generate(ctx: click.Context, **params):
    """Sample a graph, ground-truth labels and side information."""
    deps = _deps(ctx)
    with cli_error_boundary(ctx, deps.logger):
        manifest = deps.experiment_service.generate(build_run_config(params))
        _emit(manifest)


@cli.command()
@model_options
@click.option("--iters", type=int, help="BP iterations t.")
@click.option("--input-dir", type=click.Path(exists=True, file_okay=False, path_type=Path),
              help="Run directory from generate to load instead of sampling.")
@click.pass_context
def bp(ctx: click.Context, **params):
    """Run belief propagation and compare with the density-evolution prediction."""
    deps = _deps(ctx)
    with cli_error_boundary(ctx, deps.logger):
        manifest, report = deps.experiment_service.bp(build_run_config(params))
        _emit(manifest, report)


@cli.command()
@model_options
@click.pass_context
def de(ctx: click.Context, **params):
    """Iterate density evolution and write its trace."""
    deps = _deps(ctx)
    with cli_error_boundary(ctx, deps.logger):
        manifest, report = deps.experiment_service.de(build_run_config(params))
        _emit(manifest, report)


@cli.command(name="exit")
@model_options
@click.option("--grid", type=int, help="Points per EXIT curve.")
@click.option("--vary", multiple=True, help="Curve family, e.g. alpha=0.1,0.4 (repeatable).")
@click.option("--fit-j", is_flag=True, help="Fit the three-parameter J to every table.")
@click.pass_context
def exit_chart(ctx: click.Context, **params):
    """Compute EXIT curves, their crossings and staircases."""
    deps = _deps(ctx)
    with cli_error_boundary(ctx, deps.logger):
        manifest, report = deps.experiment_service.exit_curves(build_run_config(params))
        _emit(manifest, report)


@cli.command()
@model_options
@click.option("--scan-param", type=str, help="Parameter to bisect (mu, alpha, epsilon or lambda).")
@click.option("--range", "scan_range", type=str, help="Scan interval LO:HI.")
@click.option("--bisect-tol", type=float, help="Bracket width at which the scan stops.")
@click.pass_context
def scan(ctx: click.Context, **params):
    """Locate the escape transition of the operating point."""
    deps = _deps(ctx)
    with cli_error_boundary(ctx, deps.logger):
        manifest, report = deps.experiment_service.scan(build_run_config(params))
        _emit(manifest, report)


@cli.command()
@click.option("--config", "config_file", type=click.Path(dir_okay=False, path_type=Path),
              help="JSON file with run parameters; flags override it.")
@click.option("--seed", type=int, help="Master random seed.")
@click.option("--out", type=click.Path(file_okay=False, path_type=Path), help="Output root.")
@click.option("--threads", type=int, envvar="EXITSBM_THREADS", help="Worker cap.")
@click.option("--quick", is_flag=True, help="Run the short subset.")
@click.option("--inject-fault", type=str, hidden=True)
@click.pass_context
def validate(ctx: click.Context, **params):
    """Run the validation suite; exit code 0 only if every check passes."""
    deps = _deps(ctx)
    with cli_error_boundary(ctx, deps.logger):
        manifest, report = deps.experiment_service.validate(build_run_config(params))
        _emit(manifest, report)
