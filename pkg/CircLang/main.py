import json
import os
from typing import Tuple

import click
import sentry_sdk

from CircLang import settings
from controllers.main_controller_circlang import MainControllerCircLang
from services.services_circlang import ServicesCircLang
from views.main_view_cli import MainViewCLI


def init_sentry() -> None:
    """Enable Sentry when secrets.json provides a SENTRY_DSN; without it the SDK stays a no-op."""
    secrets = {}
    if os.path.exists(settings.secrets_file_path):
        with open(settings.secrets_file_path) as secret_file:
            secrets = json.load(secret_file)

    sentry_sdk.init(
        dsn=secrets.get("SENTRY_DSN"),
        traces_sample_rate=1.0,
        profiles_sample_rate=1.0,
    )


def build_controller() -> MainControllerCircLang:
    return MainControllerCircLang(ServicesCircLang(), MainViewCLI())


def parse_start(ctx, param, value: str) -> Tuple[float, float, float]:
    try:
        parts = tuple(float(part) for part in value.split(","))
    except ValueError:
        raise click.BadParameter("expected three numbers as w0,y0,z0") from None
    if len(parts) != 3:
        raise click.BadParameter("expected three numbers as w0,y0,z0")
    return parts


def seed_from(flag_value) -> int:
    try:
        return settings.resolve_seed(flag_value)
    except ValueError as e:
        raise click.UsageError(str(e)) from e


def common_options(function):
    function = click.option("--out", "out_dir", type=click.Path(file_okay=False), default=settings.DEFAULT_OUTPUT_DIR,
                            show_default=True, help="Directory for the run manifest and exported files.")(function)
    function = click.option("--json", "as_json", is_flag=True, help="Emit machine-readable JSON.")(function)
    function = click.option("--seed", type=click.IntRange(0, 2 ** 64 - 1), default=None,
                            help=f"Seed; falls back to ${settings.SEED_ENV_VAR}, then {settings.DEFAULT_SEED}.")(function)
    return function


def target_options(function):
    function = click.option("--start", callback=parse_start, default="0,0,0", show_default=True,
                            help="Starting point w0,y0,z0.")(function)
    function = click.option("--z", "z", type=float, default=0.0, show_default=True)(function)
    function = click.option("--y", "y", type=float, default=0.0, show_default=True)(function)
    function = click.option("--w", "w", type=float, default=1.0, show_default=True)(function)
    return function


@click.group()
@click.version_option(settings.VERSION, prog_name="circlang")
def cli():
    """Small-time heat kernel of the Brownian motion on the circle lifted with its area processes."""


@cli.command()
@click.option("--tol", type=float, default=settings.DEFAULT_TOL, show_default=True)
@common_options
@click.pass_context
def constants(ctx, tol, seed, as_json, out_dir):
    """Print σ, σ', θ₁, C² and f(π², 0) with error estimates and bounds."""
    code = build_controller().run("constants", {"tol": tol, "json": as_json}, seed_from(seed), out_dir)
    ctx.exit(code)


@cli.command()
@click.option("--eps", type=float, required=True, help="The time ε > 0.")
@target_options
@common_options
@click.pass_context
def kernel(ctx, eps, w, y, z, start, seed, as_json, out_dir):
    """Regime and small-time equivalent of log p_ε at one target."""
    parameters = {"eps": eps, "w": w, "y": y, "z": z, "start": list(start), "json": as_json}
    ctx.exit(build_controller().run("kernel", parameters, seed_from(seed), out_dir))


@cli.command()
@click.option("--suite", type=click.Choice(["fast", "mc", "full"]), default="fast", show_default=True)
@click.option("--check", "checks", multiple=True, help="Run only the named check; repeatable.")
@click.option("--budget", type=float, default=None, help="Time budget in seconds.")
@click.option("--paths", type=click.IntRange(min=2), default=settings.DEFAULT_N_PATHS, show_default=True)
@click.option("--steps", type=click.IntRange(min=2), default=settings.DEFAULT_N_STEPS, show_default=True)
@click.option("--workers", type=click.IntRange(min=1), default=settings.DEFAULT_WORKERS, show_default=True)
@click.option("--tol", type=float, default=settings.DEFAULT_TOL, show_default=True)
@common_options
@click.pass_context
def validate(ctx, suite, checks, budget, paths, steps, workers, tol, seed, as_json, out_dir):
    """Run an acceptance suite and print the pass/fail table."""
    parameters = {"suite": suite, "checks": list(checks), "budget": budget, "paths": paths, "steps": steps,
                  "workers": workers, "tol": tol, "json": as_json}
    ctx.exit(build_controller().run("validate", parameters, seed_from(seed), out_dir))


@cli.command()
@click.option("--run", "run_name", type=click.Choice(list(MainControllerCircLang.EXPORT_RUNS)), default="kernel-sweep",
              show_default=True)
@click.option("--format", "file_format", type=click.Choice(["csv", "json"]), default="csv", show_default=True)
@click.option("--points", type=click.IntRange(min=2), default=settings.EXPORT_POINTS, show_default=True)
@target_options
@common_options
@click.pass_context
def export(ctx, run_name, file_format, points, w, y, z, start, seed, as_json, out_dir):
    """Write a sweep table as CSV or JSON next to its run manifest."""
    parameters = {"run": run_name, "format": file_format, "points": points, "w": w, "y": y, "z": z,
                  "start": list(start), "json": as_json}
    ctx.exit(build_controller().run("export", parameters, seed_from(seed), out_dir))


@cli.command()
@click.argument("manifest", type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Output directory; defaults to the directory of the manifest.")
@click.pass_context
def replay(ctx, manifest, out_dir):
    """Re-run the command recorded in a run manifest."""
    if out_dir is None:
        out_dir = os.path.dirname(os.path.abspath(manifest))
    ctx.exit(build_controller().replay(manifest, out_dir))


def main():
    init_sentry()
    cli()


if __name__ == "__main__":
    main()
