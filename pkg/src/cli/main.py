import json
import logging
from collections.abc import Callable, Sequence
from pathlib import Path
from typing import Annotated

import torch
import typer
from pydantic import ValidationError

from src.cli.pipeline import STAGES, Stage, run_pipeline
from src.config.run_config import CodeRanges, RunConfig, Target
from src.config.settings import get_settings
from src.errors import StageFailedError

EXIT_CONFIG_ERROR = 2
EXIT_STAGE_FAILED = 3

app = typer.Typer(
    name="comorbinet",
    help="Comorbidity networks and conjoint graph learning for hypertension outcomes",
    no_args_is_help=True,
)

ConfigOption = Annotated[
    Path | None, typer.Option("--config", "-c", help="RunConfig JSON file", dir_okay=False)
]
TargetOption = Annotated[
    str | None, typer.Option("--target", "-t", help="Target disease: dm or chd")
]
SeedOption = Annotated[int | None, typer.Option("--seed", help="Base seed")]
RunsOption = Annotated[int | None, typer.Option("--runs", help="Training runs")]
OutOption = Annotated[Path | None, typer.Option("--out", "-o", help="Run directory")]
CodeRangesOption = Annotated[
    Path | None,
    typer.Option(
        "--code-ranges",
        help='JSON map of ICD-10 ranges, e.g. {"hypertension": ["I10", "I15"]}',
        dir_okay=False,
    ),
]


def _setup() -> None:
    settings = get_settings()
    logging.basicConfig(
        level=getattr(logging, settings.log_level),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )
    if settings.threads is not None:
        torch.set_num_threads(settings.threads)


def _fail(message: str, code: int) -> typer.Exit:
    typer.echo(message, err=True)
    return typer.Exit(code)


def load_run_config(
    config_path: Path | None,
    target: str | None = None,
    seed: int | None = None,
    runs: int | None = None,
    out: Path | None = None,
    code_ranges_path: Path | None = None,
) -> RunConfig:
    """Read the config file (or the target profile) and apply flag overrides."""
    if config_path is not None:
        config = RunConfig.from_file(config_path)
    else:
        config = RunConfig.for_target(target or Target.DM)
    code_ranges = CodeRanges.from_file(code_ranges_path) if code_ranges_path else None
    return config.with_overrides(
        target=Target.parse(target) if target else None,
        seed=seed,
        runs=runs,
        out=out,
        code_ranges=code_ranges.model_dump() if code_ranges else None,
    )


def _resolve_out(config: RunConfig) -> Path:
    if config.out is not None:
        return config.out
    return get_settings().run_path(f"{config.target.value.lower()}-{config.seed}")


def _execute(
    stages: Sequence[Stage],
    config_path: Path | None,
    target: str | None,
    seed: int | None,
    runs: int | None,
    out: Path | None,
    code_ranges_path: Path | None = None,
    synthetic_only: bool = False,
) -> None:
    _setup()
    try:
        config = load_run_config(config_path, target, seed, runs, out, code_ranges_path)
    except (ValidationError, ValueError, OSError) as e:
        raise _fail(f"Invalid configuration: {e}", EXIT_CONFIG_ERROR) from e
    if synthetic_only and config.input is not None:
        message = "Invalid configuration: synth needs a synthetic cohort, not 'input'"
        raise _fail(message, EXIT_CONFIG_ERROR)

    run_out = _resolve_out(config)
    try:
        run_dir = run_pipeline(config, run_out, stages, log_events=get_settings().log_events)
    except StageFailedError as e:
        raise _fail(f"Stage '{e.stage}' failed: {e.__cause__}", EXIT_STAGE_FAILED) from e
    typer.echo(f"Run directory: {run_dir.root}")


def _stage_command(
    stages: Sequence[Stage], doc: str, synthetic_only: bool = False
) -> Callable[..., None]:
    def command(
        config_path: ConfigOption = None,
        target: TargetOption = None,
        seed: SeedOption = None,
        runs: RunsOption = None,
        out: OutOption = None,
        code_ranges_path: CodeRangesOption = None,
    ) -> None:
        _execute(stages, config_path, target, seed, runs, out, code_ranges_path, synthetic_only)

    command.__doc__ = doc
    return command


@app.command()
def config() -> None:
    """Show current configuration."""
    settings = get_settings()
    typer.echo("Current Configuration:")
    typer.echo(f"  Threads: {settings.threads or 'torch default'}")
    typer.echo(f"  Log Level: {settings.log_level}")
    typer.echo(f"  Data Path: {settings.data_path}")
    typer.echo(f"  Event Log: {'Enabled' if settings.log_events else 'Disabled'}")


@app.command("init-config")
def init_config(
    path: Annotated[Path, typer.Argument(help="Where to write the RunConfig JSON")],
    target: Annotated[str, typer.Option("--target", "-t", help="dm or chd")] = "dm",
) -> None:
    """Write the default RunConfig profile for a target."""
    try:
        profile = RunConfig.for_target(target)
    except ValueError as e:
        raise _fail(f"Invalid configuration: {e}", EXIT_CONFIG_ERROR) from e
    path.parent.mkdir(parents=True, exist_ok=True)
    data = profile.model_dump(mode="json", exclude_none=True)
    path.write_text(json.dumps(data, indent=2) + "\n")
    typer.echo(f"Wrote {profile.target.value} profile to {path}")


app.command("pipeline")(
    _stage_command(STAGES, "Run every stage from ingest through analysis.")
)
app.command("ingest")(_stage_command(STAGES[:1], "Load or synthesize the cohort and summarize it."))
app.command("synth")(
    _stage_command(
        STAGES[:1], "Generate the synthetic cohort into the run directory.", synthetic_only=True
    )
)
app.command("build-net")(
    _stage_command(STAGES[:3], "Build patient, disease and differential networks.")
)
app.command("features")(_stage_command(STAGES[:4], "Compute the standardized feature matrix."))
app.command("train")(_stage_command(STAGES[:6], "Train and evaluate CGRL and its ablation."))
app.command("analyze")(
    _stage_command(("ingest", "analyze"), "Prevalence, pair-ratio, cluster and pathway analyses.")
)


if __name__ == "__main__":
    app()
