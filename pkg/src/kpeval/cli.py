"""Command-line interface for kpeval.

Provides the evaluate, compare, gen and icc commands.
"""

from __future__ import annotations

import sys
from pathlib import Path
from typing import Any, NoReturn

import typer
from pydantic import ValidationError

from kpeval import __version__
from kpeval.config import ConfigError, load_config, method_specs_from_args
from kpeval.evaluation import emit_outputs, load_ground_truth, run_evaluation
from kpeval.exceptions import KpevalError
from kpeval.harness.generator import ErrorModel, JitterKind, ScoreModel, generate, write_fixture
from kpeval.ingest.formats import FormatKind
from kpeval.logging_config import get_logger, setup_logging
from kpeval.metrics.stats import IccForm
from kpeval.reliability import (
    coder_nmh_table,
    emit_coder_nmh_csv,
    emit_icc_csv,
    icc_table,
    min_icc,
    render_icc_csv,
)
from kpeval.report.compare import CompareMetric, compare, load_bundle

LOG_FILE = "kpeval.log"

app = typer.Typer(
    name="kpeval",
    help="kpeval - evaluate 2D pose estimation against coder annotations",
    add_completion=False,
)


def version_callback(value: bool) -> None:
    """Print version and exit."""
    if value:
        typer.echo(f"kpeval version {__version__}")
        typer.echo(f"Python {sys.version}")
        raise typer.Exit()


@app.callback()
def main_callback(
    version: bool = typer.Option(
        False,
        "--version",
        "-v",
        callback=version_callback,
        is_eager=True,
        help="Show version and exit",
    ),
) -> None:
    """kpeval CLI."""


def _fail(prefix: str, error: Exception) -> NoReturn:
    typer.echo(f"{prefix}: {error}", err=True)
    raise typer.Exit(code=1)


def _choice(kind: type[Any], value: str, flag: str) -> Any:
    try:
        return kind(value.strip().lower())
    except ValueError:
        allowed = ", ".join(m.value for m in kind)
        msg = f"Invalid {flag} {value!r}; expected one of: {allowed}"
        raise ConfigError(msg) from None


@app.command()
def evaluate(
    config_path: str | None = typer.Option(
        None, "--config", "-c", help="Path to run configuration file (YAML or JSON)"
    ),
    gt: list[Path] | None = typer.Option(
        None, "--gt", help="Ground-truth file or directory (repeatable)"
    ),
    gt_format: str | None = typer.Option(
        None, "--gt-format", help="canonical_json, coco_result_json, per_frame_json_dir, wide_csv"
    ),
    det: list[str] | None = typer.Option(
        None, "--det", help="Detections as name=path:format:schema (repeatable)"
    ),
    select: str | None = typer.Option(None, "--select", help="first, score or oracle"),
    scope: str | None = typer.Option(None, "--scope", help="infant or all"),
    norm: str | None = typer.Option(None, "--norm", help="median or per-image"),
    sigma: Path | None = typer.Option(None, "--sigma", help="Sigma override file"),
    cpe_c: float | None = typer.Option(None, "--cpe-c", help="CPE coefficient c"),
    out: Path | None = typer.Option(None, "--out", "-o", help="Output directory"),
    emit: str | None = typer.Option(None, "--emit", help="tables,circles,scatter,per-sequence"),
    jobs: int | None = typer.Option(None, "--jobs", "-j", help="Parallel workers"),
    dataset_id: str | None = typer.Option(None, "--dataset-id", help="Dataset label"),
    input_mode: str | None = typer.Option(None, "--input-mode", help="Input type label"),
    mixture: str | None = typer.Option(
        None, "--mixture", help="Comma-separated methods to average into a mixture"
    ),
    log_level: str | None = typer.Option(
        None, "--log-level", "-l", help="Log level override (DEBUG, INFO, WARNING, ERROR)"
    ),
) -> None:
    """Evaluate methods against ground truth and write report files."""
    cli_args: dict[str, Any] = {
        "ground_truth": gt or None,
        "gt_format": gt_format,
        "select": select,
        "scope": scope,
        "norm": norm,
        "sigma": sigma,
        "cpe_c": cpe_c,
        "out": out,
        "emit": emit,
        "jobs": jobs,
        "dataset_id": dataset_id,
        "input_mode": input_mode,
        "log_level": log_level,
    }
    if mixture:
        cli_args["mixture"] = [m.strip() for m in mixture.split(",") if m.strip()]

    try:
        if det:
            cli_args["methods"] = method_specs_from_args(det)
        config = load_config(path=config_path, cli_args=cli_args)
        setup_logging(config.log_level.value, log_file=config.out / LOG_FILE)
        logger = get_logger(__name__)
        result = run_evaluation(config)
        written = emit_outputs(result, config)
        logger.info("Wrote %d report files to %s", len(written), config.out)
    except ConfigError as e:
        _fail("Configuration error", e)
    except KpevalError as e:
        _fail("Error", e)
    for path in written:
        typer.echo(str(path))


@app.command("compare")
def compare_command(
    reports: list[Path] = typer.Argument(..., help="report.json files to merge"),
    metric: str = typer.Option("cpe", "--metric", "-m", help="Metric to compare"),
    out: Path | None = typer.Option(None, "--out", "-o", help="CSV file; stdout if omitted"),
) -> None:
    """Merge report files into a method-by-dataset table."""
    try:
        if len(reports) < 2:
            msg = f"compare needs at least 2 report files, got {len(reports)}"
            raise ConfigError(msg)
        chosen = _choice(CompareMetric, metric, "--metric")
        table = compare([load_bundle(p) for p in reports], chosen)
        text = table.render_csv()
        if out is None:
            typer.echo(text, nl=False)
            return
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8", newline="\n")
    except ConfigError as e:
        _fail("Configuration error", e)
    except KpevalError as e:
        _fail("Error", e)
    except OSError as e:
        _fail("Error", e)
    typer.echo(str(out))


def _drop_frames(value: str | None) -> tuple[int, ...]:
    if not value:
        return ()
    try:
        return tuple(int(part) for part in value.split(",") if part.strip())
    except ValueError:
        msg = f"--drop-frames must be comma-separated integers, got {value!r}"
        raise ConfigError(msg) from None


@app.command()
def gen(
    seed: int = typer.Option(..., "--seed", help="PRNG seed"),
    frames: int = typer.Option(10, "--frames", help="Number of frames"),
    out: Path = typer.Option(Path("fixture"), "--out", "-o", help="Output directory"),
    perfect: bool = typer.Option(False, "--perfect", help="Zero-error detections"),
    jitter: float = typer.Option(0.0, "--jitter", help="Keypoint offset, fraction of torso"),
    jitter_kind: str = typer.Option("fixed", "--jitter-kind", help="fixed or random"),
    drop_keypoint: float = typer.Option(0.0, "--drop-keypoint", help="Keypoint drop probability"),
    drop_detection: float = typer.Option(
        0.0, "--drop-detection", help="Detection drop probability"
    ),
    drop_frames: str | None = typer.Option(
        None, "--drop-frames", help="Comma-separated frame indices without detection"
    ),
    duplicate: float = typer.Option(0.0, "--duplicate", help="Duplicate detection probability"),
    score_model: str = typer.Option(
        "perfect", "--score-model", help="perfect, anticorrelated, constant or noisy"
    ),
) -> None:
    """Write a synthetic fixture with an expected.json sidecar."""
    try:
        if frames < 1:
            msg = f"--frames must be >= 1, got {frames}"
            raise ConfigError(msg)
        if perfect:
            model = ErrorModel.perfect()
        else:
            try:
                model = ErrorModel(
                    jitter=jitter,
                    jitter_kind=_choice(JitterKind, jitter_kind, "--jitter-kind"),
                    drop_keypoint_prob=drop_keypoint,
                    drop_detection_prob=drop_detection,
                    drop_detection_frames=_drop_frames(drop_frames),
                    duplicate_detection_prob=duplicate,
                    score_model=_choice(ScoreModel, score_model, "--score-model"),
                )
            except ValidationError as e:
                msg = f"Invalid error model: {e}"
                raise ConfigError(msg) from e
        written = write_fixture(generate(seed, frames, model), out)
    except ConfigError as e:
        _fail("Configuration error", e)
    except KpevalError as e:
        _fail("Error", e)
    for path in written:
        typer.echo(str(path))


@app.command("icc")
def icc_command(
    coder_a: list[Path] = typer.Option(..., "--coder-a", help="First coder's annotations"),
    coder_b: list[Path] = typer.Option(..., "--coder-b", help="Second coder's annotations"),
    gt_format: str = typer.Option("canonical_json", "--gt-format", help="Annotation format"),
    form: str = typer.Option("icc3", "--form", help="icc1, icc2 or icc3"),
    out: Path | None = typer.Option(None, "--out", "-o", help="CSV file; stdout if omitted"),
    nmh_out: Path | None = typer.Option(
        None, "--nmh-out", help="CSV of the second coder's Neck-MidHip errors per keypoint"
    ),
) -> None:
    """Inter-coder reliability per keypoint and axis.

    Also prints the second coder's Neck-MidHip error against the first.
    """
    try:
        fmt = FormatKind.parse(gt_format)
    except ValueError as e:
        _fail("Configuration error", e)
    try:
        chosen = _choice(IccForm, form, "--form")
        first = load_ground_truth(coder_a, fmt)
        second = load_ground_truth(coder_b, fmt)
        rows = icc_table(first, second, chosen)
        nmh_rows = coder_nmh_table(first, second)
        if out is not None:
            emit_icc_csv(rows, out)
        else:
            typer.echo(render_icc_csv(rows), nl=False)
        if nmh_out is not None:
            emit_coder_nmh_csv(nmh_rows, nmh_out)
    except ConfigError as e:
        _fail("Configuration error", e)
    except KpevalError as e:
        _fail("Error", e)
    lowest = min_icc(rows)
    typer.echo(f"min_icc={'' if lowest is None else f'{lowest:.3f}'}")
    overall = nmh_rows[0].error
    mean = "" if overall.mean is None else f"{overall.mean:.1f}"
    std = "" if overall.std is None else f"{overall.std:.1f}"
    typer.echo(f"coder_nmh={mean} std={std}")


@app.command()
def version() -> None:
    """Print version information."""
    typer.echo(f"kpeval version {__version__}")
    typer.echo(f"Python {sys.version}")


def main() -> None:
    """Main entry point for the CLI."""
    app()


if __name__ == "__main__":
    main()
