"""End-to-end evaluation of a run configuration.

For every method and ground-truth sequence: parse, align, match, select
and measure each frame, then reduce everything into report bundles.
Sequences are evaluated concurrently up to ``RunConfig.jobs``; results
are collected in submission order and aggregation sorts them, so the
reports do not depend on the number of workers.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING

from kpeval import __version__
from kpeval.config import EmitKind
from kpeval.core.poses import EvaluationScope, NormalizationMode
from kpeval.core.schema import load_schema
from kpeval.core.skeleton import NUM_KEYPOINTS, SigmaTable
from kpeval.exceptions import (
    DegenerateScaleError,
    NoCommonKeypointsError,
    NoNormalizerError,
    SequenceMismatchError,
)
from kpeval.ingest.align import align
from kpeval.ingest.detections import parse_detections
from kpeval.ingest.formats import DetectionFile, FormatKind
from kpeval.ingest.ground_truth import parse_ground_truth
from kpeval.logging_config import get_logger
from kpeval.metrics.missing import absent_keypoints
from kpeval.metrics.nmh import NormalizerSource, nmh_errors, nmh_length_image, nmh_length_sequence
from kpeval.metrics.oks import oks
from kpeval.report.aggregate import aggregate
from kpeval.report.circles import build_circle_spec, emit_circle_plot
from kpeval.report.scatter import build_scatter_spec, emit_scatter_plot
from kpeval.report.models import Grouping, ReportBundle
from kpeval.report.results import Agreement, FrameResult, TargetResult
from kpeval.report.tables import TableFormat, emit_tables
from kpeval.selection.matching import assign_to_ground_truths
from kpeval.selection.mixture import MIXTURE_METHOD, mixture_average
from kpeval.selection.strategies import SelectionStrategy, select_detection

if TYPE_CHECKING:
    from collections.abc import Mapping, Sequence

    from kpeval.config import MethodSpec, RunConfig
    from kpeval.core.poses import CanonicalPose, FrameRecord, GroundTruthPose, SequenceDataset
    from kpeval.core.schema import SchemaMap
    from kpeval.core.skeleton import KeypointId

logger = get_logger(__name__)

REPORT_FILE = "report"
PER_SEQUENCE_FILE = "report_per_sequence"


@dataclass(frozen=True)
class EvaluationSettings:
    """Run-wide settings every worker reads."""

    sigma: SigmaTable
    strategy: SelectionStrategy = SelectionStrategy.HIGHEST_SCORE
    scope: EvaluationScope = EvaluationScope.INFANT
    dataset_id: str = "dataset"
    input_mode: str = "images"

    @classmethod
    def from_config(cls, config: RunConfig) -> EvaluationSettings:
        """Settings of a validated run configuration."""
        sigma = SigmaTable.from_file(config.sigma) if config.sigma else SigmaTable.default()
        return cls(
            sigma=sigma,
            strategy=config.select,
            scope=config.scope,
            dataset_id=config.dataset_id,
            input_mode=config.input_mode,
        )


@dataclass(frozen=True)
class MethodRun:
    """A method's parsed detections, keyed by sequence id."""

    spec: MethodSpec
    schema: SchemaMap
    detections: Mapping[str, DetectionFile]

    @property
    def name(self) -> str:
        """Reported method name."""
        return self.spec.name


@dataclass(frozen=True)
class SequenceRun:
    """One method evaluated on one sequence."""

    method: str
    aligned: SequenceDataset
    frames: tuple[FrameResult, ...]


@dataclass(frozen=True)
class EvaluationResult:
    """Bundles of a run plus the per-frame results they were reduced from."""

    bundle: ReportBundle
    per_sequence: ReportBundle
    frames: tuple[FrameResult, ...] = field(default=(), repr=False)


@dataclass
class _Tally:
    unnormalized: int = 0


def load_ground_truth(
    paths: Sequence[Path],
    fmt: FormatKind,
    norm: NormalizationMode | None = None,
) -> list[SequenceDataset]:
    """Parse every ground-truth file and apply the normalization override.

    Raises:
        SequenceMismatchError: If two files hold the same sequence id
    """
    datasets: list[SequenceDataset] = []
    seen: set[str] = set()
    for path in paths:
        dataset = parse_ground_truth(path, fmt)
        if dataset.sequence_id in seen:
            raise SequenceMismatchError(
                f"Sequence {dataset.sequence_id!r} is given more than once", str(path)
            )
        seen.add(dataset.sequence_id)
        if norm is not None:
            dataset = dataset.with_normalization(norm)
        datasets.append(dataset)
    return datasets


def load_method(spec: MethodSpec, sequences: Sequence[SequenceDataset]) -> MethodRun:
    """Parse a method's detection files and key them by sequence.

    A single file in a format without an embedded sequence id is taken to
    belong to the single ground-truth sequence.

    Raises:
        SequenceMismatchError: If a file names an unknown sequence or two
            files name the same one
    """
    schema = load_schema(spec.keypoint_schema, method_name=spec.name)
    known = {s.sequence_id for s in sequences}
    implied = None
    single = len(sequences) == 1 and len(spec.paths) == 1
    if single and spec.format is not FormatKind.CANONICAL_JSON:
        implied = sequences[0].sequence_id

    files: dict[str, DetectionFile] = {}
    for path in spec.paths:
        det = parse_detections(
            path, spec.format, schema, method_name=spec.name, sequence_id=implied
        )
        if det.sequence_id not in known:
            raise SequenceMismatchError(
                f"Detections of {spec.name} are for unknown sequence {det.sequence_id!r}",
                str(path),
            )
        if det.sequence_id in files:
            raise SequenceMismatchError(
                f"Two detection files of {spec.name} cover sequence {det.sequence_id!r}",
                str(path),
            )
        files[det.sequence_id] = det
    return MethodRun(spec=spec, schema=schema, detections=files)


def sequence_normalizer(dataset: SequenceDataset, scope: EvaluationScope) -> float | None:
    """Median Neck-MidHip length, or None for per-image normalization or when underivable."""
    if dataset.normalization is NormalizationMode.PER_IMAGE:
        return None
    try:
        return nmh_length_sequence(dataset, scope)
    except NoNormalizerError:
        logger.warning(
            "No Neck-MidHip length in %s; normalized errors are absent",
            dataset.sequence_id,
            extra={"code": "no_normalizer", "sequence": dataset.sequence_id},
        )
        return None


def _nmh(
    det: CanonicalPose,
    gt: GroundTruthPose,
    mode: NormalizationMode,
    normalizer: float | None,
    tally: _Tally,
) -> Mapping[KeypointId, float]:
    if mode is NormalizationMode.PER_IMAGE:
        length, source = nmh_length_image(gt), NormalizerSource.THIS_IMAGE
    else:
        length, source = normalizer, NormalizerSource.SEQUENCE_MEDIAN
    if length is None or length <= 0:
        tally.unnormalized += 1
        return {}
    return nmh_errors(det, gt, length, source).errors


def _rank(pose: CanonicalPose | None) -> int:
    return -1 if pose is None else pose.rank


def selection_agreement(frame: FrameRecord, gt: GroundTruthPose) -> Agreement | None:
    """Compare the picks of the three strategies; None when the frame has no detection."""
    if not frame.detections:
        return None
    first = _rank(select_detection(frame, SelectionStrategy.FIRST_RANK))
    score = _rank(select_detection(frame, SelectionStrategy.HIGHEST_SCORE))
    oracle = _rank(select_detection(frame, SelectionStrategy.ORACLE_BEST, gt))
    return Agreement(
        first_score=first == score,
        first_oracle=first == oracle,
        score_oracle=score == oracle,
    )


def _untargeted_pick(frame: FrameRecord, strategy: SelectionStrategy) -> CanonicalPose | None:
    if strategy is SelectionStrategy.ORACLE_BEST:
        strategy = SelectionStrategy.HIGHEST_SCORE
    return select_detection(frame, strategy)


def evaluate_frame(
    frame: FrameRecord,
    dataset: SequenceDataset,
    method: MethodRun,
    settings: EvaluationSettings,
    normalizer: float | None,
    tally: _Tally | None = None,
) -> FrameResult:
    """Match, select and measure one aligned frame."""
    tally = tally or _Tally()
    assignment = assign_to_ground_truths(
        frame, settings.sigma, settings.scope, dataset.sequence_id
    )
    targets = frame.targets(settings.scope)
    results: list[TargetResult] = []
    picks: list[CanonicalPose | None] = []
    for gt in targets:
        selected = select_detection(frame, settings.strategy, gt)
        picks.append(selected)
        if selected is None:
            results.append(TargetResult())
            continue
        try:
            breakdown = oks(selected, gt, settings.sigma)
        except (NoCommonKeypointsError, DegenerateScaleError):
            breakdown = None
        results.append(
            TargetResult(
                oks=None if breakdown is None else breakdown.oks,
                ks={} if breakdown is None else breakdown.ks,
                nmh=_nmh(selected, gt, dataset.normalization, normalizer, tally),
                score=selected.score,
                agreement=selection_agreement(frame, gt),
            )
        )

    chosen = picks[0] if targets else _untargeted_pick(frame, settings.strategy)
    return FrameResult(
        method=method.name,
        dataset_id=settings.dataset_id,
        sequence_id=dataset.sequence_id,
        frame_id=frame.frame_id,
        detection_count=len(frame.detections),
        expected_persons=dataset.expected_persons,
        method_keypoint_count=method.schema.native_count,
        selected_absent=None if chosen is None else absent_keypoints(chosen),
        targets=tuple(results),
        assignment=assignment,
        input_mode=method.spec.input_mode or settings.input_mode,
        fps=method.spec.fps,
    )


def _warn_unnormalized(tally: _Tally, method: str, sequence_id: str) -> None:
    if tally.unnormalized:
        logger.warning(
            "%d targets of %s in %s have no Neck-MidHip normalizer",
            tally.unnormalized,
            method,
            sequence_id,
            extra={
                "code": "no_normalizer",
                "method": method,
                "sequence": sequence_id,
                "count": tally.unnormalized,
            },
        )


def evaluate_sequence(
    dataset: SequenceDataset,
    method: MethodRun,
    settings: EvaluationSettings,
) -> SequenceRun:
    """Evaluate every frame of one sequence for one method.

    A sequence the method has no file for counts as missing detections
    on every frame.
    """
    det = method.detections.get(dataset.sequence_id)
    if det is None:
        logger.warning(
            "%s has no detections for %s",
            method.name,
            dataset.sequence_id,
            extra={"code": "missing_detection_file", "method": method.name,
                   "sequence": dataset.sequence_id},
        )  # fmt: skip
        det = DetectionFile(
            method_name=method.name,
            sequence_id=dataset.sequence_id,
            frames={},
            native_count=method.schema.native_count,
        )
    aligned = align(dataset, det)
    normalizer = sequence_normalizer(aligned, settings.scope)
    tally = _Tally()
    frames = tuple(
        evaluate_frame(frame, aligned, method, settings, normalizer, tally)
        for frame in aligned.frames
    )
    _warn_unnormalized(tally, method.name, dataset.sequence_id)
    logger.debug("Evaluated %s on %s: %d frames", method.name, dataset.sequence_id, len(frames))
    return SequenceRun(method=method.name, aligned=aligned, frames=frames)


def mixture_sequence(
    runs: Sequence[SequenceRun],
    settings: EvaluationSettings,
) -> tuple[FrameResult, ...]:
    """Evaluate the mixture of several methods' runs on the same sequence.

    Per frame the highest-score selection of every method is averaged.
    Only Neck-MidHip errors and missing data are measured; the averaged
    pose has no score and no rank among real detections.
    """
    base = runs[0].aligned
    normalizer = sequence_normalizer(base, settings.scope)
    tally = _Tally()
    results: list[FrameResult] = []
    for i, frame in enumerate(base.frames):
        selections = [
            select_detection(run.aligned.frames[i], SelectionStrategy.HIGHEST_SCORE)
            for run in runs
        ]
        pose = mixture_average(selections)
        targets: list[TargetResult] = []
        for gt in frame.targets(settings.scope):
            if pose is None:
                targets.append(TargetResult())
                continue
            targets.append(
                TargetResult(nmh=_nmh(pose, gt, base.normalization, normalizer, tally))
            )
        results.append(
            FrameResult(
                method=MIXTURE_METHOD,
                dataset_id=settings.dataset_id,
                sequence_id=base.sequence_id,
                frame_id=frame.frame_id,
                detection_count=0 if pose is None else 1,
                expected_persons=base.expected_persons,
                method_keypoint_count=NUM_KEYPOINTS,
                selected_absent=None if pose is None else absent_keypoints(pose),
                targets=tuple(targets),
                input_mode=settings.input_mode,
            )
        )
    _warn_unnormalized(tally, MIXTURE_METHOD, base.sequence_id)
    return tuple(results)


def run_evaluation(config: RunConfig) -> EvaluationResult:
    """Evaluate every configured method on every ground-truth sequence.

    Raises:
        ParseError: If an input file is malformed
        SequenceMismatchError: If detections cannot be paired with sequences
    """
    settings = EvaluationSettings.from_config(config)
    sequences = load_ground_truth(config.ground_truth, config.gt_format, config.norm)
    methods = [load_method(spec, sequences) for spec in config.methods]
    tasks = [(method, dataset) for method in methods for dataset in sequences]
    logger.info(
        "Evaluating %d methods on %d sequences with %d workers",
        len(methods),
        len(sequences),
        config.jobs,
    )
    with ThreadPoolExecutor(max_workers=config.jobs) as executor:
        runs = list(executor.map(lambda t: evaluate_sequence(t[1], t[0], settings), tasks))

    frames = [f for run in runs for f in run.frames]
    method_order = [method.name for method in methods]
    if config.mixture:
        by_key = {(run.method, run.aligned.sequence_id): run for run in runs}
        for dataset in sequences:
            members = [by_key[(name, dataset.sequence_id)] for name in config.mixture]
            frames.extend(mixture_sequence(members, settings))
        method_order.append(MIXTURE_METHOD)

    def bundle(grouping: Grouping) -> ReportBundle:
        return ReportBundle(
            toolkit_version=__version__,
            sigma_digest=settings.sigma.digest(),
            cpe_c=config.cpe_c,
            selection=settings.strategy.value,
            scope=settings.scope.value,
            grouping=grouping,
            reports=aggregate(frames, grouping, config.cpe_c, method_order),
        )

    return EvaluationResult(
        bundle=bundle(Grouping.DATASET),
        per_sequence=bundle(Grouping.SEQUENCE),
        frames=tuple(frames),
    )


def emit_outputs(result: EvaluationResult, config: RunConfig) -> list[Path]:
    """Write the report files selected by ``config.emit``.

    Raises:
        OutputWriteError: If a file cannot be written
    """
    out = Path(config.out)
    written: list[Path] = []
    if EmitKind.TABLES in config.emit:
        written.append(emit_tables(result.bundle, TableFormat.JSON, out / f"{REPORT_FILE}.json"))
        written.append(emit_tables(result.bundle, TableFormat.CSV, out / f"{REPORT_FILE}.csv"))
    if EmitKind.PER_SEQUENCE in config.emit:
        for fmt in TableFormat:
            written.append(
                emit_tables(result.per_sequence, fmt, out / f"{PER_SEQUENCE_FILE}.{fmt.value}")
            )
    if EmitKind.CIRCLES in config.emit:
        reports = [r for r in result.bundle.reports if r.nmh_per_keypoint]
        spec = build_circle_spec(reports, title=f"Neck-MidHip errors on {config.dataset_id}")
        written.append(emit_circle_plot(spec, out / f"circles_{config.dataset_id}.svg"))
    if EmitKind.SCATTER in config.emit:
        scatter = build_scatter_spec(
            result.frames,
            result.bundle.reports,
            title=f"Detection score against OKS on {config.dataset_id}",
        )
        written.append(emit_scatter_plot(scatter, out / f"scatter_{config.dataset_id}.svg"))
    return written
