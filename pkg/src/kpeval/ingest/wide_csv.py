"""WideCsv reading: one row per pose, three columns per keypoint.

Header: ``frame_id,<name>_x,<name>_y,<name>_conf,...`` plus optional
``role``, ``score``, ``box_score`` and ``rank`` columns. An empty cell
means absent. A row whose keypoint cells are all empty lists the frame
without a pose.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

import pandas as pd

from kpeval.exceptions import ParseError
from kpeval.ingest.formats import as_float, confidence_value, optional_float

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence
    from pathlib import Path

    from kpeval.core.schema import NativeKeypoint

FRAME_COLUMN = "frame_id"
OPTIONAL_COLUMNS = ("role", "score", "box_score", "rank")


@dataclass(frozen=True)
class WideRow:
    """One decoded WideCsv row."""

    line: int
    frame_id: str
    points: list[NativeKeypoint]
    role: str
    score: float | None
    box_score: float | None
    rank: int | None

    @property
    def is_empty(self) -> bool:
        """True when the row carries no keypoint at all."""
        return all(p is None for p in self.points)


def read_wide_csv(path: Path) -> pd.DataFrame:
    """Load a WideCsv file with every cell as a string."""
    try:
        frame = pd.read_csv(
            path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True
        )
    except (OSError, UnicodeDecodeError) as e:
        raise ParseError(f"Cannot read CSV: {e}", str(path)) from e
    except (pd.errors.ParserError, pd.errors.EmptyDataError) as e:
        raise ParseError(f"Malformed CSV: {e}", str(path)) from e
    frame.columns = [str(c).strip() for c in frame.columns]
    if FRAME_COLUMN not in frame.columns:
        raise ParseError(f"Missing '{FRAME_COLUMN}' column", f"{path}:1")
    return frame


def _cell(row: pd.Series, column: str) -> str:
    if column not in row.index:
        return ""
    return str(row[column]).strip()


def _point(row: pd.Series, prefix: str | None, locus: str) -> NativeKeypoint:
    if prefix is None:
        return None
    x_cell = _cell(row, f"{prefix}_x")
    y_cell = _cell(row, f"{prefix}_y")
    if not x_cell and not y_cell:
        return None
    if not (x_cell and y_cell):
        raise ParseError(f"Keypoint {prefix} has only one coordinate", locus)
    x = as_float(x_cell, f"{locus}:{prefix}_x")
    y = as_float(y_cell, f"{locus}:{prefix}_y")
    conf = confidence_value(_cell(row, f"{prefix}_conf"), f"{locus}:{prefix}_conf")
    return (x, y, conf)


def iter_rows(
    frame: pd.DataFrame, prefixes: Sequence[str | None], source: str
) -> Iterator[WideRow]:
    """Decode rows; ``prefixes[i]`` names the columns of native keypoint ``i``.

    A ``None`` prefix, or a prefix without columns, gives an absent keypoint.
    """
    for position, (_, row) in enumerate(frame.iterrows()):
        line = position + 2
        locus = f"{source}:{line}"
        frame_id = _cell(row, FRAME_COLUMN)
        if not frame_id:
            raise ParseError("Empty frame_id", locus)
        raw_rank = _cell(row, "rank")
        rank: int | None = None
        if raw_rank:
            try:
                rank = int(raw_rank)
            except ValueError:
                raise ParseError(f"Rank must be an integer, got {raw_rank!r}", locus) from None
            if rank < 0:
                raise ParseError(f"Rank must be >= 0, got {rank}", locus)
        yield WideRow(
            line=line,
            frame_id=frame_id,
            points=[_point(row, p, locus) for p in prefixes],
            role=_cell(row, "role"),
            score=optional_float(_cell(row, "score"), f"{locus}:score"),
            box_score=optional_float(_cell(row, "box_score"), f"{locus}:box_score"),
            rank=rank,
        )


def has_column(frame: pd.DataFrame, name: str) -> bool:
    """Whether the header has ``name``."""
    return name in frame.columns


def keypoint_prefixes(frame: pd.DataFrame) -> set[str]:
    """Prefixes of all ``<prefix>_x`` columns in the header."""
    return {str(c)[: -len("_x")] for c in frame.columns if str(c).endswith("_x")}
