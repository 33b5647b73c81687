"""Canonical skeleton and per-keypoint falloff coefficients.

The canonical skeleton is the 17-keypoint COCO layout. Neck and MidHip
are virtual: they never appear in ingested data and are only derived
from the shoulder and hip pairs.
"""

from __future__ import annotations

import hashlib
import math
from dataclasses import dataclass
from enum import IntEnum
from importlib import resources
from types import MappingProxyType
from typing import TYPE_CHECKING

from kpeval.exceptions import ParseError

if TYPE_CHECKING:
    from collections.abc import Mapping
    from pathlib import Path

NUM_KEYPOINTS = 17


class KeypointId(IntEnum):
    """Canonical keypoint identifiers; the value is the serialized index."""

    NOSE = 0
    LEFT_EYE = 1
    RIGHT_EYE = 2
    LEFT_EAR = 3
    RIGHT_EAR = 4
    LEFT_SHOULDER = 5
    RIGHT_SHOULDER = 6
    LEFT_ELBOW = 7
    RIGHT_ELBOW = 8
    LEFT_WRIST = 9
    RIGHT_WRIST = 10
    LEFT_HIP = 11
    RIGHT_HIP = 12
    LEFT_KNEE = 13
    RIGHT_KNEE = 14
    LEFT_ANKLE = 15
    RIGHT_ANKLE = 16
    # virtual
    NECK = 17
    MID_HIP = 18

    @property
    def is_virtual(self) -> bool:
        """Whether the keypoint is derived rather than ingested."""
        return self.value >= NUM_KEYPOINTS

    @property
    def canonical_name(self) -> str:
        """Lower-case name used in files (``left_shoulder``)."""
        return self.name.lower()

    @classmethod
    def from_name(cls, name: str) -> KeypointId:
        """Look up a keypoint by its canonical name.

        Raises:
            KeyError: If the name is not a canonical keypoint name
        """
        try:
            return cls[name.strip().upper()]
        except KeyError:
            msg = f"Unknown keypoint name: {name!r}"
            raise KeyError(msg) from None


REAL_KEYPOINTS: tuple[KeypointId, ...] = tuple(k for k in KeypointId if not k.is_virtual)

# Bones drawn for context in figures
SKELETON_EDGES: tuple[tuple[KeypointId, KeypointId], ...] = (
    (KeypointId.LEFT_ANKLE, KeypointId.LEFT_KNEE),
    (KeypointId.LEFT_KNEE, KeypointId.LEFT_HIP),
    (KeypointId.RIGHT_ANKLE, KeypointId.RIGHT_KNEE),
    (KeypointId.RIGHT_KNEE, KeypointId.RIGHT_HIP),
    (KeypointId.LEFT_HIP, KeypointId.RIGHT_HIP),
    (KeypointId.LEFT_SHOULDER, KeypointId.LEFT_HIP),
    (KeypointId.RIGHT_SHOULDER, KeypointId.RIGHT_HIP),
    (KeypointId.LEFT_SHOULDER, KeypointId.RIGHT_SHOULDER),
    (KeypointId.LEFT_SHOULDER, KeypointId.LEFT_ELBOW),
    (KeypointId.RIGHT_SHOULDER, KeypointId.RIGHT_ELBOW),
    (KeypointId.LEFT_ELBOW, KeypointId.LEFT_WRIST),
    (KeypointId.RIGHT_ELBOW, KeypointId.RIGHT_WRIST),
    (KeypointId.LEFT_EYE, KeypointId.RIGHT_EYE),
    (KeypointId.NOSE, KeypointId.LEFT_EYE),
    (KeypointId.NOSE, KeypointId.RIGHT_EYE),
    (KeypointId.LEFT_EYE, KeypointId.LEFT_EAR),
    (KeypointId.RIGHT_EYE, KeypointId.RIGHT_EAR),
)


def parse_sigma_text(text: str, source: str = "<text>") -> dict[KeypointId, float]:
    """Parse ``keypoint_name = value`` lines.

    Blank lines and ``#`` comments are ignored.

    Raises:
        ParseError: On a malformed line, an unknown name or a non-positive value
    """
    values: dict[KeypointId, float] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        locus = f"{source}:{lineno}"
        name, sep, value = line.partition("=")
        if not sep:
            raise ParseError("Expected 'keypoint_name = value'", locus)
        try:
            kid = KeypointId.from_name(name)
        except KeyError as e:
            raise ParseError(str(e), locus) from None
        if kid.is_virtual:
            raise ParseError(f"Virtual keypoint {kid.canonical_name} has no sigma", locus)
        try:
            sigma = float(value)
        except ValueError:
            raise ParseError(f"Not a number: {value.strip()!r}", locus) from None
        if not math.isfinite(sigma) or sigma <= 0:
            raise ParseError(f"Sigma must be positive, got {sigma}", locus)
        values[kid] = sigma
    return values


@dataclass(frozen=True)
class SigmaTable:
    """Per-keypoint falloff constants for keypoint similarity.

    ``sigma`` holds the published COCO sigmas; the coefficient used in the
    similarity kernel is ``kappa = 2 * sigma`` (COCO evaluation convention).
    """

    sigma: Mapping[KeypointId, float]

    def __post_init__(self) -> None:
        missing = [k.canonical_name for k in REAL_KEYPOINTS if k not in self.sigma]
        if missing:
            msg = f"Sigma table is missing keypoints: {', '.join(missing)}"
            raise ValueError(msg)
        bad = [k.canonical_name for k, v in self.sigma.items() if not v > 0]
        if bad:
            msg = f"Sigma values must be positive: {', '.join(bad)}"
            raise ValueError(msg)
        object.__setattr__(self, "sigma", MappingProxyType(dict(self.sigma)))

    def kappa(self, keypoint: KeypointId) -> float:
        """Coefficient c_k of the keypoint similarity kernel."""
        return 2.0 * self.sigma[keypoint]

    def digest(self) -> str:
        """Short hash identifying the table, for report provenance."""
        text = "\n".join(f"{k.canonical_name}={self.sigma[k]!r}" for k in REAL_KEYPOINTS)
        return hashlib.sha256(text.encode("utf-8")).hexdigest()[:16]

    @classmethod
    def default(cls) -> SigmaTable:
        """Load the packaged COCO keypoint sigmas."""
        text = resources.files("kpeval").joinpath("data/coco_sigmas.txt").read_text("utf-8")
        return cls(parse_sigma_text(text, "coco_sigmas.txt"))

    @classmethod
    def from_file(cls, path: Path) -> SigmaTable:
        """Load an override file on top of the default table.

        Keypoints the file does not name keep their default sigma.
        """
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ParseError(f"Cannot read sigma file: {e}", str(path)) from e
        merged = dict(cls.default().sigma)
        merged.update(parse_sigma_text(text, str(path)))
        return cls(merged)
