"""Combined performance evaluation (CPE)."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_CPE_C = 0.5


@dataclass(frozen=True)
class CpeResult:
    """CPE and its two rescaled components, all in [0, 1]."""

    cpe: float
    f_nmh: float
    f_missing: float
    c: float


def rescale(x: float, c: float = DEFAULT_CPE_C) -> float:
    """``1 - min(1, x / (c * 100))``: 1 for no error, 0 at c*100 percent and above."""
    return 1.0 - min(1.0, x / (c * 100.0))


def cpe(nmh_mean_percent: float, missing_percent: float, c: float = DEFAULT_CPE_C) -> CpeResult:
    """Mean of the rescaled Neck-MidHip error and missing-data percentages.

    Raises:
        ValueError: If an input is negative or c is not positive
    """
    if not c > 0:
        msg = f"CPE coefficient must be positive, got {c}"
        raise ValueError(msg)
    if nmh_mean_percent < 0 or missing_percent < 0:
        msg = f"CPE inputs must be >= 0, got {nmh_mean_percent} and {missing_percent}"
        raise ValueError(msg)
    f_nmh = rescale(nmh_mean_percent, c)
    f_missing = rescale(missing_percent, c)
    return CpeResult(cpe=(f_nmh + f_missing) / 2.0, f_nmh=f_nmh, f_missing=f_missing, c=c)
