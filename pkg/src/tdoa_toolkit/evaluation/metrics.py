from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from tdoa_toolkit.acoustics.geometry import SPEED_OF_SOUND
from tdoa_toolkit.exceptions import InvalidArgumentError

INLIER_THRESHOLD_M = 0.1
THRESHOLD_GRID_M = np.linspace(0.0, 0.5, 26)
HISTOGRAM_BIN_M = 0.02
HISTOGRAM_LIMIT_M = 2.0


@dataclass(frozen=True)
class ReportRow:
    condition: str
    value: float
    inlier_ratio: float
    n_pairs: int

    def __post_init__(self):
        if not 0.0 <= self.inlier_ratio <= 1.0 or self.n_pairs <= 0:
            raise InvalidArgumentError(f"invalid report row {self}")


@dataclass
class EvalReport:
    estimator_id: str
    dataset_hash: str
    rows: list[ReportRow] = field(default_factory=list)

    def sorted_rows(self) -> list[ReportRow]:
        return sorted(self.rows, key=lambda r: (r.condition, r.value))

    def ratio_at(self, value: float, condition: str | None = None) -> float:
        for row in self.rows:
            if np.isclose(row.value, value) and (condition is None or row.condition == condition):
                return row.inlier_ratio
        raise KeyError(value)


def residuals_m(estimates: Sequence[float | None], truths: Sequence[float], speed: float = SPEED_OF_SOUND) -> np.ndarray:
    """|estimate - truth| * speed; a missing estimate is an infinite residual."""
    if len(estimates) != len(truths):
        raise InvalidArgumentError(f"{len(estimates)} estimates for {len(truths)} truths")
    if not len(truths):
        raise InvalidArgumentError("no estimates to score")
    est = np.array([np.inf if e is None else e for e in estimates], dtype=np.float64)
    return np.abs(est - np.asarray(truths, dtype=np.float64)) * speed


def inlier_ratio(estimates: Sequence[float | None], truths: Sequence[float], threshold_m: float = INLIER_THRESHOLD_M,
                 speed: float = SPEED_OF_SOUND) -> float:
    if threshold_m <= 0:
        raise InvalidArgumentError(f"inlier threshold must be positive, got {threshold_m}")
    return float(np.mean(residuals_m(estimates, truths, speed) <= threshold_m))


def threshold_curve(estimates: Sequence[float | None], truths: Sequence[float], estimator_id: str = "",
                    dataset_hash: str = "", thresholds=THRESHOLD_GRID_M, speed: float = SPEED_OF_SOUND) -> EvalReport:
    residuals = residuals_m(estimates, truths, speed)
    rows = [ReportRow("threshold_m", float(t), float(np.mean(residuals <= t)), len(residuals))
            for t in np.asarray(thresholds, dtype=np.float64)]
    return EvalReport(estimator_id, dataset_hash, rows)


def residual_histogram(estimates: Sequence[float | None], truths: Sequence[float], speed: float = SPEED_OF_SOUND,
                       bin_width_m: float = HISTOGRAM_BIN_M,
                       limit_m: float = HISTOGRAM_LIMIT_M) -> list[tuple[float, int]]:
    """
    Signed residuals (estimate - truth) * speed in bins of `bin_width_m` over [-limit_m, limit_m).
    Residuals outside the range, and failed estimates, land in the edge bins.
    """
    if bin_width_m <= 0 or limit_m <= 0:
        raise InvalidArgumentError("histogram bin width and limit must be positive")
    if len(estimates) != len(truths):
        raise InvalidArgumentError(f"{len(estimates)} estimates for {len(truths)} truths")
    est = np.array([np.inf if e is None else e for e in estimates], dtype=np.float64)
    signed = (est - np.asarray(truths, dtype=np.float64)) * speed
    n_bins = int(round(2 * limit_m / bin_width_m))
    index = np.clip(np.floor((np.nan_to_num(signed, posinf=limit_m, neginf=-limit_m) + limit_m) / bin_width_m),
                    0, n_bins - 1).astype(np.int64)
    counts = np.bincount(index, minlength=n_bins)
    return [(float(-limit_m + k * bin_width_m), int(c)) for k, c in enumerate(counts)]
