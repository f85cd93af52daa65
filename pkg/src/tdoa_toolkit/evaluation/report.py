import csv
import logging
import os
from pathlib import Path

from tdoa_toolkit.evaluation.metrics import EvalReport

log = logging.getLogger(__name__)

REPORT_HEADER = ("estimator", "dataset_hash", "condition", "value", "inlier_ratio", "n_pairs")
HISTOGRAM_HEADER = ("bin_left_m", "count")


def _g(value: float) -> str:
    return f"{value:.6g}"


def write_report_csv(reports: list[EvalReport], path: str | os.PathLike) -> Path:
    """One row per (estimator, condition, value), sorted; floats at 6 significant digits."""
    path = Path(path)
    rows = sorted((r.estimator_id, r.dataset_hash, row.condition, row.value, row.inlier_ratio, row.n_pairs)
                  for r in reports for row in r.rows)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(REPORT_HEADER)
        for estimator, dataset_hash, condition, value, ratio, n_pairs in rows:
            writer.writerow([estimator, dataset_hash, condition, _g(value), _g(ratio), n_pairs])
    log.info("report written to %s", path)
    return path


def write_histogram_csv(histogram: list[tuple[float, int]], path: str | os.PathLike) -> Path:
    path = Path(path)
    with open(path, "w", newline="") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(HISTOGRAM_HEADER)
        for left, count in histogram:
            writer.writerow([_g(left), count])
    return path


def safe_filename(estimator_id: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in estimator_id)
