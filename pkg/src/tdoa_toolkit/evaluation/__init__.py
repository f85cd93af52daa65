from tdoa_toolkit.evaluation.benchmark import benchmark, shifted_noise_pairs, BenchmarkRow
from tdoa_toolkit.evaluation.harness import estimate_pairs, evaluate_dataset
from tdoa_toolkit.evaluation.metrics import EvalReport, ReportRow, inlier_ratio, threshold_curve, \
    residual_histogram, THRESHOLD_GRID_M
from tdoa_toolkit.evaluation.report import write_report_csv, write_histogram_csv
from tdoa_toolkit.evaluation.sweeps import SweepConfig, snr_sweep, t60_sweep, run_sweep
from tdoa_toolkit.evaluation.windowing import sliding_window_infer, window_hop, WindowEstimate

__all__ = [
    'EvalReport',
    'ReportRow',
    'THRESHOLD_GRID_M',
    'inlier_ratio',
    'threshold_curve',
    'residual_histogram',
    'estimate_pairs',
    'evaluate_dataset',
    'write_report_csv',
    'write_histogram_csv',
    'SweepConfig',
    'snr_sweep',
    't60_sweep',
    'run_sweep',
    'sliding_window_infer',
    'window_hop',
    'WindowEstimate',
    'benchmark',
    'shifted_noise_pairs',
    'BenchmarkRow',
]
