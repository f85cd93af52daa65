import csv

import numpy as np
import pytest
from hypothesis import given, strategies as st

from conftest import small_generation_config
from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.base import BaseEstimator, TdoaEstimate
from tdoa_toolkit.dataset import DatasetReader, GenerationConfig
from tdoa_toolkit.enums import SweepKind
from tdoa_toolkit.estimators import OracleEstimator
from tdoa_toolkit.evaluation import (EvalReport, ReportRow, THRESHOLD_GRID_M, inlier_ratio, threshold_curve,
                                     residual_histogram, estimate_pairs, evaluate_dataset, write_report_csv,
                                     write_histogram_csv, SweepConfig, run_sweep, sliding_window_infer, window_hop,
                                     benchmark, shifted_noise_pairs)
from tdoa_toolkit.exceptions import InvalidArgumentError, EstimatorError
from tdoa_toolkit.gcc_phat import GccPhatEstimator

FS = 16000
C = 343.0


class FixedLag(BaseEstimator):
    """Always answers the same lag; counts its calls."""

    def __init__(self, lag: int = 0):
        self.lag = lag
        self.calls = 0
        self.estimator_id = f"fixed{lag}"

    def estimate(self, x_i: AudioClip, x_j: AudioClip) -> TdoaEstimate:
        self.calls += 1
        return TdoaEstimate.from_lag(self.lag, x_i.sample_rate_hz, 1.0, 1.0)


class Exploding(BaseEstimator):
    estimator_id = "exploding"

    def estimate(self, x_i: AudioClip, x_j: AudioClip) -> TdoaEstimate:
        raise EstimatorError("no estimate")


class TestMetrics:

    def test_inlier_example(self):
        # residuals 0, 3.43 cm and 34.3 cm
        assert inlier_ratio([0.0, 1e-4, 1e-3], [0.0, 0.0, 0.0], 0.1, C) == pytest.approx(2 / 3)

    def test_failed_estimates_are_outliers(self):
        assert inlier_ratio([None, 0.0], [0.0, 0.0], 0.1, C) == 0.5

    def test_threshold_is_inclusive(self):
        assert inlier_ratio([0.1 / C], [0.0], 0.1, C) == 1.0

    @pytest.mark.parametrize("threshold", [0.0, -0.1])
    def test_threshold_must_be_positive(self, threshold):
        with pytest.raises(InvalidArgumentError):
            inlier_ratio([0.0], [0.0], threshold)

    def test_lengths_must_match(self):
        with pytest.raises(InvalidArgumentError):
            inlier_ratio([0.0], [0.0, 1.0])
        with pytest.raises(InvalidArgumentError):
            inlier_ratio([], [])

    def test_curve_is_monotone(self, rng):
        truths = rng.uniform(-0.01, 0.01, 500)
        estimates = list(truths + rng.normal(0, 2e-4, 500))
        estimates[::7] = [None] * len(estimates[::7])
        report = threshold_curve(estimates, truths, "x", "h", speed=C)
        ratios = [row.inlier_ratio for row in report.rows]
        assert len(ratios) == len(THRESHOLD_GRID_M) == 26
        assert all(a <= b for a, b in zip(ratios, ratios[1:]))
        assert report.ratio_at(0.1) == pytest.approx(inlier_ratio(estimates, truths, 0.1, C))

    def test_histogram(self):
        histogram = residual_histogram([0.0, 0.01 / C, -5.0 / C, None], [0.0] * 4, C)
        assert len(histogram) == 200
        assert histogram[0][0] == pytest.approx(-2.0)
        assert histogram[-1][0] == pytest.approx(1.98)
        counts = dict((round(left, 2), count) for left, count in histogram)
        assert counts[0.0] == 2
        assert counts[-2.0] == 1
        assert counts[1.98] == 1
        assert sum(c for _, c in histogram) == 4

    def test_report_row_validation(self):
        with pytest.raises(InvalidArgumentError):
            ReportRow("snr_db", 0.0, 1.5, 10)
        with pytest.raises(InvalidArgumentError):
            ReportRow("snr_db", 0.0, 0.5, 0)


class TestWindowing:

    def test_default_hop(self):
        assert window_hop(10000, 5 / 6) == 1667

    @given(st.integers(10000, 60000))
    def test_window_count(self, length):
        clip = AudioClip(np.zeros(length), FS)
        estimator = FixedLag(3)
        windows = sliding_window_infer(estimator, clip, clip, 10000)
        assert len(windows) == (length - 10000) // 1667 + 1
        assert estimator.calls == len(windows)
        assert windows[0].t_center_s == pytest.approx(5000 / FS)
        assert all(w.estimate.lag_samples == 3 for w in windows)

    def test_single_window(self):
        clip = AudioClip(np.zeros(4000), FS)
        (window,) = sliding_window_infer(FixedLag(), clip, clip, 4000)
        assert window.start == 0
        assert window.t_center_s == pytest.approx(2000 / FS)

    def test_tiling(self):
        clip = AudioClip(np.zeros(3000), FS)
        windows = sliding_window_infer(FixedLag(), clip, clip, 1000, overlap=0.0)
        assert [w.start for w in windows] == [0, 1000, 2000]

    def test_clip_shorter_than_window(self):
        clip = AudioClip(np.zeros(999), FS)
        with pytest.raises(InvalidArgumentError):
            sliding_window_infer(FixedLag(), clip, clip, 1000)

    @pytest.mark.parametrize("overlap", [1.0, -0.1])
    def test_bad_overlap(self, overlap):
        with pytest.raises(InvalidArgumentError):
            window_hop(1000, overlap)

    def test_tracks_a_changing_delay(self, rng):
        x = rng.standard_normal(4 * 2048 + 64)
        left = np.concatenate([np.roll(x[:2 * 2048], 5)[:2 * 2048], np.roll(x[2 * 2048:], -9)])
        windows = sliding_window_infer(GccPhatEstimator(max_lag=32), AudioClip(left, FS), AudioClip(x, FS), 2048,
                                       overlap=0.0)
        lags = [w.estimate.lag_samples for w in windows]
        assert lags[0] == 5
        assert lags[-1] == -9


class TestHarness:

    def test_failures_become_none(self, tiny_dataset):
        pairs = DatasetReader(tiny_dataset).read_pairs(0)
        assert estimate_pairs(Exploding(), pairs) == [None] * len(pairs)

    def test_oracle_is_perfect(self, tiny_dataset):
        reader = DatasetReader(tiny_dataset)
        report, histogram = evaluate_dataset(OracleEstimator(), reader, progress=False)
        assert report.estimator_id == "oracle"
        assert report.dataset_hash == reader.manifest_hash
        assert all(row.inlier_ratio == 1.0 for row in report.rows)
        assert all(row.n_pairs == 9 for row in report.rows)
        assert sum(c for _, c in histogram) == 9

    def test_threads_do_not_change_results(self, tiny_dataset):
        reader = DatasetReader(tiny_dataset)
        single, _ = evaluate_dataset(GccPhatEstimator(), reader, threads=1, progress=False)
        pooled, _ = evaluate_dataset(GccPhatEstimator(), reader, threads=3, progress=False)
        assert single.rows == pooled.rows

    @pytest.mark.parametrize("estimator", [GccPhatEstimator(), OracleEstimator(), FixedLag(3), Exploding()])
    def test_inputs_are_left_alone(self, tiny_dataset, estimator):
        pairs = DatasetReader(tiny_dataset).read_pairs(1)
        before = [(p.clip_i.samples.copy(), p.clip_j.samples.copy(), p.tdoa_s) for p in pairs]
        estimate_pairs(estimator, pairs, threads=2)
        for pair, (x_i, x_j, tdoa) in zip(pairs, before):
            np.testing.assert_array_equal(pair.clip_i.samples, x_i)
            np.testing.assert_array_equal(pair.clip_j.samples, x_j)
            assert pair.tdoa_s == tdoa

    def test_oracle_needs_labels(self, rng):
        x = AudioClip(rng.standard_normal(16), FS)
        with pytest.raises(EstimatorError):
            OracleEstimator().estimate(x, x)


class TestReport:

    def test_csv_layout(self, tmp_path):
        reports = [EvalReport("b", "h", [ReportRow("snr_db", 10.0, 0.5, 4), ReportRow("snr_db", -5.0, 0.25, 4)]),
                   EvalReport("a", "h", [ReportRow("snr_db", 10.0, 1 / 3, 3)])]
        path = write_report_csv(reports, tmp_path / "sweep.csv")
        lines = path.read_text().splitlines()
        assert lines[0] == "estimator,dataset_hash,condition,value,inlier_ratio,n_pairs"
        assert lines[1:] == ["a,h,snr_db,10,0.333333,3", "b,h,snr_db,-5,0.25,4", "b,h,snr_db,10,0.5,4"]

    def test_histogram_csv(self, tmp_path):
        path = write_histogram_csv([(-0.02, 1), (0.0, 5)], tmp_path / "hist.csv")
        with open(path, newline="") as f:
            assert list(csv.reader(f)) == [["bin_left_m", "count"], ["-0.02", "1"], ["0", "5"]]


class TestSweeps:

    def test_snr_sweep_with_oracle(self):
        sweep = SweepConfig(SweepKind.SNR, grid=(0.0, 20.0), pairs_per_point=2, seed=1)
        reports = run_sweep([OracleEstimator(), FixedLag(0)], sweep, small_generation_config(), progress=False)
        oracle, fixed = reports
        assert [row.value for row in oracle.rows] == [0.0, 20.0]
        assert all(row.inlier_ratio == 1.0 and row.n_pairs == 2 for row in oracle.rows)
        assert fixed.estimator_id == "fixed0"
        assert oracle.dataset_hash == fixed.dataset_hash

    def test_t60_sweep_with_oracle(self):
        sweep = SweepConfig("t60", grid=(0.2, 0.4), pairs_per_point=2, seed=2)
        (report,) = run_sweep([OracleEstimator()], sweep, small_generation_config(), progress=False)
        assert [row.condition for row in report.rows] == ["t60_s", "t60_s"]
        assert all(row.inlier_ratio == 1.0 for row in report.rows)

    def test_sweeps_are_reproducible(self):
        sweep = SweepConfig(SweepKind.SNR, grid=(5.0,), pairs_per_point=3, seed=4)
        a = run_sweep([GccPhatEstimator()], sweep, small_generation_config(), progress=False)
        b = run_sweep([GccPhatEstimator()], sweep, small_generation_config(), threads=2, progress=False)
        assert a[0].rows == b[0].rows

    @pytest.mark.slow
    def test_gccphat_is_flat_across_snr(self):
        sweep = SweepConfig(SweepKind.SNR, grid=(-10.0, 0.0, 10.0, 20.0, 30.0), pairs_per_point=200,
                            fixed_t60_s=0.2, seed=5)
        (report,) = run_sweep([GccPhatEstimator()], sweep, GenerationConfig(movement=False), threads=4,
                              progress=False)
        ratios = [row.inlier_ratio for row in report.rows]
        assert max(ratios) - min(ratios) <= 0.05

    @pytest.mark.slow
    def test_gccphat_degrades_with_reverberation(self):
        sweep = SweepConfig(SweepKind.T60, grid=(0.05, 0.25, 0.45, 0.65), pairs_per_point=200, seed=6)
        (report,) = run_sweep([GccPhatEstimator()], sweep, GenerationConfig(movement=False), threads=4,
                              progress=False)
        ratios = [row.inlier_ratio for row in report.rows]
        assert all(later <= earlier + 0.03 for earlier, later in zip(ratios, ratios[1:]))
        assert ratios[-1] < ratios[0]

    def test_default_grids(self):
        assert SweepConfig(SweepKind.SNR).grid[0] == -30.0
        assert SweepConfig(SweepKind.SNR).grid[-1] == 30.0
        assert SweepConfig(SweepKind.T60).grid[:2] == (0.05, 0.15)

    def test_empty_grid(self):
        with pytest.raises(InvalidArgumentError):
            SweepConfig(SweepKind.SNR, grid=())


class TestBenchmark:

    def test_rows_per_estimator(self):
        pairs = shifted_noise_pairs(5, 1024, FS, seed=0)
        rows = benchmark([GccPhatEstimator(), OracleEstimator()], pairs, batch=2)
        assert [r.estimator_id for r in rows] == ["gccphat", "oracle"]
        assert all(r.n_pairs == 5 and r.ms_per_pair >= 0 for r in rows)

    def test_shifted_pairs_are_recoverable(self):
        pairs = shifted_noise_pairs(20, 2048, FS, seed=1)
        estimator = GccPhatEstimator()
        assert all(estimator.estimate_labeled(p).tdoa_s == p.tdoa_s for p in pairs)

    def test_needs_pairs(self):
        with pytest.raises(InvalidArgumentError):
            benchmark([GccPhatEstimator()], [])
