"""
Sensitivity sweeps over freshly simulated two-microphone scenarios.

Pair ``k`` of a sweep always starts from the scenario seed
``derive_seed(sweep.seed, k)``, so every grid point sees the same rooms
wherever the room can realise the requested reverberation time. Rooms that
cannot (Sabine absorption >= 1) are redrawn from
``derive_seed(sweep.seed, k, attempt)``.
"""
import logging
import math
from dataclasses import dataclass, replace
from typing import Any

import numpy as np
from tqdm import tqdm

from tdoa_toolkit.acoustics.reverb import t60_to_reflection
from tdoa_toolkit.base import AbstractEstimator
from tdoa_toolkit.dataset.config import GenerationConfig
from tdoa_toolkit.dataset.pairs import LabeledPair, enumerate_pairs
from tdoa_toolkit.dataset.scenario import ScenarioSpec, RoomRecording, sample_scenario, render_scenario, \
    SOURCE_STREAM
from tdoa_toolkit.dataset.sounds import SoundPool, SyntheticPool
from tdoa_toolkit.dsp.noise import add_noise_at_snr
from tdoa_toolkit.enums import SweepKind
from tdoa_toolkit.evaluation.harness import estimate_pairs
from tdoa_toolkit.evaluation.metrics import EvalReport, ReportRow, residuals_m, INLIER_THRESHOLD_M
from tdoa_toolkit.exceptions import GenerationError, InvalidArgumentError, OutOfRangeError
from tdoa_toolkit.utils import derive_seed, parallel_map, content_hash, dataclass_to_dict, strict_from_dict

log = logging.getLogger(__name__)

SNR_GRID_DB = tuple(float(v) for v in np.arange(-30, 31, 5))
T60_GRID_S = tuple(round(0.05 + 0.1 * k, 2) for k in range(10))
ROOM_ATTEMPTS = 1000
_NOISE_STREAM = 7


@dataclass
class SweepConfig:
    kind: SweepKind = SweepKind.SNR
    grid: tuple[float, ...] | None = None
    pairs_per_point: int = 200
    fixed_t60_s: float = 0.2
    fixed_snr_db: float = 10.0
    seed: int = 0

    def __post_init__(self):
        self.kind = SweepKind(self.kind)
        if self.grid is None:
            self.grid = SNR_GRID_DB if self.kind == SweepKind.SNR else T60_GRID_S
        self.grid = tuple(float(v) for v in self.grid)
        if self.pairs_per_point < 1 or not self.grid:
            raise InvalidArgumentError("a sweep needs at least one grid point and one pair per point")

    @property
    def condition(self) -> str:
        return "snr_db" if self.kind == SweepKind.SNR else "t60_s"

    def to_dict(self) -> dict[str, Any]:
        data = dataclass_to_dict(self)
        data["kind"] = self.kind.value
        return data

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SweepConfig":
        return strict_from_dict(cls, data)


def _scenario_with_t60(sweep: SweepConfig, config: GenerationConfig, k: int, t60: float,
                       snr_db: float) -> ScenarioSpec:
    for attempt in range(ROOM_ATTEMPTS):
        seed = derive_seed(sweep.seed, k) if attempt == 0 else derive_seed(sweep.seed, k, attempt)
        spec = sample_scenario(seed, config)
        try:
            reflection = t60_to_reflection(spec.room.dims, t60)
        except OutOfRangeError:
            continue
        return replace(spec, room=replace(spec.room, reflection_coeff=reflection), snr_db=snr_db)
    raise GenerationError(f"no room of the template realises T60 = {t60} s after {ROOM_ATTEMPTS} draws",
                          seed=sweep.seed)


def _two_mic_template(config: GenerationConfig) -> GenerationConfig:
    return replace(config, mics=2)


def _render(spec: ScenarioSpec, config: GenerationConfig, pool: SoundPool, k: int) -> RoomRecording:
    rng = np.random.default_rng(derive_seed(spec.seed, SOURCE_STREAM))
    source, label = pool.draw(rng, config.total_len, config.sample_rate_hz)
    return render_scenario(spec, source, threads=1, index=k, source_label=label)


def _score(estimator: AbstractEstimator, pairs: list[LabeledPair], threads: int | None) -> tuple[float, int]:
    estimates = estimate_pairs(estimator, pairs, threads)
    residuals = residuals_m(estimates, [p.tdoa_s for p in pairs], pairs[0].speed_of_sound)
    return float(np.mean(residuals <= INLIER_THRESHOLD_M)), len(pairs)


def snr_sweep(estimators: list[AbstractEstimator], sweep: SweepConfig, config: GenerationConfig,
              pool: SoundPool | None = None, threads: int | None = 1, progress: bool = True) -> list[EvalReport]:
    """Inlier@10cm against SNR at a fixed T60; clean renders are shared by all grid points."""
    pool = pool or SyntheticPool()
    config = _two_mic_template(config)

    def clean(k: int) -> RoomRecording:
        return _render(_scenario_with_t60(sweep, config, k, sweep.fixed_t60_s, math.inf), config, pool, k)

    recordings = list(tqdm(parallel_map(clean, range(sweep.pairs_per_point), threads),
                           total=sweep.pairs_per_point, desc="rendering", unit="pair", disable=not progress))
    reports = _empty_reports(estimators, sweep, config)
    for point, snr_db in enumerate(tqdm(sweep.grid, desc="snr", unit="point", disable=not progress)):
        pairs = []
        for rec in recordings:
            noisy = []
            for m, clip in enumerate(rec.clips):
                rng = np.random.default_rng(derive_seed(sweep.seed, _NOISE_STREAM, point, rec.index, m))
                noisy.append(add_noise_at_snr(clip, snr_db, rng))
            pairs += enumerate_pairs(replace(rec, clips=noisy), config.num_classes)
        for estimator, report in zip(estimators, reports):
            ratio, n = _score(estimator, pairs, threads)
            report.rows.append(ReportRow(sweep.condition, snr_db, ratio, n))
    return reports


def t60_sweep(estimators: list[AbstractEstimator], sweep: SweepConfig, config: GenerationConfig,
              pool: SoundPool | None = None, threads: int | None = 1, progress: bool = True) -> list[EvalReport]:
    """Inlier@10cm against T60 at a fixed SNR; reflection coefficients follow from Sabine's formula."""
    pool = pool or SyntheticPool()
    config = _two_mic_template(config)
    reports = _empty_reports(estimators, sweep, config)
    for t60 in tqdm(sweep.grid, desc="t60", unit="point", disable=not progress):

        def render(k: int) -> RoomRecording:
            return _render(_scenario_with_t60(sweep, config, k, t60, sweep.fixed_snr_db), config, pool, k)

        pairs = []
        for rec in parallel_map(render, range(sweep.pairs_per_point), threads):
            pairs += enumerate_pairs(rec, config.num_classes)
        for estimator, report in zip(estimators, reports):
            ratio, n = _score(estimator, pairs, threads)
            report.rows.append(ReportRow(sweep.condition, t60, ratio, n))
    return reports


def _empty_reports(estimators: list[AbstractEstimator], sweep: SweepConfig,
                   config: GenerationConfig) -> list[EvalReport]:
    sweep_hash = content_hash({"sweep": sweep.to_dict(), "generation": config.to_dict()})
    return [EvalReport(e.estimator_id, sweep_hash) for e in estimators]


def run_sweep(estimators: list[AbstractEstimator], sweep: SweepConfig, config: GenerationConfig,
              pool: SoundPool | None = None, threads: int | None = 1, progress: bool = True) -> list[EvalReport]:
    if sweep.kind == SweepKind.SNR:
        return snr_sweep(estimators, sweep, config, pool, threads, progress)
    return t60_sweep(estimators, sweep, config, pool, threads, progress)
