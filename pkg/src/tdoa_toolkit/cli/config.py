import json
import logging
import os
from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Any

from tdoa_toolkit.dataset.config import GenerationConfig
from tdoa_toolkit.enums import Preset, FrontendNorm, SweepKind
from tdoa_toolkit.evaluation.sweeps import SweepConfig
from tdoa_toolkit.exceptions import ConfigError
from tdoa_toolkit.neural.model import ModelConfig
from tdoa_toolkit.neural.train import TrainConfig
from tdoa_toolkit.utils import strict_from_dict, dataclass_to_dict, content_hash, worker_count

log = logging.getLogger(__name__)


@dataclass
class RunConfig:
    """
    Every knob of every subcommand. Values come from the dataclass defaults,
    then a JSON file (``--config``, same keys as the flag destinations), then
    the command line. ``None`` means "use the preset's value".
    """
    seed: int = 0
    threads: int | None = None
    preset: Preset = Preset.DESK

    # paths
    dataset: str | None = None
    checkpoint: str | None = None
    sounds: str | None = None
    synthetic_sounds: bool = False
    output: str | None = None
    metrics: str | None = None

    # generation
    rooms: int | None = None
    mics: int | None = None
    signal_len: int | None = None
    preroll: int | None = None
    sample_rate_hz: int | None = None
    no_movement: bool = False
    no_directivity: bool = False

    # training
    epochs: int | None = None
    batch_size: int | None = None
    lr: float | None = None
    label_smoothing: float | None = None
    weight_decay: float | None = None
    validation_fraction: float | None = None
    train_rooms: int | None = None
    frontend_norm: FrontendNorm = FrontendNorm.NONE

    # estimation / evaluation
    estimator: list[str] = field(default_factory=lambda: ["gccphat"])
    window: int | None = None
    overlap: float = 5 / 6
    kind: SweepKind = SweepKind.SNR
    grid: list[float] | None = None
    pairs_per_point: int = 200
    fixed_t60: float = 0.2
    fixed_snr: float = 10.0
    pairs: int = 100
    batch: int = 100

    # single impulse response
    dims: list[float] | None = None
    reflection: float | None = None
    t60: float | None = None
    src: list[float] | None = None
    mic: list[float] | None = None
    src_orient: list[float] | None = None
    mic_orient: list[float] | None = None
    max_order: int = 20
    rir_len: int = 4096
    format: str = "csv"

    def __post_init__(self):
        self.preset = Preset(self.preset)
        self.frontend_norm = FrontendNorm(self.frontend_norm)
        self.kind = SweepKind(self.kind)
        if isinstance(self.estimator, str):
            self.estimator = [self.estimator]

    @classmethod
    def load(cls, config_path: str | os.PathLike | None, overrides: dict[str, Any]) -> "RunConfig":
        data: dict[str, Any] = {}
        if config_path is not None:
            try:
                data = json.loads(Path(config_path).read_text())
            except json.JSONDecodeError as e:
                raise ConfigError(f"{config_path} is not valid JSON: {e}") from None
            if not isinstance(data, dict):
                raise ConfigError(f"{config_path} must hold a JSON object")
        data.update(overrides)
        return strict_from_dict(cls, data)

    def to_dict(self) -> dict[str, Any]:
        data = dataclass_to_dict(self)
        for key in ("preset", "frontend_norm", "kind"):
            data[key] = data[key].value
        return data

    @property
    def config_hash(self) -> str:
        return content_hash(self.to_dict())

    @property
    def worker_threads(self) -> int:
        return worker_count(self.threads)

    def log_effective(self):
        for key in sorted(f.name for f in fields(self)):
            log.info("config %s = %r", key, self.to_dict()[key])
        log.info("config worker threads = %d, hash = %s", self.worker_threads, self.config_hash)

    def generation_config(self) -> GenerationConfig:
        config = GenerationConfig.preset(self.preset)
        changes = {key: value for key, value in (("rooms", self.rooms), ("mics", self.mics),
                                                 ("signal_len", self.signal_len), ("preroll", self.preroll),
                                                 ("sample_rate_hz", self.sample_rate_hz))
                   if value is not None}
        config = replace(config, **changes)
        return config.ablation(movement=False if self.no_movement else None,
                               directivity=False if self.no_directivity else None)

    def model_config(self, generation: GenerationConfig) -> ModelConfig:
        """The preset architecture sized to the dataset's clip length, rate and class count."""
        return replace(ModelConfig.preset(self.preset), input_len=generation.signal_len,
                       sample_rate_hz=generation.sample_rate_hz, num_classes=generation.num_classes,
                       frontend_norm=self.frontend_norm)

    def train_config(self) -> TrainConfig:
        config = TrainConfig.preset(self.preset)
        changes = {key: getattr(self, key) for key in ("epochs", "batch_size", "lr", "label_smoothing",
                                                      "weight_decay", "validation_fraction", "train_rooms")
                   if getattr(self, key) is not None}
        return replace(config, seed=self.seed, **changes)

    def sweep_config(self) -> SweepConfig:
        return SweepConfig(kind=self.kind, grid=None if self.grid is None else tuple(self.grid),
                           pairs_per_point=self.pairs_per_point, fixed_t60_s=self.fixed_t60,
                           fixed_snr_db=self.fixed_snr, seed=self.seed)
