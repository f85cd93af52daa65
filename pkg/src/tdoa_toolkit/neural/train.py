import csv
import logging
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from tqdm import tqdm

from tdoa_toolkit.dataset.container import DatasetReader
from tdoa_toolkit.dataset.pairs import class_to_tdoa, tdoa_to_class
from tdoa_toolkit.enums import Preset
from tdoa_toolkit.exceptions import TrainingError, InvalidArgumentError
from tdoa_toolkit.neural.checkpoint import Checkpoint
from tdoa_toolkit.neural.frontend import clip_spectrum, pair_features
from tdoa_toolkit.neural.functional import loss_ce_label_smoothing
from tdoa_toolkit.neural.model import ModelConfig, TdoaNetwork
from tdoa_toolkit.neural.optim import AdamW
from tdoa_toolkit.neural.tensor import no_grad
from tdoa_toolkit.utils import derive_seed, strict_from_dict, dataclass_to_dict

log = logging.getLogger(__name__)

INLIER_THRESHOLD_M = 0.1

# derive_seed stream ids below the training seed
_SPLIT_STREAM = 0
_INIT_STREAM = 1
_SHUFFLE_STREAM = 2


@dataclass
class TrainConfig:
    epochs: int = 10
    batch_size: int = 256
    lr: float = 1e-3
    label_smoothing: float = 0.1
    weight_decay: float = 0.01
    betas: tuple[float, float] = (0.9, 0.999)
    eps: float = 1e-8
    seed: int = 0
    validation_fraction: float = 0.1
    train_rooms: int | None = None

    def __post_init__(self):
        self.betas = tuple(self.betas)
        if self.epochs < 1 or self.batch_size < 1:
            raise InvalidArgumentError(f"epochs and batch_size must be positive, got {self.epochs}, {self.batch_size}")
        if not 0.0 <= self.validation_fraction < 1.0:
            raise InvalidArgumentError(f"validation_fraction must lie in [0, 1), got {self.validation_fraction}")
        if self.train_rooms is not None and self.train_rooms < 1:
            raise InvalidArgumentError(f"train_rooms must be positive, got {self.train_rooms}")

    def to_dict(self) -> dict[str, Any]:
        return dataclass_to_dict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "TrainConfig":
        return strict_from_dict(cls, data)

    @classmethod
    def preset(cls, name: Preset | str) -> "TrainConfig":
        name = Preset(name)
        if name == Preset.PAPER:
            return cls(epochs=20, batch_size=4096, lr=3e-4)
        if name == Preset.DESK:
            return cls()
        raise InvalidArgumentError(f"no training preset named {name.value!r}")


@dataclass
class EpochMetrics:
    epoch: int
    train_loss: float
    val_inlier_ratio: float
    n_train: int
    n_val: int


@dataclass
class PairTable:
    """Spectra of every clip of a set of rooms plus the (slot, i, j, class, tdoa, speed) of their pairs."""
    spectra: list[np.ndarray] = field(default_factory=list)
    rows: list[tuple[int, int, int, int, float, float]] = field(default_factory=list)
    excluded: int = 0

    def __post_init__(self):
        self._index = np.zeros((0, 3), dtype=np.int64)

    def __len__(self) -> int:
        return len(self.rows)

    def freeze(self) -> "PairTable":
        self._index = np.array([row[:3] for row in self.rows], dtype=np.int64).reshape(-1, 3)
        self.classes = np.array([row[3] for row in self.rows], dtype=np.int64)
        self.tdoa_s = np.array([row[4] for row in self.rows], dtype=np.float64)
        self.speed = np.array([row[5] for row in self.rows], dtype=np.float64)
        return self

    def features(self, rows: np.ndarray) -> np.ndarray:
        return np.stack([pair_features(self.spectra[s][a], self.spectra[s][b]) for s, a, b in self._index[rows]])


def _load_rooms(reader: DatasetReader, indices: list[int], config: ModelConfig, what: str) -> PairTable:
    table = PairTable()
    for index in tqdm(indices, desc=f"loading {what}", unit="room", leave=False,
                      disable=not log.isEnabledFor(logging.INFO)):
        recording = reader.read_room(index)
        clip = recording.clips[0]
        if len(clip) != config.input_len or clip.sample_rate_hz != config.sample_rate_hz:
            raise InvalidArgumentError(f"room {index} has {len(clip)} samples at {clip.sample_rate_hz} Hz, model "
                                       f"expects {config.input_len} at {config.sample_rate_hz} Hz")
        slot = len(table.spectra)
        table.spectra.append(np.stack([clip_spectrum(c, config.f_max_hz, config.frontend_norm)
                                       for c in recording.clips]).astype(config.dtype))
        for pair in reader.read_pairs(index, recording):
            class_id = tdoa_to_class(pair.tdoa_s, config.sample_rate_hz, config.num_classes)
            if class_id is None:
                table.excluded += 1
                continue
            table.rows.append((slot, pair.mic_i, pair.mic_j, class_id, pair.tdoa_s, pair.speed_of_sound))
    return table.freeze()


def split_rooms(indices: list[int], fraction: float, seed: int) -> tuple[list[int], list[int]]:
    """Hold out whole rooms; at least one room stays on each side when there are two or more."""
    if fraction <= 0 or len(indices) < 2:
        return list(indices), []
    order = np.random.default_rng(derive_seed(seed, _SPLIT_STREAM)).permutation(len(indices))
    n_val = min(max(int(round(fraction * len(indices))), 1), len(indices) - 1)
    held_out = sorted(indices[k] for k in order[:n_val])
    return sorted(set(indices) - set(held_out)), held_out


def validation_inlier_ratio(network: TdoaNetwork, table: PairTable, batch_size: int) -> float:
    if not len(table):
        return math.nan
    config = network.config
    hits = 0
    with no_grad():
        for start in range(0, len(table), batch_size):
            rows = np.arange(start, min(start + batch_size, len(table)))
            predicted = np.argmax(network(table.features(rows)).data, axis=1)
            for row, class_id in zip(rows, predicted):
                error = abs(class_to_tdoa(int(class_id), config.sample_rate_hz, config.num_classes)
                            - table.tdoa_s[row]) * table.speed[row]
                hits += error <= INLIER_THRESHOLD_M
    return hits / len(table)


def train(reader: DatasetReader, model_config: ModelConfig, train_config: TrainConfig,
          progress: bool = True) -> tuple[Checkpoint, list[EpochMetrics]]:
    """
    Mini-batch AdamW training on the labelled pairs of `reader`.

    Pairs whose label lies outside the class span are skipped. The run is a
    pure function of (dataset, configs): initialisation, room split and the
    per-epoch shuffles all draw from seeds derived from `train_config.seed`.
    Batch assembly for step n+1 runs on a worker thread while step n trains.
    """
    if reader.config.num_classes != model_config.num_classes:
        log.warning("dataset labels use %d classes, model has %d", reader.config.num_classes,
                    model_config.num_classes)
    indices = reader.indices
    if train_config.train_rooms is not None:
        indices = indices[:train_config.train_rooms]
    train_rooms, val_rooms = split_rooms(indices, train_config.validation_fraction, train_config.seed)
    train_table = _load_rooms(reader, train_rooms, model_config, "training rooms")
    val_table = _load_rooms(reader, val_rooms, model_config, "validation rooms")
    log.info("training on %d pairs from %d rooms, validating on %d pairs from %d rooms (%d pairs out of range)",
             len(train_table), len(train_rooms), len(val_table), len(val_rooms),
             train_table.excluded + val_table.excluded)
    if not len(train_table):
        raise TrainingError("no training pairs left after out-of-range exclusion")

    network = TdoaNetwork.from_seed(model_config, derive_seed(train_config.seed, _INIT_STREAM))
    optimizer = AdamW(network.params, lr=train_config.lr, betas=train_config.betas, eps=train_config.eps,
                      weight_decay=train_config.weight_decay)
    targets = train_table.classes
    batch_size = train_config.batch_size
    metrics = []

    with ThreadPoolExecutor(max_workers=1, thread_name_prefix="batches") as prefetch:
        for epoch in tqdm(range(1, train_config.epochs + 1), desc="epochs", unit="epoch", disable=not progress):
            started = time.perf_counter()
            order = np.random.default_rng(derive_seed(train_config.seed, _SHUFFLE_STREAM, epoch)).permutation(
                len(train_table))
            batches = [order[k:k + batch_size] for k in range(0, len(order), batch_size)]
            pending = prefetch.submit(train_table.features, batches[0])
            total_loss = 0.0
            for number, rows in enumerate(batches):
                features = pending.result()
                if number + 1 < len(batches):
                    pending = prefetch.submit(train_table.features, batches[number + 1])

                optimizer.zero_grad()
                loss = loss_ce_label_smoothing(network(features), targets[rows], train_config.label_smoothing)
                value = loss.item()
                if not math.isfinite(value):
                    raise TrainingError(f"loss is {value}", epoch=epoch, batch=number)
                loss.backward()
                try:
                    optimizer.step()
                except TrainingError as e:
                    raise TrainingError(str(e), epoch=epoch, batch=number) from None
                total_loss += value * len(rows)

            row = EpochMetrics(epoch, total_loss / len(train_table),
                               validation_inlier_ratio(network, val_table, batch_size),
                               len(train_table), len(val_table))
            metrics.append(row)
            log.info("epoch %d: train loss %.6f, validation inlier@%.2fm %.4f (%.1f s)", epoch, row.train_loss,
                     INLIER_THRESHOLD_M, row.val_inlier_ratio, time.perf_counter() - started)

    metadata = {
        "seed": train_config.seed,
        "epochs": train_config.epochs,
        "train_config": train_config.to_dict(),
        "dataset_manifest_hash": reader.manifest_hash,
        "dataset_config_hash": reader.config_hash,
        "dataset_master_seed": reader.master_seed,
        "train_rooms": len(train_rooms),
        "validation_rooms": len(val_rooms),
        "train_pairs": len(train_table),
        "validation_pairs": len(val_table),
        "excluded_pairs": train_table.excluded + val_table.excluded,
        "final_train_loss": metrics[-1].train_loss,
    }
    return Checkpoint.from_network(network, optimizer.state, metadata), metrics


def write_metrics_csv(metrics: list[EpochMetrics], path: str | os.PathLike):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(["epoch", "train_loss", "val_inlier_ratio", "n_train", "n_val"])
        for row in metrics:
            writer.writerow([row.epoch, f"{row.train_loss:.6g}", f"{row.val_inlier_ratio:.6g}", row.n_train, row.n_val])
