"""
On-disk dataset layout::

    <root>/manifest.json
    <root>/rooms/00000.pcm
    <root>/rooms/00001.pcm
    ...

Each ``.pcm`` blob holds the clips of one room back to back, mic 0 first, as
little-endian signed 16-bit samples. Clip ``m`` is restored as
``q / 32767 * scales[m]`` where ``scales[m]`` is the clip's peak magnitude.

The manifest is canonical JSON::

    schema_version      int, currently 1
    master_seed         int
    config              GenerationConfig.to_dict()
    config_hash         sha256 of the canonical config JSON
    complete            false while rooms are still being appended
    pairs_total         labelled pairs over all rooms
    pairs_out_of_range  pairs whose label falls outside the class span
    out_of_range_ratio  pairs_out_of_range / pairs_total
    rooms               list sorted by index of
        index, seed, blob, sha256, n_mics, n_samples, scales, source_label,
        scenario (ScenarioSpec.to_dict()), source_midpoint,
        pairs: [[i, j, tdoa_s, class_id or null], ...]
"""
import hashlib
import json
import logging
import os
import threading
from pathlib import Path
from typing import Any, Iterator

import numpy as np

from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.dataset.config import GenerationConfig
from tdoa_toolkit.dataset.pairs import LabeledPair, enumerate_pairs
from tdoa_toolkit.dataset.scenario import RoomRecording, ScenarioSpec
from tdoa_toolkit.exceptions import (InvalidArgumentError, DatasetLoadError, SchemaVersionMismatch, TruncatedBlob,
                                    ChecksumMismatch)
from tdoa_toolkit.utils import canonical_json, content_hash

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
MANIFEST_NAME = "manifest.json"
ROOMS_DIR = "rooms"
PCM_FULL_SCALE = 32767
PCM_DTYPE = np.dtype("<i2")


def quantize(samples: np.ndarray) -> tuple[np.ndarray, float]:
    scale = float(np.max(np.abs(samples))) if samples.size else 0.0
    if scale == 0.0:
        return np.zeros(samples.shape, dtype=PCM_DTYPE), 0.0
    q = np.round(samples / scale * PCM_FULL_SCALE)
    return np.clip(q, -PCM_FULL_SCALE, PCM_FULL_SCALE).astype(PCM_DTYPE), scale


def dequantize(q: np.ndarray, scale: float) -> np.ndarray:
    return q.astype(np.float64) * (scale / PCM_FULL_SCALE)


def manifest_hash(manifest: dict[str, Any]) -> str:
    return content_hash(manifest)


def _room_entry(recording: RoomRecording, blob: str, digest: str, scales: list[float],
                pairs: list[LabeledPair]) -> dict[str, Any]:
    return {
        "index": recording.index,
        "seed": recording.spec.seed,
        "blob": blob,
        "sha256": digest,
        "n_mics": len(recording.clips),
        "n_samples": len(recording.clips[0]),
        "scales": scales,
        "source_label": recording.source_label,
        "scenario": recording.spec.to_dict(),
        "source_midpoint": np.asarray(recording.source_midpoint, dtype=np.float64).tolist(),
        "pairs": [[p.mic_i, p.mic_j, p.tdoa_s, p.class_id] for p in pairs],
    }


class DatasetWriter:
    """
    Appends rooms to a dataset directory. Appends may come from several threads
    and in any order; the manifest lists rooms sorted by index, so its hash only
    depends on what was written.

    Used as a context manager the manifest is flushed on exit and marked
    complete only when the block finished without an exception.
    """

    def __init__(self, root: str | os.PathLike, config: GenerationConfig, master_seed: int):
        self.root = Path(root)
        self.config = config
        self.master_seed = int(master_seed)
        self._rooms: dict[int, dict[str, Any]] = {}
        self._claimed: set[int] = set()
        self._pairs_total = 0
        self._pairs_out_of_range = 0
        self._lock = threading.Lock()
        (self.root / ROOMS_DIR).mkdir(parents=True, exist_ok=True)

    def append(self, recording: RoomRecording) -> dict[str, Any]:
        clips = recording.clips
        if any(len(c) != len(clips[0]) or c.sample_rate_hz != clips[0].sample_rate_hz for c in clips):
            raise InvalidArgumentError(f"room {recording.index}: clips differ in length or sample rate")
        with self._lock:
            if recording.index in self._claimed:
                raise InvalidArgumentError(f"room {recording.index} was already written")
            self._claimed.add(recording.index)

        quantized = [quantize(c.samples) for c in clips]
        payload = b"".join(q.tobytes() for q, _ in quantized)
        blob = f"{ROOMS_DIR}/{recording.index:05d}.pcm"
        (self.root / blob).write_bytes(payload)

        pairs = enumerate_pairs(recording, self.config.num_classes)
        entry = _room_entry(recording, blob, hashlib.sha256(payload).hexdigest(), [s for _, s in quantized], pairs)
        out_of_range = sum(1 for p in pairs if not p.in_range)
        with self._lock:
            self._rooms[recording.index] = entry
            self._pairs_total += len(pairs)
            self._pairs_out_of_range += out_of_range
        log.debug("wrote room %d (%d bytes, %d/%d pairs out of range)",
                  recording.index, len(payload), out_of_range, len(pairs))
        return entry

    def manifest(self, complete: bool) -> dict[str, Any]:
        with self._lock:
            rooms = [self._rooms[index] for index in sorted(self._rooms)]
            total, out_of_range = self._pairs_total, self._pairs_out_of_range
        return {
            "schema_version": SCHEMA_VERSION,
            "master_seed": self.master_seed,
            "config": self.config.to_dict(),
            "config_hash": self.config.config_hash,
            "complete": complete,
            "pairs_total": total,
            "pairs_out_of_range": out_of_range,
            "out_of_range_ratio": out_of_range / total if total else 0.0,
            "rooms": rooms,
        }

    def close(self, complete: bool = True) -> dict[str, Any]:
        manifest = self.manifest(complete)
        tmp = self.root / (MANIFEST_NAME + ".tmp")
        tmp.write_text(canonical_json(manifest))
        tmp.replace(self.root / MANIFEST_NAME)
        log.info("manifest written to %s (%d rooms, %.2f%% pairs out of range)",
                 self.root / MANIFEST_NAME, len(manifest["rooms"]), 100 * manifest["out_of_range_ratio"])
        return manifest

    def __enter__(self) -> "DatasetWriter":
        return self

    def __exit__(self, exc_type, exc_val, exc_tb):
        self.close(complete=exc_type is None)


class DatasetReader:
    """Read-only view of a dataset directory; rooms are decoded one at a time on demand."""

    def __init__(self, root: str | os.PathLike):
        self.root = Path(root)
        path = self.root / MANIFEST_NAME
        if not path.is_file():
            raise DatasetLoadError(f"no {MANIFEST_NAME} in {self.root}")
        try:
            self.manifest = json.loads(path.read_text())
        except (json.JSONDecodeError, UnicodeDecodeError) as e:
            raise DatasetLoadError(f"{path} is not valid JSON: {e}") from None

        version = self.manifest.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionMismatch(f"{path} has schema version {version}, this reader supports {SCHEMA_VERSION}")
        self.config = GenerationConfig.from_dict(self.manifest["config"])
        self._by_index = {entry["index"]: entry for entry in self.manifest["rooms"]}
        if not self.manifest.get("complete", False):
            log.warning("dataset %s is marked incomplete", self.root)

    @property
    def master_seed(self) -> int:
        return self.manifest["master_seed"]

    @property
    def config_hash(self) -> str:
        return self.manifest["config_hash"]

    @property
    def manifest_hash(self) -> str:
        return manifest_hash(self.manifest)

    @property
    def complete(self) -> bool:
        return bool(self.manifest.get("complete"))

    @property
    def indices(self) -> list[int]:
        return sorted(self._by_index)

    def __len__(self) -> int:
        return len(self._by_index)

    def _entry(self, index: int) -> dict[str, Any]:
        try:
            return self._by_index[index]
        except KeyError:
            raise DatasetLoadError(f"dataset {self.root} has no room {index}") from None

    def read_room(self, index: int) -> RoomRecording:
        entry = self._entry(index)
        blob = self.root / entry["blob"]
        n_mics, n_samples = entry["n_mics"], entry["n_samples"]
        expected = n_mics * n_samples * PCM_DTYPE.itemsize
        try:
            payload = blob.read_bytes()
        except FileNotFoundError:
            raise TruncatedBlob(f"blob {blob} is missing") from None
        if len(payload) != expected:
            raise TruncatedBlob(f"blob {blob} holds {len(payload)} bytes, manifest promises {expected}")
        if hashlib.sha256(payload).hexdigest() != entry["sha256"]:
            raise ChecksumMismatch(f"blob {blob} does not match its sha256 in the manifest")

        spec = ScenarioSpec.from_dict(entry["scenario"])
        fs = spec.room.sample_rate_hz
        q = np.frombuffer(payload, dtype=PCM_DTYPE).reshape(n_mics, n_samples)
        clips = [AudioClip(dequantize(q[m], scale), fs) for m, scale in enumerate(entry["scales"])]
        return RoomRecording(spec=spec, clips=clips, source_midpoint=np.asarray(entry["source_midpoint"]),
                             index=entry["index"], source_label=entry["source_label"])

    def read_pairs(self, index: int, recording: RoomRecording | None = None) -> list[LabeledPair]:
        """Labelled pairs of one room using the labels stored in the manifest."""
        entry = self._entry(index)
        recording = recording or self.read_room(index)
        positions = recording.spec.mic_positions
        speed = recording.spec.room.speed_of_sound
        return [LabeledPair(mic_i=i, mic_j=j, clip_i=recording.clips[i], clip_j=recording.clips[j],
                            tdoa_s=tdoa, class_id=class_id,
                            mic_distance_m=float(np.linalg.norm(positions[i] - positions[j])),
                            speed_of_sound=speed, room_index=index)
                for i, j, tdoa, class_id in entry["pairs"]]

    def __iter__(self) -> Iterator[RoomRecording]:
        for index in self.indices:
            yield self.read_room(index)

    def iter_pairs(self, indices: list[int] | None = None) -> Iterator[LabeledPair]:
        for index in self.indices if indices is None else indices:
            yield from self.read_pairs(index)


def write_dataset(recordings, root: str | os.PathLike, config: GenerationConfig, master_seed: int) -> dict[str, Any]:
    with DatasetWriter(root, config, master_seed) as writer:
        for recording in recordings:
            writer.append(recording)
    return writer.manifest(complete=True)


def read_dataset(root: str | os.PathLike) -> Iterator[RoomRecording]:
    return iter(DatasetReader(root))
