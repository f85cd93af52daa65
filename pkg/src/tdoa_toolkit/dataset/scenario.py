import logging
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from tdoa_toolkit.acoustics.geometry import random_unit_vector
from tdoa_toolkit.acoustics.render import render_moving_source, segment_images
from tdoa_toolkit.acoustics.room import RoomSpec, DirectivityPattern, SourcePath, bezier_point, discretize_path
from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.dataset.config import GenerationConfig
from tdoa_toolkit.dsp.noise import add_noise_at_snr
from tdoa_toolkit.enums import DirectivityKind
from tdoa_toolkit.exceptions import GenerationError, InvalidArgumentError
from tdoa_toolkit.utils import derive_seed, parallel_map

log = logging.getLogger(__name__)

# derive_seed stream ids below a scenario seed
_CROP_STREAM = 1
_NOISE_STREAM = 2
SOURCE_STREAM = 3


@dataclass
class ScenarioSpec:
    seed: int
    room: RoomSpec
    mic_positions: np.ndarray
    mic_directivities: list[DirectivityPattern]
    source_path: SourcePath
    source_directivity: DirectivityPattern
    snr_db: float
    signal_len: int
    preroll: int
    path_segments: int = 32
    max_order: int = 20
    rir_len: int = 4096

    def __post_init__(self):
        self.mic_positions = np.asarray(self.mic_positions, dtype=np.float64).reshape(-1, 3)
        if self.mic_positions.shape[0] != len(self.mic_directivities):
            raise InvalidArgumentError("one directivity pattern is needed per microphone")

    @property
    def n_mics(self) -> int:
        return self.mic_positions.shape[0]

    @property
    def midpoint_parameter(self) -> float:
        """Curve parameter at the middle of the recorded (post pre-roll) signal."""
        return (self.preroll + self.signal_len / 2) / (self.preroll + self.signal_len)

    @property
    def source_midpoint(self) -> np.ndarray:
        return bezier_point(self.source_path, self.midpoint_parameter)

    def to_dict(self) -> dict[str, Any]:
        return {
            "seed": self.seed,
            "room": self.room.to_dict(),
            "mic_positions": self.mic_positions.tolist(),
            "mic_directivities": [d.to_dict() for d in self.mic_directivities],
            "source_path": self.source_path.to_dict(),
            "source_directivity": self.source_directivity.to_dict(),
            "snr_db": self.snr_db,
            "signal_len": self.signal_len,
            "preroll": self.preroll,
            "path_segments": self.path_segments,
            "max_order": self.max_order,
            "rir_len": self.rir_len,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ScenarioSpec":
        data = dict(data)
        data["room"] = RoomSpec.from_dict(data["room"])
        data["mic_directivities"] = [DirectivityPattern.from_dict(d) for d in data["mic_directivities"]]
        data["source_path"] = SourcePath.from_dict(data["source_path"])
        data["source_directivity"] = DirectivityPattern.from_dict(data["source_directivity"])
        return cls(**data)


@dataclass
class RoomRecording:
    spec: ScenarioSpec
    clips: list[AudioClip]
    source_midpoint: np.ndarray
    index: int = 0
    source_label: str = field(default="")

    @property
    def sample_rate_hz(self) -> int:
        return self.spec.room.sample_rate_hz


def _pattern(rng: np.random.Generator, directional: bool) -> DirectivityPattern:
    if not directional:
        return DirectivityPattern.omni()
    return DirectivityPattern(DirectivityKind.SUBCARDIOID, random_unit_vector(rng))


def _sample_path(rng: np.random.Generator, low: np.ndarray, high: np.ndarray,
                 config: GenerationConfig) -> SourcePath:
    moving = config.movement and rng.random() < config.moving_probability
    if not moving:
        return SourcePath.stationary(rng.uniform(low, high), config.duration_s)

    p0, p1, p2 = (rng.uniform(low, high) for _ in range(3))
    path = SourcePath.bezier(p0, p1, p2, config.duration_s)
    if path.arc_length > config.max_path_length:
        # shrinking toward p0 keeps every control point inside the (convex) placement box
        scale = config.max_path_length / path.arc_length * (1.0 - 1e-9)
        path = SourcePath.bezier(p0, p0 + scale * (p1 - p0), p0 + scale * (p2 - p0), config.duration_s,
                                 max_speed=config.max_speed)
    return path


def sample_scenario(seed: int, config: GenerationConfig) -> ScenarioSpec:
    """Draw one scenario; a pure function of (seed, config)."""
    rng = np.random.default_rng(seed)
    margin = config.placement_margin

    for attempt in range(config.placement_attempts):
        dims = rng.uniform(*config.room_dim_range, size=3)
        if np.any(dims <= 2 * margin):
            continue
        room = RoomSpec(dims, rng.uniform(*config.reflection_range), config.speed_of_sound, config.sample_rate_hz)
        snr_db = float(rng.uniform(*config.snr_range_db))
        low, high = np.full(3, margin), dims - margin

        mic_positions = rng.uniform(low, high, size=(config.mics, 3))
        mic_directivities = [_pattern(rng, config.mic_directivity) for _ in range(config.mics)]
        source_directivity = _pattern(rng, config.source_directivity)
        path = _sample_path(rng, low, high, config)

        spec = ScenarioSpec(seed=int(seed), room=room, mic_positions=mic_positions,
                            mic_directivities=mic_directivities, source_path=path,
                            source_directivity=source_directivity, snr_db=snr_db, signal_len=config.signal_len,
                            preroll=config.preroll, path_segments=config.path_segments,
                            max_order=config.max_order, rir_len=config.rir_len)
        trajectory = np.vstack([discretize_path(path, config.path_segments), spec.source_midpoint])
        gaps = np.linalg.norm(trajectory[:, None, :] - mic_positions[None, :, :], axis=2)
        if gaps.min() >= config.min_source_distance:
            if attempt:
                log.debug("seed %d placed after %d attempts", seed, attempt + 1)
            return spec

    raise GenerationError(f"could not place {config.mics} microphones and a source with margin {margin} m "
                          f"after {config.placement_attempts} attempts", seed=seed)


def render_scenario(spec: ScenarioSpec, source_audio: AudioClip, threads: int | None = 1,
                    index: int = 0, source_label: str = "") -> RoomRecording:
    room = spec.room
    if source_audio.sample_rate_hz != room.sample_rate_hz:
        raise InvalidArgumentError(
            f"source audio is sampled at {source_audio.sample_rate_hz} Hz, scenario at {room.sample_rate_hz} Hz")
    need = spec.signal_len + spec.preroll
    if len(source_audio) < need:
        raise InvalidArgumentError(f"source audio has {len(source_audio)} samples, scenario needs {need}")

    crop_rng = np.random.default_rng(derive_seed(spec.seed, _CROP_STREAM))
    start = int(crop_rng.integers(0, len(source_audio) - need + 1))
    source = source_audio.crop(start, need)
    if source.power <= 0:
        raise GenerationError("source audio crop is silent", seed=spec.seed)

    images = segment_images(room, spec.source_path, spec.source_directivity, spec.path_segments, spec.max_order)

    def render_mic(mic: int) -> AudioClip:
        clean = render_moving_source(room, spec.source_path, source, spec.source_directivity,
                                     spec.mic_positions[mic], spec.mic_directivities[mic], spec.path_segments,
                                     spec.max_order, spec.preroll, spec.rir_len, images=images)
        if clean.power <= 0:
            raise GenerationError(f"microphone {mic} recorded silence", seed=spec.seed)
        noise_rng = np.random.default_rng(derive_seed(spec.seed, _NOISE_STREAM, mic))
        return add_noise_at_snr(clean, spec.snr_db, noise_rng)

    clips = list(parallel_map(render_mic, range(spec.n_mics), threads))
    return RoomRecording(spec=spec, clips=clips, source_midpoint=spec.source_midpoint, index=index,
                         source_label=source_label)
