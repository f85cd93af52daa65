from dataclasses import dataclass, replace
from itertools import combinations

import numpy as np

from tdoa_toolkit.acoustics.geometry import tdoa_ground_truth
from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.exceptions import InvalidArgumentError

NUM_CLASSES = 1000


@dataclass(frozen=True, eq=False)
class LabeledPair:
    mic_i: int
    mic_j: int
    clip_i: AudioClip
    clip_j: AudioClip
    tdoa_s: float
    class_id: int | None
    mic_distance_m: float
    speed_of_sound: float
    room_index: int = 0

    @property
    def sample_rate_hz(self) -> int:
        return self.clip_i.sample_rate_hz

    @property
    def lag_samples(self) -> float:
        return self.tdoa_s * self.sample_rate_hz

    @property
    def in_range(self) -> bool:
        return self.class_id is not None

    def swapped(self, num_classes: int = NUM_CLASSES) -> "LabeledPair":
        return replace(self, mic_i=self.mic_j, mic_j=self.mic_i, clip_i=self.clip_j, clip_j=self.clip_i,
                       tdoa_s=-self.tdoa_s,
                       class_id=tdoa_to_class(-self.tdoa_s, self.sample_rate_hz, num_classes))


def _check_num_classes(num_classes: int):
    if num_classes <= 0 or num_classes % 2:
        raise InvalidArgumentError(f"num_classes must be a positive even number, got {num_classes}")


def tdoa_to_class(tdoa_s: float, sample_rate_hz: int, num_classes: int = NUM_CLASSES) -> int | None:
    """Class of a one-sample-wide bin centred on an integer lag; None when the lag falls outside the span."""
    _check_num_classes(num_classes)
    class_id = int(np.round(tdoa_s * sample_rate_hz)) + num_classes // 2
    return class_id if 0 <= class_id < num_classes else None


def class_to_tdoa(class_id: int, sample_rate_hz: int, num_classes: int = NUM_CLASSES) -> float:
    _check_num_classes(num_classes)
    if not 0 <= class_id < num_classes:
        raise InvalidArgumentError(f"class id {class_id} is outside [0, {num_classes})")
    return (class_id - num_classes // 2) / sample_rate_hz


def enumerate_pairs(recording, num_classes: int = NUM_CLASSES) -> list[LabeledPair]:
    """Every unordered microphone pair (i < j) of a RoomRecording, labelled at the source midpoint."""
    spec = recording.spec
    if len(recording.clips) < 2:
        raise InvalidArgumentError(f"a recording needs at least 2 microphones, got {len(recording.clips)}")

    speed = spec.room.speed_of_sound
    fs = spec.room.sample_rate_hz
    midpoint = recording.source_midpoint
    pairs = []
    for i, j in combinations(range(len(recording.clips)), 2):
        r_i, r_j = spec.mic_positions[i], spec.mic_positions[j]
        tdoa = tdoa_ground_truth(r_i, r_j, midpoint, speed)
        pairs.append(LabeledPair(
            mic_i=i, mic_j=j, clip_i=recording.clips[i], clip_j=recording.clips[j], tdoa_s=tdoa,
            class_id=tdoa_to_class(tdoa, fs, num_classes), mic_distance_m=float(np.linalg.norm(r_i - r_j)),
            speed_of_sound=speed, room_index=recording.index,
        ))
    return pairs
