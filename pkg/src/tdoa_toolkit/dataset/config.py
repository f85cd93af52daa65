from dataclasses import dataclass, replace
from typing import Any

from tdoa_toolkit.acoustics.geometry import SPEED_OF_SOUND
from tdoa_toolkit.acoustics.image_source import MAX_ORDER, RIR_LENGTH
from tdoa_toolkit.acoustics.render import PATH_SEGMENTS
from tdoa_toolkit.acoustics.room import PLACEMENT_MARGIN
from tdoa_toolkit.enums import Preset
from tdoa_toolkit.exceptions import InvalidArgumentError
from tdoa_toolkit.utils import strict_from_dict, dataclass_to_dict, content_hash


@dataclass
class GenerationConfig:
    rooms: int = 200
    mics: int = 20
    sample_rate_hz: int = 16000
    signal_len: int = 10000
    preroll: int = 2000
    room_dim_range: tuple[float, float] = (1.0, 10.0)
    reflection_range: tuple[float, float] = (0.05, 0.99)
    snr_range_db: tuple[float, float] = (0.0, 30.0)
    moving_probability: float = 0.5
    max_speed: float = 5.0
    path_segments: int = PATH_SEGMENTS
    max_order: int = MAX_ORDER
    rir_len: int = RIR_LENGTH
    placement_margin: float = PLACEMENT_MARGIN
    min_source_distance: float = 0.1
    placement_attempts: int = 100
    speed_of_sound: float = SPEED_OF_SOUND
    num_classes: int = 1000
    movement: bool = True
    source_directivity: bool = True
    mic_directivity: bool = True

    def __post_init__(self):
        self.room_dim_range = tuple(self.room_dim_range)
        self.reflection_range = tuple(self.reflection_range)
        self.snr_range_db = tuple(self.snr_range_db)
        if self.mics < 2:
            raise InvalidArgumentError(f"a scenario needs at least 2 microphones, got {self.mics}")
        if self.rooms < 1:
            raise InvalidArgumentError(f"at least one room is required, got {self.rooms}")
        if self.num_classes % 2:
            raise InvalidArgumentError(f"num_classes must be even, got {self.num_classes}")
        if not 0.0 <= self.moving_probability <= 1.0:
            raise InvalidArgumentError(f"moving_probability must lie in [0, 1], got {self.moving_probability}")
        low, high = self.reflection_range
        if not 0.0 < low <= high < 1.0:
            raise InvalidArgumentError(f"reflection range must lie inside (0, 1), got {self.reflection_range}")

    @property
    def total_len(self) -> int:
        return self.signal_len + self.preroll

    @property
    def duration_s(self) -> float:
        return self.total_len / self.sample_rate_hz

    @property
    def max_path_length(self) -> float:
        return self.max_speed * self.duration_s

    def ablation(self, movement: bool | None = None, directivity: bool | None = None) -> "GenerationConfig":
        changes = {}
        if movement is not None:
            changes["movement"] = movement
        if directivity is not None:
            changes["source_directivity"] = changes["mic_directivity"] = directivity
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return dataclass_to_dict(self)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "GenerationConfig":
        return strict_from_dict(cls, data)

    @property
    def config_hash(self) -> str:
        return content_hash(self.to_dict())

    @classmethod
    def preset(cls, name: Preset | str) -> "GenerationConfig":
        name = Preset(name)
        if name == Preset.PAPER:
            return cls(rooms=10000, mics=50)
        if name == Preset.DESK:
            return cls(rooms=200, mics=20)
        raise InvalidArgumentError(f"no generation preset named {name.value!r}")
