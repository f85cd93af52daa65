from dataclasses import dataclass, field
from typing import Any

import numpy as np

from tdoa_toolkit.acoustics.geometry import SPEED_OF_SOUND, as_point, subcardioid_gains
from tdoa_toolkit.enums import DirectivityKind, PathKind
from tdoa_toolkit.exceptions import InvalidArgumentError

PLACEMENT_MARGIN = 0.3
ARC_LENGTH_STEPS = 256


@dataclass
class RoomSpec:
    dims: np.ndarray
    reflection_coeff: float
    speed_of_sound: float = SPEED_OF_SOUND
    sample_rate_hz: int = 16000

    def __post_init__(self):
        self.dims = as_point(self.dims)
        if np.any(self.dims <= 0):
            raise InvalidArgumentError(f"room dimensions must be positive, got {self.dims}")
        if not 0.0 < self.reflection_coeff < 1.0:
            raise InvalidArgumentError(f"reflection coefficient must lie in (0, 1), got {self.reflection_coeff}")
        if self.speed_of_sound <= 0:
            raise InvalidArgumentError(f"speed of sound must be positive, got {self.speed_of_sound}")
        if self.sample_rate_hz <= 0:
            raise InvalidArgumentError(f"sample rate must be positive, got {self.sample_rate_hz}")
        self.reflection_coeff = float(self.reflection_coeff)
        self.sample_rate_hz = int(self.sample_rate_hz)

    @property
    def volume(self) -> float:
        return float(np.prod(self.dims))

    @property
    def surface_area(self) -> float:
        x, y, z = self.dims
        return float(2.0 * (x * y + y * z + x * z))

    def contains(self, point, margin: float = 0.0) -> bool:
        point = as_point(point)
        return bool(np.all(point > margin) and np.all(point < self.dims - margin))

    def require_inside(self, point, what: str = "point", margin: float = 0.0):
        if not self.contains(point, margin):
            raise InvalidArgumentError(f"{what} {np.asarray(point).tolist()} is not strictly inside room "
                                       f"{self.dims.tolist()} (margin {margin} m)")

    def to_dict(self) -> dict[str, Any]:
        return {"dims": self.dims.tolist(), "reflection_coeff": self.reflection_coeff,
                "speed_of_sound": self.speed_of_sound, "sample_rate_hz": self.sample_rate_hz}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RoomSpec":
        return cls(**data)


@dataclass
class DirectivityPattern:
    kind: DirectivityKind | str = DirectivityKind.OMNIDIRECTIONAL
    orientation: np.ndarray = field(default_factory=lambda: np.array([1.0, 0.0, 0.0]))

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = DirectivityKind(self.kind)
        self.orientation = as_point(self.orientation)
        if self.kind == DirectivityKind.SUBCARDIOID and abs(np.linalg.norm(self.orientation) - 1.0) > 1e-9:
            raise InvalidArgumentError(f"subcardioid orientation must have unit norm, got {self.orientation}")

    @property
    def is_directional(self) -> bool:
        return self.kind == DirectivityKind.SUBCARDIOID

    def gains(self, directions: np.ndarray, orientations: np.ndarray | None = None) -> np.ndarray:
        """Gains toward unit `directions` (n, 3); `orientations` overrides the pattern's own, row-wise."""
        if not self.is_directional:
            return np.ones(directions.shape[0])
        return subcardioid_gains(self.orientation if orientations is None else orientations, directions)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "orientation": self.orientation.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "DirectivityPattern":
        return cls(**data)

    @classmethod
    def omni(cls) -> "DirectivityPattern":
        return cls(DirectivityKind.OMNIDIRECTIONAL)


@dataclass
class SourcePath:
    kind: PathKind | str
    points: np.ndarray
    duration_s: float

    def __post_init__(self):
        if isinstance(self.kind, str):
            self.kind = PathKind(self.kind)
        self.points = np.asarray(self.points, dtype=np.float64).reshape(-1, 3)
        expected = 1 if self.kind == PathKind.STATIONARY else 3
        if self.points.shape[0] != expected:
            raise InvalidArgumentError(f"{self.kind.value} path needs {expected} points, got {self.points.shape[0]}")
        if self.duration_s <= 0:
            raise InvalidArgumentError(f"path duration must be positive, got {self.duration_s}")
        self.duration_s = float(self.duration_s)

    @classmethod
    def stationary(cls, point, duration_s: float) -> "SourcePath":
        return cls(PathKind.STATIONARY, [as_point(point)], duration_s)

    @classmethod
    def bezier(cls, p0, p1, p2, duration_s: float, max_speed: float | None = None) -> "SourcePath":
        path = cls(PathKind.BEZIER, [as_point(p0), as_point(p1), as_point(p2)], duration_s)
        if max_speed is not None and path.mean_speed > max_speed + 1e-12:
            raise InvalidArgumentError(f"path speed {path.mean_speed:.3f} m/s exceeds {max_speed} m/s")
        return path

    @property
    def is_moving(self) -> bool:
        return self.kind == PathKind.BEZIER

    @property
    def arc_length(self) -> float:
        if not self.is_moving:
            return 0.0
        u = np.linspace(0.0, 1.0, ARC_LENGTH_STEPS + 1)
        return float(np.sum(np.linalg.norm(np.diff(_bezier(self.points, u), axis=0), axis=1)))

    @property
    def mean_speed(self) -> float:
        return self.arc_length / self.duration_s

    def require_inside(self, room: RoomSpec, margin: float = 0.0):
        for index, point in enumerate(self.points):
            room.require_inside(point, f"path control point {index}", margin)

    def to_dict(self) -> dict[str, Any]:
        return {"kind": self.kind.value, "points": self.points.tolist(), "duration_s": self.duration_s}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "SourcePath":
        return cls(**data)


@dataclass(frozen=True)
class ImageSource:
    position: np.ndarray
    generation: int
    mirrored_orientation: np.ndarray
    amplitude_factor: float


def _bezier(points: np.ndarray, u: np.ndarray) -> np.ndarray:
    u = u[:, None]
    p0, p1, p2 = points
    return (1 - u) ** 2 * p0 + 2 * (1 - u) * u * p1 + u ** 2 * p2


def bezier_point(path: SourcePath, u: float) -> np.ndarray:
    if not 0.0 <= u <= 1.0:
        raise InvalidArgumentError(f"curve parameter must lie in [0, 1], got {u}")
    if not path.is_moving:
        return path.points[0].copy()
    return _bezier(path.points, np.array([u], dtype=np.float64))[0]


def discretize_path(path: SourcePath, k: int) -> np.ndarray:
    """k positions s(t_i), t_i = (i - 1) / (k - 1) * T; a single position s(0) when k == 1."""
    if k <= 0:
        raise InvalidArgumentError(f"number of path points must be positive, got {k}")
    if not path.is_moving:
        return np.repeat(path.points[:1], k, axis=0)
    if k == 1:
        return path.points[:1].copy()
    return _bezier(path.points, np.linspace(0.0, 1.0, k))
