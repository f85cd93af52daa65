import math

import numpy as np

from tdoa_toolkit.acoustics.room import RoomSpec
from tdoa_toolkit.exceptions import InvalidArgumentError, OutOfRangeError

SABINE_CONSTANT = 0.1611


def _volume_and_surface(dims) -> tuple[float, float]:
    x, y, z = np.asarray(dims, dtype=np.float64).reshape(3)
    if min(x, y, z) <= 0:
        raise InvalidArgumentError(f"room dimensions must be positive, got {dims}")
    return x * y * z, 2.0 * (x * y + y * z + x * z)


def reflection_to_t60(room: RoomSpec) -> float:
    """Sabine T60 with energy absorption 1 - r^2 on every wall."""
    volume, surface = _volume_and_surface(room.dims)
    absorption = 1.0 - room.reflection_coeff ** 2
    return SABINE_CONSTANT * volume / (surface * absorption)


def t60_to_reflection(dims, t60: float) -> float:
    if t60 <= 0:
        raise InvalidArgumentError(f"T60 must be positive, got {t60}")
    volume, surface = _volume_and_surface(dims)
    absorption = SABINE_CONSTANT * volume / (surface * t60)
    if absorption >= 1.0:
        raise OutOfRangeError(
            f"T60 of {t60} s is unreachable in a {volume:.2f} m^3 room (needs absorption {absorption:.3f} >= 1)")
    return math.sqrt(1.0 - absorption)
