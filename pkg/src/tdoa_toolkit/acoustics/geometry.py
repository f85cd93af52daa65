import numpy as np

from tdoa_toolkit.exceptions import InvalidArgumentError

SPEED_OF_SOUND = 343.0
UNIT_TOLERANCE = 1e-6


def as_point(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64).reshape(-1)
    if p.shape != (3,) or not np.all(np.isfinite(p)):
        raise InvalidArgumentError(f"expected a finite 3-vector, got {p}")
    return p


def tdoa_ground_truth(r_i, r_j, s, speed: float = SPEED_OF_SOUND) -> float:
    """Direct-path TDOA in seconds; positive when the source is farther from r_i than from r_j."""
    if speed <= 0:
        raise InvalidArgumentError(f"propagation speed must be positive, got {speed}")
    s = as_point(s)
    return float((np.linalg.norm(as_point(r_i) - s) - np.linalg.norm(as_point(r_j) - s)) / speed)


def subcardioid_gain(orientation, direction) -> float:
    orientation, direction = as_point(orientation), as_point(direction)
    for name, v in (("orientation", orientation), ("direction", direction)):
        if abs(np.linalg.norm(v) - 1.0) > UNIT_TOLERANCE:
            raise InvalidArgumentError(f"{name} must be a unit vector, norm is {np.linalg.norm(v)}")
    return float(0.75 + 0.25 * np.clip(orientation @ direction, -1.0, 1.0))


def subcardioid_gains(orientations: np.ndarray, directions: np.ndarray) -> np.ndarray:
    """Row-wise gain for already-normalised (n, 3) arrays; no validation."""
    cosines = np.einsum("ij,ij->i", np.broadcast_to(orientations, directions.shape), directions)
    return 0.75 + 0.25 * np.clip(cosines, -1.0, 1.0)


def random_unit_vector(rng: np.random.Generator) -> np.ndarray:
    while True:
        v = rng.standard_normal(3)
        norm = np.linalg.norm(v)
        if norm > 1e-12:
            return v / norm
