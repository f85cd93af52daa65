from tdoa_toolkit.acoustics.geometry import SPEED_OF_SOUND, tdoa_ground_truth, subcardioid_gain
from tdoa_toolkit.acoustics.image_source import ImageSourceSet, enumerate_image_sources, compute_rir
from tdoa_toolkit.acoustics.render import render_moving_source
from tdoa_toolkit.acoustics.reverb import reflection_to_t60, t60_to_reflection
from tdoa_toolkit.acoustics.room import RoomSpec, DirectivityPattern, SourcePath, ImageSource, bezier_point, \
    discretize_path

__all__ = [
    'SPEED_OF_SOUND',
    'RoomSpec',
    'DirectivityPattern',
    'SourcePath',
    'ImageSource',
    'ImageSourceSet',
    'bezier_point',
    'discretize_path',
    'tdoa_ground_truth',
    'enumerate_image_sources',
    'subcardioid_gain',
    'compute_rir',
    'render_moving_source',
    'reflection_to_t60',
    't60_to_reflection',
]
