from tdoa_toolkit.dataset.config import GenerationConfig
from tdoa_toolkit.dataset.container import DatasetWriter, DatasetReader, write_dataset, read_dataset, manifest_hash
from tdoa_toolkit.dataset.generate import generate_dataset, iter_rooms, simulate_room
from tdoa_toolkit.dataset.pairs import LabeledPair, enumerate_pairs, tdoa_to_class, class_to_tdoa, NUM_CLASSES
from tdoa_toolkit.dataset.scenario import ScenarioSpec, RoomRecording, sample_scenario, render_scenario
from tdoa_toolkit.dataset.sounds import SoundPool, SyntheticPool, WavDirectoryPool

__all__ = [
    'GenerationConfig',
    'ScenarioSpec',
    'RoomRecording',
    'LabeledPair',
    'NUM_CLASSES',
    'sample_scenario',
    'render_scenario',
    'enumerate_pairs',
    'tdoa_to_class',
    'class_to_tdoa',
    'DatasetWriter',
    'DatasetReader',
    'write_dataset',
    'read_dataset',
    'manifest_hash',
    'generate_dataset',
    'iter_rooms',
    'simulate_room',
    'SoundPool',
    'SyntheticPool',
    'WavDirectoryPool',
]
