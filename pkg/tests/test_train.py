import csv
import math

import numpy as np
import pytest

from tdoa_toolkit.dataset import DatasetReader
from tdoa_toolkit.exceptions import InvalidArgumentError
from tdoa_toolkit.neural import ModelConfig, TrainConfig, train, write_metrics_csv, init_params, load_checkpoint, \
    save_checkpoint
from tdoa_toolkit.neural.train import split_rooms
from tdoa_toolkit.utils import derive_seed


@pytest.fixture
def model_config() -> ModelConfig:
    return ModelConfig(f_max_hz=4000.0, input_len=256, conv_layers=((4, 8, 5, 4), (8, 8, 3, 2)), hidden_width=16,
                       num_blocks=1)


@pytest.fixture
def reader(tiny_dataset) -> DatasetReader:
    return DatasetReader(tiny_dataset)


def test_zero_learning_rate_keeps_the_initialisation(reader, model_config):
    checkpoint, _ = train(reader, model_config, TrainConfig(epochs=1, batch_size=4, lr=0.0, seed=3), progress=False)
    initial = init_params(model_config, derive_seed(3, 1))
    for name, array in checkpoint.params.items():
        np.testing.assert_array_equal(array, initial[name].data)


def test_same_seed_same_checkpoint(reader, model_config, tmp_path):
    config = TrainConfig(epochs=2, batch_size=4, seed=11)
    first, metrics_a = train(reader, model_config, config, progress=False)
    second, metrics_b = train(reader, model_config, config, progress=False)
    assert first.to_bytes() == second.to_bytes()
    assert metrics_a == metrics_b

    save_checkpoint(first, tmp_path / "model.bin")
    assert load_checkpoint(tmp_path / "model.bin").to_bytes() == first.to_bytes()


def test_different_seed_different_checkpoint(reader, model_config):
    a, _ = train(reader, model_config, TrainConfig(epochs=1, batch_size=4, seed=1), progress=False)
    b, _ = train(reader, model_config, TrainConfig(epochs=1, batch_size=4, seed=2), progress=False)
    assert a.to_bytes() != b.to_bytes()


def test_metrics_and_metadata(reader, model_config, tmp_path):
    checkpoint, metrics = train(reader, model_config, TrainConfig(epochs=3, batch_size=4), progress=False)
    assert [m.epoch for m in metrics] == [1, 2, 3]
    assert all(math.isfinite(m.train_loss) for m in metrics)
    assert all(m.n_train + m.n_val == 9 for m in metrics)
    assert all(0.0 <= m.val_inlier_ratio <= 1.0 for m in metrics)

    metadata = checkpoint.metadata
    assert metadata["dataset_manifest_hash"] == reader.manifest_hash
    assert metadata["train_rooms"] + metadata["validation_rooms"] == 3
    assert metadata["excluded_pairs"] == 0
    assert checkpoint.optimizer.step == 3 * math.ceil(metadata["train_pairs"] / 4)

    path = tmp_path / "metrics.csv"
    write_metrics_csv(metrics, path)
    with open(path, newline="") as f:
        rows = list(csv.DictReader(f))
    assert list(rows[0]) == ["epoch", "train_loss", "val_inlier_ratio", "n_train", "n_val"]
    assert [int(r["epoch"]) for r in rows] == [1, 2, 3]


def test_limit_training_rooms(reader, model_config):
    checkpoint, metrics = train(reader, model_config,
                                TrainConfig(epochs=1, batch_size=4, validation_fraction=0.0, train_rooms=1),
                                progress=False)
    assert checkpoint.metadata["train_rooms"] == 1
    assert metrics[0].n_train == 3
    assert metrics[0].n_val == 0
    assert math.isnan(metrics[0].val_inlier_ratio)


def test_input_length_must_match(reader):
    config = ModelConfig(f_max_hz=4000.0, input_len=512, conv_layers=((4, 8, 5, 4),), hidden_width=8, num_blocks=0)
    with pytest.raises(InvalidArgumentError):
        train(reader, config, TrainConfig(epochs=1), progress=False)


class TestSplitRooms:

    def test_disjoint_and_complete(self):
        train_rooms, val_rooms = split_rooms(list(range(20)), 0.25, seed=4)
        assert len(val_rooms) == 5
        assert sorted(train_rooms + val_rooms) == list(range(20))
        assert split_rooms(list(range(20)), 0.25, seed=4) == (train_rooms, val_rooms)

    def test_keeps_one_room_each_side(self):
        train_rooms, val_rooms = split_rooms([0, 1], 0.9, seed=0)
        assert len(train_rooms) == len(val_rooms) == 1

    @pytest.mark.parametrize("indices, fraction", [([0, 1, 2], 0.0), ([5], 0.5)])
    def test_nothing_held_out(self, indices, fraction):
        assert split_rooms(indices, fraction, seed=0) == (indices, [])


@pytest.mark.parametrize("changes", [{"epochs": 0}, {"batch_size": 0}, {"validation_fraction": 1.0},
                                     {"train_rooms": 0}])
def test_invalid_train_config(changes):
    with pytest.raises(InvalidArgumentError):
        TrainConfig(**changes)
