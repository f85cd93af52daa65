import csv
import json

import numpy as np
import pytest

from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.cli import RunConfig, build_parser, main
from tdoa_toolkit.cli.main import EXIT_OK, EXIT_USAGE
from tdoa_toolkit.dataset import DatasetReader
from tdoa_toolkit.dsp.wav import write_wav, read_wav
from tdoa_toolkit.enums import Preset, SweepKind
from tdoa_toolkit.exceptions import ConfigError

FS = 16000


def _rows(path) -> list[dict[str, str]]:
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


@pytest.fixture
def shifted_wavs(tmp_path, rng):
    x = 0.1 * rng.standard_normal(8192)
    left, right = tmp_path / "left.wav", tmp_path / "right.wav"
    write_wav(AudioClip(np.roll(x, 5), FS), left)
    write_wav(AudioClip(x, FS), right)
    return left, right


class TestParser:

    def test_unset_flags_are_absent(self):
        args = build_parser().parse_args(["evaluate", "--dataset", "d", "--estimator", "gccphat", "--estimator",
                                          "oracle"])
        assert args.estimator == ["gccphat", "oracle"]
        assert not hasattr(args, "seed")
        assert not hasattr(args, "threads")

    def test_missing_subcommand(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])


class TestRunConfig:

    def test_file_then_flags(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"seed": 5, "rooms": 3, "kind": "t60"}))
        config = RunConfig.load(path, {"seed": 7})
        assert config.seed == 7
        assert config.rooms == 3
        assert config.kind == SweepKind.T60

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text(json.dumps({"colour": "red"}))
        with pytest.raises(ConfigError):
            RunConfig.load(path, {})

    def test_invalid_json(self, tmp_path):
        path = tmp_path / "run.json"
        path.write_text("{")
        with pytest.raises(ConfigError):
            RunConfig.load(path, {})

    def test_derived_configs(self):
        config = RunConfig(rooms=4, mics=3, no_movement=True, epochs=2, lr=0.01, seed=9)
        generation = config.generation_config()
        assert (generation.rooms, generation.mics, generation.movement) == (4, 3, False)
        assert generation.source_directivity
        training = config.train_config()
        assert (training.epochs, training.lr, training.seed) == (2, 0.01, 9)
        model = config.model_config(generation)
        assert model.input_len == generation.signal_len
        assert model.num_classes == generation.num_classes
        sweep = RunConfig(kind="t60", grid=[0.3], seed=4).sweep_config()
        assert (sweep.condition, sweep.grid, sweep.seed) == ("t60_s", (0.3,), 4)

    def test_large_preset(self):
        config = RunConfig(preset=Preset.PAPER)
        assert config.generation_config().rooms == 10000
        assert config.train_config().batch_size == 4096

    def test_hash_follows_values(self):
        assert RunConfig(seed=1).config_hash == RunConfig(seed=1).config_hash
        assert RunConfig(seed=1).config_hash != RunConfig(seed=2).config_hash


class TestCommands:

    def test_rir_csv(self, tmp_path):
        out = tmp_path / "rir.csv"
        code = main(["rir", "--dims", "6", "5", "4", "--reflection", "0.5", "--src", "1", "1", "1",
                     "--mic", "3", "1", "1", "--max-order", "0", "--rir-len", "256", "-o", str(out), "-q"])
        assert code == EXIT_OK
        rows = _rows(out)
        assert len(rows) == 256
        amplitudes = np.array([float(r["amplitude"]) for r in rows])
        assert int(np.argmax(amplitudes)) == 93

    def test_rir_wav_from_t60(self, tmp_path):
        out = tmp_path / "rir.wav"
        code = main(["rir", "--dims", "5", "5", "5", "--t60", "0.2", "--src", "1", "1", "1", "--mic", "3", "2", "2",
                     "--max-order", "3", "--rir-len", "1024", "--format", "wav", "-o", str(out), "-q"])
        assert code == EXIT_OK
        clip = read_wav(out)
        assert len(clip) == 1024
        assert clip.sample_rate_hz == FS

    def test_unreachable_t60_is_a_usage_error(self, tmp_path):
        code = main(["rir", "--dims", "5", "5", "5", "--t60", "0.01", "--src", "1", "1", "1", "--mic", "3", "2", "2",
                     "-o", str(tmp_path / "rir.csv"), "-q"])
        assert code == EXIT_USAGE

    def test_rir_needs_dims(self):
        assert main(["rir", "--reflection", "0.5", "--src", "1", "1", "1", "--mic", "2", "2", "2", "-q"]) == EXIT_USAGE

    def test_gccphat_windows(self, shifted_wavs, tmp_path):
        out = tmp_path / "tdoa.csv"
        left, right = shifted_wavs
        code = main(["gccphat", str(left), str(right), "--window", "2048", "--overlap", "0", "-o", str(out), "-q"])
        assert code == EXIT_OK
        rows = _rows(out)
        assert list(rows[0]) == ["window_start_s", "t_center_s", "lag_samples", "tdoa_s", "confidence"]
        assert len(rows) == 4
        assert [int(r["lag_samples"]) for r in rows] == [5, 5, 5, 5]
        assert float(rows[0]["t_center_s"]) == pytest.approx(1024 / FS)

    def test_infer_with_gccphat_estimator(self, shifted_wavs, tmp_path):
        out = tmp_path / "tdoa.csv"
        left, right = shifted_wavs
        code = main(["infer", str(left), str(right), "--estimator", "gccphat", "--window", "4096", "-o", str(out),
                     "-q"])
        assert code == EXIT_OK
        # hop round(4096 / 6) = 683 over 8192 samples
        assert len(_rows(out)) == (8192 - 4096) // 683 + 1

    @pytest.mark.parametrize("estimator", ["music", "oracle"])
    def test_infer_rejects_estimator(self, shifted_wavs, estimator):
        left, right = shifted_wavs
        assert main(["infer", str(left), str(right), "--estimator", estimator, "-q"]) == EXIT_USAGE

    def test_missing_wav(self, tmp_path, shifted_wavs):
        assert main(["gccphat", str(tmp_path / "nope.wav"), str(shifted_wavs[1]), "-q"]) == EXIT_USAGE

    def test_missing_dataset(self, tmp_path):
        code = main(["evaluate", "--dataset", str(tmp_path / "none"), "-o", str(tmp_path / "out"), "-q"])
        assert code == EXIT_USAGE

    def test_simulate_needs_a_sound_source(self, tmp_path):
        assert main(["simulate", "--dataset", str(tmp_path / "d"), "-q"]) == EXIT_USAGE

    def test_evaluate_oracle_on_dataset(self, tiny_dataset, tmp_path):
        out = tmp_path / "results"
        code = main(["evaluate", "--dataset", str(tiny_dataset), "--estimator", "oracle", "--estimator", "gccphat",
                     "-o", str(out), "--threads", "2", "-q"])
        assert code == EXIT_OK
        curve = _rows(out / "curve_oracle.csv")
        assert len(curve) == 26
        assert all(float(r["inlier_ratio"]) == 1.0 for r in curve)
        assert {r["dataset_hash"] for r in curve} == {DatasetReader(tiny_dataset).manifest_hash}
        assert (out / "curve_gccphat.csv").exists()
        assert len(_rows(out / "residuals_gccphat.csv")) == 200

    def test_benchmark(self, tmp_path):
        out = tmp_path / "bench.csv"
        code = main(["benchmark", "--estimator", "gccphat", "--pairs", "3", "--signal-len", "1024", "-o", str(out),
                     "-q"])
        assert code == EXIT_OK
        (row,) = _rows(out)
        assert row["estimator"] == "gccphat"
        assert row["n_pairs"] == "3"

    @pytest.mark.slow
    def test_simulate_then_evaluate(self, tmp_path):
        dataset = tmp_path / "data"
        code = main(["simulate", "--synthetic-sounds", "--rooms", "2", "--mics", "3", "--signal-len", "2048",
                     "--preroll", "256", "--seed", "3", "--dataset", str(dataset), "-q"])
        assert code == EXIT_OK
        reader = DatasetReader(dataset)
        assert len(reader) == 2
        assert reader.config.signal_len == 2048
        code = main(["evaluate", "--dataset", str(dataset), "--estimator", "oracle", "-o", str(tmp_path / "r"), "-q"])
        assert code == EXIT_OK

    @pytest.mark.slow
    def test_snr_sweep_command(self, tmp_path):
        code = main(["sweep", "--kind", "snr", "--grid", "0", "20", "--pairs-per-point", "2", "--estimator",
                     "oracle", "--signal-len", "2048", "--preroll", "256", "-o", str(tmp_path), "-q"])
        assert code == EXIT_OK
        rows = _rows(tmp_path / "sweep_snr.csv")
        assert [r["value"] for r in rows] == ["0", "20"]
        assert all(r["inlier_ratio"] == "1" for r in rows)


@pytest.mark.slow
def test_pipeline_is_byte_reproducible(tmp_path, monkeypatch):
    outputs = []
    for run in ("first", "second"):
        directory = tmp_path / run
        directory.mkdir()
        monkeypatch.chdir(directory)
        assert main(["simulate", "--synthetic-sounds", "--rooms", "2", "--mics", "3", "--signal-len", "2048",
                     "--preroll", "256", "--seed", "12", "--dataset", "data", "-q"]) == EXIT_OK
        assert main(["train", "--dataset", "data", "--checkpoint", "model.bin", "--epochs", "1", "--batch-size", "4",
                     "--seed", "12", "-q"]) == EXIT_OK
        assert main(["evaluate", "--dataset", "data", "--estimator", "model:model.bin", "--estimator", "gccphat",
                     "-o", "results", "-q"]) == EXIT_OK
        reports = [f"results/{kind}_{name}.csv" for kind in ("curve", "residuals")
                   for name in ("model_model.bin", "gccphat")]
        outputs.append({name: (directory / name).read_bytes()
                        for name in ["model.bin", "model.bin.metrics.csv", *reports]})
        outputs[-1]["manifest_hash"] = DatasetReader(directory / "data").manifest_hash.encode()
    assert outputs[0] == outputs[1]
