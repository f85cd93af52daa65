import argparse
import csv
import logging
import sys
from dataclasses import replace
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np

from tdoa_toolkit.acoustics.image_source import compute_rir, enumerate_image_sources
from tdoa_toolkit.acoustics.reverb import t60_to_reflection
from tdoa_toolkit.acoustics.room import RoomSpec, DirectivityPattern
from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.base import AbstractEstimator
from tdoa_toolkit.cli.config import RunConfig
from tdoa_toolkit.dataset.container import DatasetReader
from tdoa_toolkit.dataset.generate import generate_dataset
from tdoa_toolkit.dataset.sounds import SyntheticPool, WavDirectoryPool
from tdoa_toolkit.dsp.filters import resample
from tdoa_toolkit.dsp.wav import SampleFormat, read_wav, write_wav
from tdoa_toolkit.enums import DirectivityKind, Preset, FrontendNorm, SweepKind, EstimatorKind
from tdoa_toolkit.estimators import build_estimator
from tdoa_toolkit.evaluation.benchmark import benchmark, shifted_noise_pairs
from tdoa_toolkit.evaluation.harness import evaluate_dataset
from tdoa_toolkit.evaluation.report import write_report_csv, write_histogram_csv, safe_filename
from tdoa_toolkit.evaluation.sweeps import run_sweep
from tdoa_toolkit.evaluation.windowing import sliding_window_infer
from tdoa_toolkit.exceptions import TdoaToolkitError, InvalidArgumentError, FormatError, DatasetLoadError
from tdoa_toolkit.neural.checkpoint import save_checkpoint
from tdoa_toolkit.neural.predict import NeuralEstimator
from tdoa_toolkit.neural.train import train, write_metrics_csv

log = logging.getLogger("tdoa_toolkit.cli")

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_FAILURE = 3
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s: %(message)s"
DEFAULT_WINDOW = 10000


def setup_logging(quiet: bool, verbose: bool):
    level = logging.DEBUG if verbose else logging.WARNING if quiet else logging.INFO
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter(LOG_FORMAT))
    root = logging.getLogger("tdoa_toolkit")
    root.handlers[:] = [handler]
    root.setLevel(level)
    root.propagate = False


def _require(value, flag: str):
    if value is None:
        raise InvalidArgumentError(f"{flag} is required")
    return value


def _open_output(path: str | None):
    return open(path, "w", newline="") if path else _StdoutCsv()


class _StdoutCsv:
    def __enter__(self):
        return sys.stdout

    def __exit__(self, *exc):
        sys.stdout.flush()


def command_simulate(config: RunConfig, args: argparse.Namespace):
    root = _require(config.dataset or config.output, "--dataset")
    if config.sounds:
        pool = WavDirectoryPool(config.sounds)
    elif config.synthetic_sounds:
        pool = SyntheticPool()
    else:
        raise InvalidArgumentError("pass --sounds DIR or --synthetic-sounds")
    generation = config.generation_config()
    manifest = generate_dataset(root, generation, config.seed, pool, config.worker_threads, progress=args.progress)
    log.info("dataset %s: %d rooms, %d pairs (%d out of range), config hash %s", root, len(manifest["rooms"]),
             manifest["pairs_total"], manifest["pairs_out_of_range"], manifest["config_hash"])
    log.info("manifest hash %s", DatasetReader(root).manifest_hash)


def command_train(config: RunConfig, args: argparse.Namespace):
    reader = DatasetReader(_require(config.dataset, "--dataset"))
    checkpoint_path = Path(_require(config.checkpoint or config.output, "--checkpoint"))
    model_config = config.model_config(reader.config)
    train_config = config.train_config()
    log.info("model has %d parameters", model_config.num_parameters)

    checkpoint, metrics = train(reader, model_config, train_config, progress=args.progress)
    checkpoint.metadata["run_config_hash"] = config.config_hash
    checkpoint.metadata["master_seed"] = config.seed
    save_checkpoint(checkpoint, checkpoint_path)
    metrics_path = Path(config.metrics or f"{checkpoint_path}.metrics.csv")
    write_metrics_csv(metrics, metrics_path)
    log.info("metrics written to %s; final train loss %.6f", metrics_path, metrics[-1].train_loss)


def _load_pair(args: argparse.Namespace, target_rate: int | None) -> tuple[AudioClip, AudioClip]:
    clip_i, clip_j = read_wav(args.wav_i), read_wav(args.wav_j)
    rate = target_rate or min(clip_i.sample_rate_hz, clip_j.sample_rate_hz)
    clips = []
    for path, clip in ((args.wav_i, clip_i), (args.wav_j, clip_j)):
        if clip.sample_rate_hz < rate:
            raise InvalidArgumentError(f"{path} is sampled at {clip.sample_rate_hz} Hz, below {rate} Hz")
        if clip.sample_rate_hz != rate:
            log.info("resampling %s from %d Hz to %d Hz", path, clip.sample_rate_hz, rate)
            clip = resample(clip, rate)
        clips.append(clip)
    length = min(len(clips[0]), len(clips[1]))
    if len(clips[0]) != len(clips[1]):
        log.warning("inputs differ in length; using the first %d samples of each", length)
    return clips[0].crop(0, length), clips[1].crop(0, length)


def command_infer(config: RunConfig, args: argparse.Namespace):
    if len(config.estimator) != 1:
        raise InvalidArgumentError("infer takes exactly one --estimator")
    estimator = build_estimator(*config.estimator)[0]
    if estimator.estimator_id == EstimatorKind.ORACLE.value:
        raise InvalidArgumentError("the oracle estimator needs labelled pairs and cannot run on recordings")
    is_model = isinstance(estimator, NeuralEstimator)
    clip_i, clip_j = _load_pair(args, estimator.sample_rate_hz if is_model else None)
    window = estimator.input_len if is_model else (config.window or min(DEFAULT_WINDOW, len(clip_i)))
    if is_model and config.window not in (None, window):
        raise InvalidArgumentError(f"the model only accepts windows of {window} samples")

    rows = sliding_window_infer(estimator, clip_i, clip_j, window, config.overlap)
    log.info("%d windows of %d samples, hop %d", len(rows), window,
             rows[1].start - rows[0].start if len(rows) > 1 else 0)
    with _open_output(config.output) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["window_start_s", "t_center_s", "lag_samples", "tdoa_s", "confidence"])
        for row in rows:
            e = row.estimate
            writer.writerow([f"{row.t_start_s:.6g}", f"{row.t_center_s:.6g}", e.lag_samples, f"{e.tdoa_s:.6g}",
                             f"{e.confidence:.6g}"])


def command_gccphat(config: RunConfig, args: argparse.Namespace):
    command_infer(replace(config, estimator=[EstimatorKind.GCC_PHAT.value]), args)


def _output_dir(config: RunConfig) -> Path:
    path = Path(_require(config.output, "--output"))
    path.mkdir(parents=True, exist_ok=True)
    return path


def command_evaluate(config: RunConfig, args: argparse.Namespace):
    reader = DatasetReader(_require(config.dataset, "--dataset"))
    output = _output_dir(config)
    for estimator in build_estimator(*config.estimator):
        report, histogram = evaluate_dataset(estimator, reader, config.worker_threads, progress=args.progress)
        name = safe_filename(estimator.estimator_id)
        write_report_csv([report], output / f"curve_{name}.csv")
        write_histogram_csv(histogram, output / f"residuals_{name}.csv")


def command_sweep(config: RunConfig, args: argparse.Namespace):
    output = _output_dir(config)
    estimators = build_estimator(*config.estimator)
    generation = config.generation_config()
    sweep = config.sweep_config()
    log.info("%s sweep over %s with %d pairs per point", sweep.kind.value, list(sweep.grid), sweep.pairs_per_point)
    pool = WavDirectoryPool(config.sounds) if config.sounds else SyntheticPool()
    reports = run_sweep(estimators, sweep, generation, pool, config.worker_threads, progress=args.progress)
    write_report_csv(reports, output / f"sweep_{sweep.kind.value}.csv")


def _pattern(orientation) -> DirectivityPattern:
    if orientation is None:
        return DirectivityPattern.omni()
    vector = np.asarray(orientation, dtype=np.float64)
    return DirectivityPattern(DirectivityKind.SUBCARDIOID, vector / np.linalg.norm(vector))


def command_rir(config: RunConfig, args: argparse.Namespace):
    dims = _require(config.dims, "--dims")
    if config.t60 is not None:
        reflection = t60_to_reflection(dims, config.t60)
        log.info("T60 %.3f s in a %s m room gives reflection coefficient %.4f", config.t60, dims, reflection)
    else:
        reflection = _require(config.reflection, "--reflection or --t60")
    room = RoomSpec(dims, reflection, sample_rate_hz=config.sample_rate_hz or 16000)
    src, mic = _require(config.src, "--src"), _require(config.mic, "--mic")
    src_pattern, mic_pattern = _pattern(config.src_orient), _pattern(config.mic_orient)

    images = enumerate_image_sources(room, src, src_pattern.orientation, config.max_order)
    rir = compute_rir(room, src, src_pattern, mic, mic_pattern, config.max_order, config.rir_len, images=images)
    direct = np.linalg.norm(np.asarray(src, dtype=float) - np.asarray(mic, dtype=float))
    log.info("%d image arrivals up to order %d; direct path at sample %.2f", len(images), config.max_order,
             direct / room.speed_of_sound * room.sample_rate_hz)

    if config.format == "wav":
        write_wav(AudioClip(rir, room.sample_rate_hz), _require(config.output, "--output"), SampleFormat.FLOAT_32)
        return
    if config.format != "csv":
        raise InvalidArgumentError(f"--format must be csv or wav, got {config.format!r}")
    with _open_output(config.output) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["sample", "amplitude"])
        for index, value in enumerate(rir):
            writer.writerow([index, f"{value:.6g}"])


def command_benchmark(config: RunConfig, args: argparse.Namespace):
    estimators: list[AbstractEstimator] = build_estimator(*config.estimator)
    models = [e for e in estimators if isinstance(e, NeuralEstimator)]
    length = models[0].input_len if models else (config.signal_len or DEFAULT_WINDOW)
    rate = models[0].sample_rate_hz if models else (config.sample_rate_hz or 16000)
    pairs = shifted_noise_pairs(config.pairs, length, rate, config.seed)
    rows = benchmark(estimators, pairs, config.batch)
    with _open_output(config.output) as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["estimator", "n_pairs", "ms_per_pair"])
        for row in rows:
            writer.writerow([row.estimator_id, row.n_pairs, f"{row.ms_per_pair:.6g}"])


def _add_common(parser: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    parser.add_argument("--config", dest="config_file", help="JSON file with defaults for any flag below")
    parser.add_argument("--seed", type=int, default=S, help="master seed (default: 0)")
    parser.add_argument("--threads", type=int, default=S,
                        help="worker threads (default: $TDOA_TOOLKIT_THREADS or the CPU count)")
    parser.add_argument("--preset", choices=[p.value for p in Preset], default=S, help="size preset (default: desk)")
    parser.add_argument("--output", "-o", default=S, help="output file or directory")
    parser.add_argument("--quiet", "-q", action="store_true", help="only log warnings and errors")
    parser.add_argument("--verbose", "-v", action="store_true", help="log debug messages")


def _add_generation(parser: argparse.ArgumentParser):
    S = argparse.SUPPRESS
    parser.add_argument("--rooms", type=int, default=S, help="number of rooms")
    parser.add_argument("--mics", type=int, default=S, help="microphones per room")
    parser.add_argument("--signal-len", type=int, default=S, help="recorded samples per clip")
    parser.add_argument("--preroll", type=int, default=S, help="simulated samples discarded before each clip")
    parser.add_argument("--sample-rate-hz", type=int, default=S, help="sample rate")
    parser.add_argument("--no-movement", action="store_true", default=S, help="only stationary sources")
    parser.add_argument("--no-directivity", action="store_true", default=S, help="omnidirectional sources and mics")
    parser.add_argument("--sounds", default=S, help="directory of source WAV files")
    parser.add_argument("--synthetic-sounds", action="store_true", default=S, help="use the built-in synthetic pool")


def _add_estimators(parser: argparse.ArgumentParser, many: bool = True):
    ids = ", ".join(k.value for k in EstimatorKind)
    parser.add_argument("--estimator", action="append" if many else "store", default=argparse.SUPPRESS,
                        help=f"estimator id ({ids}; model needs model:CHECKPOINT)" + (", repeatable" if many else ""))


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="tdoa-toolkit",
                                     description="Simulate reverberant microphone recordings, train a neural "
                                                 "TDOA estimator and compare it with GCC-PHAT.")
    subparsers = parser.add_subparsers(dest="command", required=True)

    simulate = subparsers.add_parser("simulate", help="generate a dataset of simulated rooms")
    _add_common(simulate)
    _add_generation(simulate)
    simulate.add_argument("--dataset", default=S, help="dataset directory to create")
    simulate.set_defaults(func=command_simulate)

    train_parser = subparsers.add_parser("train", help="train the neural estimator on a dataset")
    _add_common(train_parser)
    train_parser.add_argument("--dataset", default=S, help="dataset directory")
    train_parser.add_argument("--checkpoint", default=S, help="checkpoint file to write")
    train_parser.add_argument("--metrics", default=S, help="per-epoch metrics CSV (default: CHECKPOINT.metrics.csv)")
    train_parser.add_argument("--epochs", type=int, default=S)
    train_parser.add_argument("--batch-size", type=int, default=S)
    train_parser.add_argument("--lr", type=float, default=S)
    train_parser.add_argument("--label-smoothing", type=float, default=S)
    train_parser.add_argument("--weight-decay", type=float, default=S)
    train_parser.add_argument("--validation-fraction", type=float, default=S)
    train_parser.add_argument("--train-rooms", type=int, default=S, help="only use the first N rooms")
    train_parser.add_argument("--frontend-norm", choices=[n.value for n in FrontendNorm], default=S)
    train_parser.set_defaults(func=command_train)

    for name, func, text in (("infer", command_infer, "windowed TDOA estimates for two WAV files"),
                             ("gccphat", command_gccphat, "windowed GCC-PHAT estimates for two WAV files")):
        sub = subparsers.add_parser(name, help=text)
        _add_common(sub)
        sub.add_argument("wav_i", help="first recording")
        sub.add_argument("wav_j", help="second recording")
        if name == "infer":
            _add_estimators(sub, many=False)
        sub.add_argument("--window", type=int, default=S, help=f"window length in samples (default: {DEFAULT_WINDOW})")
        sub.add_argument("--overlap", type=float, default=S, help="window overlap fraction (default: 5/6)")
        sub.set_defaults(func=func)

    evaluate = subparsers.add_parser("evaluate", help="inlier-ratio curves of estimators on a dataset")
    _add_common(evaluate)
    evaluate.add_argument("--dataset", default=S, help="dataset directory")
    _add_estimators(evaluate)
    evaluate.set_defaults(func=command_evaluate)

    sweep = subparsers.add_parser("sweep", help="SNR or T60 sensitivity of estimators")
    _add_common(sweep)
    _add_generation(sweep)
    _add_estimators(sweep)
    sweep.add_argument("--kind", choices=[k.value for k in SweepKind], default=S)
    sweep.add_argument("--grid", type=float, nargs="+", default=S, help="override the sweep grid")
    sweep.add_argument("--pairs-per-point", type=int, default=S)
    sweep.add_argument("--fixed-t60", type=float, default=S, help="T60 of the SNR sweep (default: 0.2 s)")
    sweep.add_argument("--fixed-snr", type=float, default=S, help="SNR of the T60 sweep (default: 10 dB)")
    sweep.set_defaults(func=command_sweep)

    rir = subparsers.add_parser("rir", help="dump one room impulse response")
    _add_common(rir)
    rir.add_argument("--dims", type=float, nargs=3, default=S, metavar=("X", "Y", "Z"))
    rir.add_argument("--reflection", type=float, default=S)
    rir.add_argument("--t60", type=float, default=S, help="derive the reflection coefficient from a T60")
    rir.add_argument("--src", type=float, nargs=3, default=S, metavar=("X", "Y", "Z"))
    rir.add_argument("--mic", type=float, nargs=3, default=S, metavar=("X", "Y", "Z"))
    rir.add_argument("--src-orient", type=float, nargs=3, default=S, help="subcardioid source facing this way")
    rir.add_argument("--mic-orient", type=float, nargs=3, default=S, help="subcardioid microphone facing this way")
    rir.add_argument("--max-order", type=int, default=S)
    rir.add_argument("--rir-len", type=int, default=S)
    rir.add_argument("--sample-rate-hz", type=int, default=S)
    rir.add_argument("--format", choices=["csv", "wav"], default=S)
    rir.set_defaults(func=command_rir)

    bench = subparsers.add_parser("benchmark", help="time estimators on shifted white-noise pairs")
    _add_common(bench)
    _add_estimators(bench)
    bench.add_argument("--pairs", type=int, default=S)
    bench.add_argument("--batch", type=int, default=S)
    bench.add_argument("--signal-len", type=int, default=S)
    bench.add_argument("--sample-rate-hz", type=int, default=S)
    bench.set_defaults(func=command_benchmark)
    return parser


_NOT_CONFIG = {"command", "func", "config_file", "quiet", "verbose", "progress", "wav_i", "wav_j"}


def _overrides(args: argparse.Namespace) -> dict[str, Any]:
    overrides = {k: v for k, v in vars(args).items() if k not in _NOT_CONFIG}
    if isinstance(overrides.get("estimator"), str):
        overrides["estimator"] = [overrides["estimator"]]
    return overrides


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.quiet, args.verbose)
    args.progress = not args.quiet
    func: Callable[[RunConfig, argparse.Namespace], None] = args.func
    try:
        config = RunConfig.load(args.config_file, _overrides(args))
        log.info("tdoa-toolkit %s", args.command)
        config.log_effective()
        func(config, args)
    except (InvalidArgumentError, FormatError, DatasetLoadError, FileNotFoundError) as e:
        log.error("%s", e)
        return EXIT_USAGE
    except TdoaToolkitError as e:
        log.error("%s", e)
        return EXIT_FAILURE
    except Exception:
        log.exception("unexpected failure")
        return EXIT_FAILURE
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
