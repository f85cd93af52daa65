class TdoaToolkitError(Exception):
    pass


class InvalidArgumentError(TdoaToolkitError, ValueError):
    pass


class OutOfRangeError(InvalidArgumentError):
    pass


class ConfigError(InvalidArgumentError):
    pass


class FormatError(TdoaToolkitError):
    def __init__(self, message: str = "", offset: int | None = None):
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)
        self.offset = offset


class GenerationError(TdoaToolkitError):
    def __init__(self, message: str, seed: int | None = None):
        if seed is not None:
            message = f"scenario seed {seed}: {message}"
        super().__init__(message)
        self.seed = seed


class DatasetLoadError(TdoaToolkitError):
    pass


class SchemaVersionMismatch(DatasetLoadError):
    pass


class TruncatedBlob(DatasetLoadError):
    pass


class ChecksumMismatch(DatasetLoadError):
    pass


class TrainingError(TdoaToolkitError):
    def __init__(self, message: str, epoch: int | None = None, batch: int | None = None,
                 parameter: str | None = None):
        context = [f"{key}={value}" for key, value in
                   (("epoch", epoch), ("batch", batch), ("parameter", parameter)) if value is not None]
        if context:
            message = f"{message} [{', '.join(context)}]"
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch
        self.parameter = parameter


class StateError(TdoaToolkitError, RuntimeError):
    pass


class EstimatorError(TdoaToolkitError):
    pass
