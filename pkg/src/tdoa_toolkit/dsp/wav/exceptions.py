from tdoa_toolkit.exceptions import FormatError


class WavError(FormatError):
    pass


class MalformedWav(WavError):
    pass


class UnsupportedCodec(WavError):
    pass
