from enum import Enum


class Weighting(str, Enum):
    PHAT = "phat"
    PLAIN = "plain"


class ConvolveMode(str, Enum):
    FULL = "full"
    SAME_AS_FIRST = "same-as-first"


class DirectivityKind(str, Enum):
    OMNIDIRECTIONAL = "omnidirectional"
    SUBCARDIOID = "subcardioid"


class PathKind(str, Enum):
    STATIONARY = "stationary"
    BEZIER = "bezier"


class FrontendNorm(str, Enum):
    NONE = "none"
    PHAT = "phat"


class SweepKind(str, Enum):
    SNR = "snr"
    T60 = "t60"


class EstimatorKind(str, Enum):
    GCC_PHAT = "gccphat"
    GCC_PLAIN = "gccplain"
    MODEL = "model"
    ORACLE = "oracle"


class Preset(str, Enum):
    DESK = "desk"
    PAPER = "paper"
    GRADCHECK = "gradcheck"
