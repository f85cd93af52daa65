from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.base import AbstractEstimator, BaseEstimator, TdoaEstimate
from tdoa_toolkit.estimators import OracleEstimator, build_estimator
from tdoa_toolkit.gcc_phat import CorrelationCurve, GccPhatEstimator, gcc_curve, gcc_phat_estimate

__version__ = "0.1.0"

__all__ = [
    'AudioClip',
    'AbstractEstimator',
    'BaseEstimator',
    'TdoaEstimate',
    'CorrelationCurve',
    'GccPhatEstimator',
    'OracleEstimator',
    'gcc_curve',
    'gcc_phat_estimate',
    'build_estimator',
]
