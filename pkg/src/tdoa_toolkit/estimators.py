from tdoa_toolkit.audio import AudioClip
from tdoa_toolkit.base import BaseEstimator, TdoaEstimate
from tdoa_toolkit.enums import EstimatorKind, Weighting
from tdoa_toolkit.exceptions import EstimatorError
from tdoa_toolkit.gcc_phat import GccPhatEstimator
from tdoa_toolkit.utils import parse_estimator_string


class OracleEstimator(BaseEstimator):
    """Returns the stored ground truth of a labelled pair; only usable through estimate_labeled."""

    estimator_id = EstimatorKind.ORACLE.value

    def estimate(self, x_i: AudioClip, x_j: AudioClip) -> TdoaEstimate:
        raise EstimatorError("the oracle estimator needs labelled pairs")

    def estimate_labeled(self, pair) -> TdoaEstimate:
        lag = round(pair.lag_samples)
        return TdoaEstimate(lag_samples=lag, tdoa_s=pair.tdoa_s, peak_value=1.0, confidence=1.0)


def build_estimator(*estimator_strings: str) -> list[BaseEstimator]:
    """
    Turn estimator ids such as ``gccphat`` or ``model:ckpt.bin`` into estimators.

    Raises:
        InvalidArgumentError: on an unknown id, listing the valid ones.
    """
    estimators = []
    for estimator_string in estimator_strings:
        spec = parse_estimator_string(estimator_string)
        if spec.kind == EstimatorKind.GCC_PHAT:
            estimators.append(GccPhatEstimator(Weighting.PHAT))
        elif spec.kind == EstimatorKind.GCC_PLAIN:
            estimators.append(GccPhatEstimator(Weighting.PLAIN))
        elif spec.kind == EstimatorKind.ORACLE:
            estimators.append(OracleEstimator())
        else:
            from tdoa_toolkit.neural.predict import NeuralEstimator
            estimators.append(NeuralEstimator.from_file(spec.checkpoint, estimator_id=spec.estimator_id))
    return estimators
