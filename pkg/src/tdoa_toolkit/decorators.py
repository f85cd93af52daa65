import logging
from functools import wraps
from typing import Callable

from tdoa_toolkit.audio import AudioClip, check_same_shape
from tdoa_toolkit.exceptions import TdoaToolkitError

log = logging.getLogger(__name__)


def requires_clip_pair(func: Callable):
    """
    Decorator for functions whose first two positional arguments are a pair of clips.

    The wrapped function only runs once both clips are non-empty, equally long and
    share a sample rate. Anything else raises InvalidArgumentError before the body
    executes, so estimators and feature extractors never see a ragged pair.

    Args:
        func (Callable): function taking (x_i: AudioClip, x_j: AudioClip, ...).

    Returns:
        Callable: the validated function.

    Raises:
        InvalidArgumentError: on length or sample rate mismatch, or empty clips.
    """

    @wraps(func)
    def wrapper(x_i: AudioClip, x_j: AudioClip, *args, **kwargs):
        check_same_shape(x_i, x_j)
        return func(x_i, x_j, *args, **kwargs)

    return wrapper


def failures_as_outliers(func: Callable):
    """Return None instead of raising when an estimator fails on one pair."""

    @wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except (TdoaToolkitError, ArithmeticError, ValueError, RuntimeError) as e:
            log.debug("%s failed, counted as outlier: %s", func.__name__, e)
            return None

    return wrapper
