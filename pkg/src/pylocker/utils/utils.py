from __future__ import annotations

import dataclasses
import logging
import os

import numpy as np

from .exceptions import logExceptionHelper

_logger = logging.getLogger(__name__)

__all__ = ["toJson", "workerCount"]

THREADS_ENV = "LOCKER_THREADS"


def toJson(obj: object, errors: str = 'raise'):
    """
    Serializer for json.dump, handles numpy values, dataclasses and objects with a toJson method.

    :param obj: Object to be serialized, should be an object
    :param errors: Whether to 'ignore', 'warning' or 'raise' errors, should be str
    :return: json_data - Any
    """
    if hasattr(obj, 'toJson') and callable(obj.toJson):
        return obj.toJson()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, (set, frozenset, tuple)):
        return sorted(obj) if isinstance(obj, (set, frozenset)) else list(obj)
    if dataclasses.is_dataclass(obj) and not isinstance(obj, type):
        return dataclasses.asdict(obj)

    logExceptionHelper(f"'{type(obj).__name__}' object is not JSON serializable", errors, TypeError)
    return None


def workerCount(default: int = 1) -> int:
    """Worker cap from the LOCKER_THREADS environment variable."""
    value = os.environ.get(THREADS_ENV, "")
    if not value:
        return default
    try:
        count = int(value)
    except ValueError:
        _logger.warning(f"Ignoring {THREADS_ENV}={value!r}, expected a positive integer")
        return default
    if count < 1:
        _logger.warning(f"Ignoring {THREADS_ENV}={value!r}, expected a positive integer")
        return default
    return count
