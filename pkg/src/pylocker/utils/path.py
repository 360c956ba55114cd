from __future__ import annotations

import logging
import os

from .exceptions import logExceptionHelper

_logger = logging.getLogger(__name__)

__all__ = ["joinPath", "checkPath", "existPath", "makePath"]


def joinPath(path: str, *paths, ext: str = '') -> str:
    """
    Join the paths together, replacing or adding the extension when given.

    :param path: Main file path, should be a str
    :param paths: Remaining file paths, should be a tuple[str]
    :param ext: File extension, should be a str
    :return: path - str
    """
    path, path_ext = os.path.splitext(os.path.join(path, *filter(lambda x: x and isinstance(x, str), paths)))
    if ext and path_ext != ext:
        path_ext = ext if ext.startswith('.') else f'.{ext}'
    return os.path.abspath(path + path_ext)


def checkPath(path: str, *paths, ext: str = '', errors: str = 'ignore') -> tuple[str, bool]:
    """
    Join the paths together and check the result exists.

    :param errors: Whether to 'ignore', 'warning', 'error' or 'raise' errors, should be str
    :return: path, exist - tuple[str, bool]
    """
    path = joinPath(path, *paths, ext=ext)
    exist = os.path.exists(path)
    if not exist:
        logExceptionHelper(f"No such file or directory: '{path}'", errors, FileNotFoundError)
    return path, exist


def existPath(path: str, *paths, ext: str = '', errors: str = 'ignore') -> bool:
    _, exist = checkPath(path, *paths, ext=ext, errors=errors)
    return exist


def makePath(path: str, *paths) -> str:
    """Create the directory when missing and return its absolute path."""
    path, exist = checkPath(path, *paths)
    if not exist:
        os.makedirs(path, exist_ok=True)
        _logger.debug(f"Path has been made: '{path}'")
    return path
