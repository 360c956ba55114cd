from __future__ import annotations

import json
import logging
import os
import tempfile

import pandas as pd

from .exceptions import logExceptionHelper
from .path import joinPath, checkPath, existPath
from .utils import toJson


_logger = logging.getLogger(__name__)

__all__ = ["load", "save"]

SUPPORTED_EXT = ('json', 'csv', 'txt')


def _splitExt(name: str, ext: str) -> str:
    ext = ext or os.path.splitext(name)[1]
    return ext[1:] if ext.startswith('.') else ext


def load(dir_: str, name: str = "", ext: str = "", errors: str = "raise"):
    """
    Load the data with the method matching its extension. Json is decoded
    into python objects, csv into a DataFrame and txt into a str.

    :param dir_: Directory of file, or the file path when name is empty, should be a str
    :param name: Name of file, should be a str
    :param ext: File extension, should be a str
    :param errors: Whether to 'ignore', 'warning' or 'raise' errors, should be str
    :return: data - Any
    """
    ext = _splitExt(name or dir_, ext)
    if ext not in SUPPORTED_EXT:
        logExceptionHelper(f"Unsupported file extension, got: '{ext}'", errors, ValueError)
        return None

    path, exist = checkPath(dir_, name, ext=ext, errors=errors)
    if not exist:
        return None

    if ext == 'json':
        with open(path, 'r', encoding='utf-8') as file:
            data = json.load(file)
    elif ext == 'csv':
        data = pd.read_csv(path)
    else:
        with open(path, 'r', encoding='utf-8') as file:
            data = file.read()
    _logger.debug(f"File '{path}' data was loaded")
    return data


def save(dir_: str, name: str, data, indent: int = 2, errors: str = 'raise') -> bool:
    """
    Save the data with the method matching the extension of name. The
    content goes to a temporary file in dir_ that is renamed into place,
    so readers never observe a partial file.

    :param dir_: Directory of file, should be a str
    :param name: Name of file including extension, should be a str
    :param data: Json-serialisable object, DataFrame or str
    :param indent: Json indentation, should be an int
    :param errors: Whether to 'ignore', 'warning' or 'raise' errors, should be str
    :return: completed - bool
    """
    if not existPath(dir_, errors=errors):
        return False

    ext = _splitExt(name, '')
    if ext not in SUPPORTED_EXT:
        logExceptionHelper(f"File '{name}' must end with one of {SUPPORTED_EXT}", errors, ValueError)
        return False

    path = joinPath(dir_, name)
    fd, tmp_path = tempfile.mkstemp(dir=os.path.dirname(path), prefix=f".{name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, 'w', encoding='utf-8', newline='') as file:
            if ext == 'json':
                json.dump(data, file, default=toJson, indent=indent, sort_keys=True)
                file.write('\n')
            elif ext == 'csv':
                frame = data if isinstance(data, pd.DataFrame) else pd.DataFrame(data)
                frame.to_csv(file, index=False, lineterminator='\n')
            else:
                file.write(str(data))
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.remove(tmp_path)
        raise
    _logger.debug(f"File '{path}' was saved")
    return True
