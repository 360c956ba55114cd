from __future__ import annotations

import ast
import configparser
import logging
from configparser import ConfigParser as _ConfigParser
from os import path
from typing import Any, TYPE_CHECKING

from .path import joinPath
from ..version import PROJECT_NAME

if TYPE_CHECKING:
    from .env import Env


_logger = logging.getLogger(__name__)

UTILS_DIR = path.dirname(path.abspath(__file__))
SRC_DIR = path.dirname(UTILS_DIR)  # Package directory


def checkConfigPath(config_path: str) -> bool:
    """Check for valid config path."""
    if not config_path or not path.exists(config_path):
        raise FileNotFoundError(f"Invalid config path was given, got: {config_path}")
    return True


def parseValue(value: str) -> Any:
    """Parse a config value as a python literal, falling back to the raw string."""
    try:
        return ast.literal_eval(value)
    except (ValueError, SyntaxError):
        return value


class Config:
    """
    Sectioned settings. The base config shipped with the package is loaded
    first, then the user config (if given) is merged over it section by
    section.
    """

    CONFIG_EXT = "conf"
    PROJECT_CONFIG_PATH: str = path.abspath(f"{SRC_DIR}/{PROJECT_NAME}.{CONFIG_EXT}")

    def __init__(self, config_path: str = "", sections: str | list = "", env: Env = None, **kwargs):
        if config_path:
            config_path = path.abspath(config_path)
            checkConfigPath(config_path)

        self.env: Env = env
        self.config_path: str = config_path
        self.config_dir: str = '' if not config_path else path.dirname(config_path)
        self.filename: str = ''

        self._sections: list[str] = []
        self._config: dict[str, dict] = {}

        split_path = self._splitPathIntoDirAndName(config_path)
        if split_path:
            self.config_dir, self.filename = split_path
        if not self.filename and self.env:
            self.filename = self.env.project_name

        self.loadConfig(self.PROJECT_CONFIG_PATH)
        if self.config_path:
            self.loadConfig(sections=sections)

    def __str__(self) -> str:
        return str(self._config)

    def __repr__(self) -> str:
        prefix = ""
        if self.env:
            prefix = (self.env.project_name_text or self.env.project_name or '')
        return f"{prefix}{'.' if prefix else ''}Config({str(self)})"

    def __getitem__(self, key):
        return self._config[key]

    def __setitem__(self, key, value):
        self._config[key] = value

    def __contains__(self, key) -> bool:
        return key in self._config

    def get(self, key: str, fallback=None) -> dict:
        return self._config.get(key, {} if fallback is None else fallback)

    def _splitPathIntoDirAndName(self, config_path: str) -> tuple[str, str] | bool:
        """Split path into directory and filename."""
        if not config_path or not isinstance(config_path, str):
            return False
        if not config_path.endswith('.' + self.CONFIG_EXT):
            return False
        return path.split(config_path)

    def loadConfig(self, config_path: str = '', sections: str | list = '') -> dict:
        """Load sections from a config file and merge them into Config."""
        config_: dict = {}
        config_path = config_path or self.config_path

        parser = _ConfigParser()
        parser.optionxform = str
        try:
            parser.read(config_path, encoding='utf-8')
        except configparser.Error as e:
            _logger.error(f"Failed to parse config '{config_path}'; {e}")
            raise e

        if sections and isinstance(sections, str):
            sections = [sections]
        elif not sections or not isinstance(sections, list):
            sections = parser.sections()

        for section_name in sections:
            config_.setdefault(section_name, {})
            config_[section_name].update(self.loadSection(config_path, parser, section_name))

        self.setConfig(config_)
        return config_

    def loadSection(self, config_path: str, parser: _ConfigParser, section_name: str) -> dict:
        """Get section attributes from config file."""
        if not parser.has_section(section_name):
            _logger.error(f"Section '{section_name}' not found in '{config_path}'")
            return {}
        section_config = {key: parseValue(value) for key, value in parser.items(section_name)}
        if section_name not in self._sections:
            self._sections.append(section_name)
        return section_config

    def setConfig(self, config: dict[str, dict]):
        """Merge section attributes into Config."""
        for key, value in config.items():
            if key not in self._config:
                self._config[key] = dict(value)
                continue
            self._config[key].update(value)

    def saveConfig(self, config_dir: str = "", filename: str = "") -> str:
        """Save the current configuration back to a config file, returns the path written."""
        parser = _ConfigParser()
        parser.optionxform = str

        config_dir = config_dir or self.config_dir
        filename = filename or self.filename or PROJECT_NAME

        for key, value in self._config.items():
            parser.add_section(key)
            for sub_key, sub_value in value.items():
                parser.set(key, sub_key, repr(sub_value) if isinstance(sub_value, str) else str(sub_value))

        config_path = joinPath(config_dir, filename, ext=self.CONFIG_EXT)
        with open(config_path, 'w', encoding='utf-8') as config_file:
            parser.write(config_file)

        _logger.info(f"Config saved to '{config_path}'")
        return config_path
