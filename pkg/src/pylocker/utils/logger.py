from __future__ import annotations

import logging
import sys
import time
from datetime import datetime
from logging.handlers import RotatingFileHandler
from os import listdir, makedirs, path, remove as os_remove

from ..version import PROJECT_NAME

_logger = logging.getLogger(__name__)

LOG_LEVELS = ("debug", "info", "warning", "error", "critical")
LOG_FORMAT = "%(asctime)s {tag} <%(levelname)s> %(message)s  \t(%(name)s.%(funcName)s)"


def logFormat(project_name: str = "", instance: str = "") -> str:
    """Record format tagged with project and instance, e.g. 'pylocker:benchmark'."""
    tag = ":".join(filter(None, (project_name or PROJECT_NAME, instance)))
    return LOG_FORMAT.replace("{tag}", tag)


def _validateLogLevel(log_level: str):
    """Validate log level."""
    if not isinstance(log_level, str) or log_level.lower() not in LOG_LEVELS:
        raise ValueError(f"Invalid log level: {log_level}")


def _buildLogDirectory(logs_dir: str = "", add_file_handler: bool = True):
    """Build log directory if not exists."""
    if not add_file_handler:
        return
    if not logs_dir:
        raise ValueError("No log directory specified.")
    makedirs(logs_dir, exist_ok=True)


class LoggerHandler:
    """Configures the root logger with a stderr console handler and optional rotating log files."""

    DEFAULT_CONFIG = {
        "ext": "log",
        "log_level": "WARNING",
        "add_console_handler": True,
        "add_file_handler": False,
        "file_levels": ["debug", "info", "warning"],
        "add_instance": True,
        "add_time_stamp": True,
        "max_bytes": 10 * 1024 * 1024,  # 10MB
        "backup_count": 5,
        "age_limit": 60 * 60 * 24 * 7  # 7 days
    }

    def __init__(self, logs_dir: str = "", **kwargs):
        self.logs_dir = logs_dir
        self.config = {**self.DEFAULT_CONFIG, **kwargs}

        self.config["ext"] = self.config["ext"].strip(".")
        _validateLogLevel(self.config["log_level"])
        for level in self.config["file_levels"]:
            _validateLogLevel(level)

        self.timestamp = datetime.now().strftime("%Y-%m-%d_%H-%M-%S")
        _buildLogDirectory(self.logs_dir, self.config["add_file_handler"])

        if self.logs_dir and path.isdir(self.logs_dir):
            self.cleanLogs()

        self.logger = self._buildLogger()

    def _getLogFileName(self, level: str) -> str:
        """Constructs the filename of the log file."""
        names = [self.config.get("project_name") or PROJECT_NAME]
        if self.config["add_instance"] and self.config.get("instance"):
            names.append(self.config.get("instance"))
        names.append(level)
        if self.config["add_time_stamp"]:
            names.append(self.timestamp)
        return f"{'_'.join(filter(None, names))}.{self.config['ext']}"

    def _buildLogger(self) -> logging.Logger:
        """Build the root logger by creating and attaching handlers."""
        log_formatter = logging.Formatter(logFormat(self.config.get("project_name"), self.config.get("instance")))
        logger = logging.getLogger()
        logger.handlers = []
        logger.setLevel(logging.DEBUG)

        if self.logs_dir and self.config["add_file_handler"]:
            max_bytes, backup_count = self.config["max_bytes"], self.config["backup_count"]
            for level in self.config["file_levels"]:
                file_path = path.abspath(path.join(self.logs_dir, self._getLogFileName(level)))
                file_handler = RotatingFileHandler(file_path, maxBytes=max_bytes, backupCount=backup_count)
                file_handler.setLevel(getattr(logging, level.upper()))
                file_handler.setFormatter(log_formatter)
                logger.addHandler(file_handler)

        # Results go to stdout and files, diagnostics to stderr
        if self.config["add_console_handler"]:
            console_handler = logging.StreamHandler(sys.stderr)
            console_handler.setLevel(getattr(logging, self.config["log_level"].upper()))
            console_handler.setFormatter(log_formatter)
            logger.addHandler(console_handler)

        return logger

    def cleanLogs(self):
        """Remove log files older than the age limit."""
        now = time.time()
        age_limit = self.config["age_limit"]

        for filename in listdir(self.logs_dir):
            file_path = path.abspath(path.join(self.logs_dir, filename))
            if not path.isfile(file_path) or not filename.endswith(self.config["ext"]):
                continue
            if now - path.getctime(file_path) < age_limit:
                continue
            try:
                os_remove(file_path)
                _logger.debug(f"Deleted old log file: {filename}")
            except PermissionError:
                _logger.warning(f"Failed to delete old log file due to permissions: {filename}")

    def getLogger(self) -> logging.Logger:
        return self.logger

    def close(self):
        """Shut down the logger and close all handlers."""
        for handler in self.logger.handlers[:]:
            handler.close()
            self.logger.removeHandler(handler)
        _logger.debug("Logger closed successfully.")
