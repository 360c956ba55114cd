from __future__ import annotations

import logging
import os

from . import utils, version
from . import bspline, fscad, irls, kernelw, linkfam, longdata, simbench, tuning
from .bspline import SplineBasis
from .fscad import ScadParams
from .irls import FitConfig, FitResult
from .kernelw import KernelSpec, PairDesign
from .linkfam import Family, getFamily
from .longdata import LongDataset, Subject, loadCsv, rescaleTime
from .pylocker import Locker
from .simbench import BenchOptions, BenchReport, Scenario, TrueFunctions
from .utils.exceptions import (PyLockerException, InputDataError, DataParseError, EmptyDatasetError, ParameterError,
                               DomainError, DegenerateDomainError, NumericError, SingularSystemError, TuningError,
                               BenchmarkError)


_logger = logging.getLogger(__name__)


PROJECT_DIR = os.path.dirname(os.path.abspath(__file__))

env: utils.Env | None = None


def loadEnv(config_path: str = "", **kwargs) -> utils.Env:
    """Load the env and config for the project."""
    global env
    closeEnv()
    kwargs = {
        "project_name": version.PROJECT_NAME,
        "project_name_text": version.PROJECT_NAME_TEXT,
        "version": version.VERSION,
        **kwargs,
    }
    env = utils.Env(config_path, **kwargs)
    return env


def closeEnv():
    """Release the current env, if any."""
    global env
    if env is not None:
        env.close()
        env = None
