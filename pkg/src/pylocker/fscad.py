"""SCAD penalty and the functional SCAD local quadratic approximation."""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import block_diag

from .bspline import SplineBasis
from .utils.exceptions import ParameterError


_logger = logging.getLogger(__name__)

DEFAULT_A = 3.7
NORM_EPS = 1e-8


@dataclass(frozen=True)
class ScadParams:
    lam: float = 0.0
    a: float = DEFAULT_A

    def __post_init__(self):
        lam, a = float(self.lam), float(self.a)
        if not np.isfinite(lam) or lam < 0:
            raise ParameterError(f"SCAD lambda must be nonnegative, got: {self.lam}")
        if not np.isfinite(a) or a <= 2:
            raise ParameterError(f"SCAD a must exceed 2, got: {self.a}")
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "a", a)


def _checkNonnegative(v) -> np.ndarray:
    v = np.asarray(v, dtype=float)
    if np.any(v < 0) or not np.all(np.isfinite(v)):
        raise ParameterError("SCAD arguments must be finite and nonnegative")
    return v


def _asOutput(value: np.ndarray):
    return float(value) if np.ndim(value) == 0 else value


def scad(params: ScadParams, v):
    """p_lambda(v): linear up to lambda, quadratic up to a*lambda, constant after."""
    v = _checkNonnegative(v)
    lam, a = params.lam, params.a
    value = np.where(
        v <= lam, lam * v,
        np.where(v <= a * lam, (2.0 * a * lam * v - v * v - lam * lam) / (2.0 * (a - 1.0)), 0.5 * lam * lam * (a + 1.0))
    )
    return _asOutput(value)


def scadDeriv(params: ScadParams, v):
    """p'_lambda(v), taking the left limit at the kinks."""
    v = _checkNonnegative(v)
    lam, a = params.lam, params.a
    value = np.where(v <= lam, lam, np.where(v <= a * lam, (a * lam - v) / (a - 1.0), 0.0))
    return _asOutput(value)


@dataclass(frozen=True, eq=False)
class LqaState:
    """Interval norms of beta_1 and the 2L x 2L matrix U = diag(0, sum_m U_m)."""

    interval_norms: np.ndarray
    degenerate: np.ndarray
    U: np.ndarray


def intervalScale(basis: SplineBasis) -> float:
    """c = sqrt((K + 1) / T)."""
    return math.sqrt((basis.K + 1) / basis.length)


def intervalNorms(gamma1, basis: SplineBasis) -> np.ndarray:
    """||beta_1||_2 on each breakpoint interval, sqrt(gamma1^T T_m gamma1)."""
    gamma1 = np.asarray(gamma1, dtype=float)
    squares = np.array([gamma1 @ T_m @ gamma1 for T_m in basis.intervalGrams()])
    return np.sqrt(np.maximum(squares, 0.0))


def lqaMatrix(gamma1_prev, basis: SplineBasis, params: ScadParams) -> LqaState:
    """Local quadratic approximation of the fSCAD penalty around gamma1_prev."""
    gamma1_prev = np.asarray(gamma1_prev, dtype=float)
    if gamma1_prev.shape != (basis.L,):
        raise ParameterError(f"Expected {basis.L} slope coefficients, got: {gamma1_prev.shape}")

    c = intervalScale(basis)
    eps = NORM_EPS / c
    norms = intervalNorms(gamma1_prev, basis)
    degenerate = norms < eps

    U1 = np.zeros((basis.L, basis.L))
    if params.lam > 0:
        for m, (norm, T_m) in enumerate(zip(norms, basis.intervalGrams()), start=1):
            if degenerate[m - 1]:
                continue
            scale = c * scadDeriv(params, c * norm) / (2.0 * norm)
            if scale:
                U1 += scale * T_m
    U = block_diag(np.zeros((basis.L, basis.L)), U1)
    if degenerate.any() and params.lam > 0:
        _logger.debug(f"{int(degenerate.sum())} degenerate interval(s) left out of U")
    return LqaState(norms, degenerate, U)


def fscadPenalty(gamma1, basis: SplineBasis, params: ScadParams) -> float:
    """(T / (K + 1)) sum_m p_lambda(c ||beta_1||_m), the interval approximation of the integrated SCAD."""
    norms = intervalNorms(gamma1, basis)
    return float(basis.length / (basis.K + 1) * np.sum(scad(params, intervalScale(basis) * norms)))
