"""Clamped B-spline bases with the roughness and interval Gram matrices used by the penalties."""
from __future__ import annotations

import logging
import math
from functools import cached_property
from typing import Sequence

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.interpolate import BSpline

from .utils.exceptions import DegenerateDomainError, DomainError, ParameterError


_logger = logging.getLogger(__name__)


class SplineBasis:
    """
    Clamped B-spline basis of degree d with K interior knots on [t_lo, t_hi],
    giving L = K + d + 1 functions. Instances are immutable.
    """

    def __init__(self, degree: int = 3, n_interior: int = 9, domain: tuple[float, float] = (0.0, 1.0),
                 interior_knots: Sequence[float] | None = None):
        degree, t_lo, t_hi = int(degree), float(domain[0]), float(domain[1])
        if degree < 0:
            raise ParameterError(f"Spline degree must be nonnegative, got: {degree}")
        if not t_hi > t_lo:
            raise DegenerateDomainError(f"Spline domain must have positive length, got: [{t_lo}, {t_hi}]")

        if interior_knots is None:
            n_interior = int(n_interior)
            if n_interior < 1:
                raise ParameterError(f"At least one interior knot is required, got: {n_interior}")
            interior = np.linspace(t_lo, t_hi, n_interior + 2)[1:-1]
        else:
            interior = np.asarray(interior_knots, dtype=float)
            if interior.ndim != 1 or interior.size < 1:
                raise ParameterError("At least one interior knot is required")
            if np.any(np.diff(interior) <= 0) or interior[0] <= t_lo or interior[-1] >= t_hi:
                raise ParameterError("Interior knots must be strictly increasing inside the domain")

        self._degree = degree
        self._domain = (t_lo, t_hi)
        self._interior = interior
        self._breaks = np.concatenate(([t_lo], interior, [t_hi]))
        self._knots = np.concatenate((np.full(degree + 1, t_lo), interior, np.full(degree + 1, t_hi)))
        for array in (self._interior, self._breaks, self._knots):
            array.setflags(write=False)

        # Identity coefficients turn the spline into the vector of basis functions
        self._spline = BSpline(self._knots, np.eye(self.L), degree, extrapolate=False)

    @classmethod
    def fromBreaks(cls, breaks: Sequence[float], degree: int = 3) -> SplineBasis:
        """Basis on explicit breakpoints tau_0 < ... < tau_{K+1}."""
        breaks = np.asarray(breaks, dtype=float)
        if breaks.size < 3:
            raise ParameterError("Breakpoints must include both domain ends and one interior knot")
        return cls(degree, breaks.size - 2, (breaks[0], breaks[-1]), interior_knots=breaks[1:-1])

    @classmethod
    def fromSize(cls, n_basis: int, degree: int = 3, domain: tuple[float, float] = (0.0, 1.0)) -> SplineBasis:
        """Equally spaced basis with L = n_basis functions."""
        n_interior = int(n_basis) - int(degree) - 1
        if n_interior < 1:
            raise ParameterError(f"L must be at least degree + 2 = {int(degree) + 2}, got: {n_basis}")
        return cls(degree, n_interior, domain)

    @classmethod
    def fromJson(cls, data: dict) -> SplineBasis:
        return cls.fromBreaks(data["breaks"], data["degree"])

    def toJson(self) -> dict:
        return {"degree": self._degree, "breaks": self._breaks.tolist(), "n_basis": self.L}

    def __repr__(self) -> str:
        return f"SplineBasis(degree={self._degree}, K={self.K}, L={self.L}, domain={self._domain})"

    @property
    def degree(self) -> int:
        return self._degree

    @property
    def K(self) -> int:
        return int(self._interior.size)

    @property
    def L(self) -> int:
        return self.K + self._degree + 1

    @property
    def domain(self) -> tuple[float, float]:
        return self._domain

    @property
    def length(self) -> float:
        return self._domain[1] - self._domain[0]

    @property
    def knots(self) -> np.ndarray:
        return self._knots

    @property
    def breaks(self) -> np.ndarray:
        return self._breaks

    def _checkDomain(self, t) -> np.ndarray:
        x = np.asarray(t, dtype=float)
        if x.size and (not np.all(np.isfinite(x)) or x.min() < self._domain[0] or x.max() > self._domain[1]):
            outside = x[~((x >= self._domain[0]) & (x <= self._domain[1]))].ravel()
            raise DomainError(f"Time {outside[0]} outside spline domain [{self._domain[0]}, {self._domain[1]}]")
        return x

    def evaluate(self, t) -> np.ndarray:
        """(B_1(t), ..., B_L(t)); a vector for scalar t, a (len(t), L) matrix otherwise."""
        x = self._checkDomain(t)
        return self._spline(x)

    def evaluateDeriv2(self, t) -> np.ndarray:
        """Second derivatives of the basis functions, zero when d < 2."""
        x = self._checkDomain(t)
        if self._degree < 2:
            return np.zeros(x.shape + (self.L,))
        return self._spline(x, nu=2)

    def _intervalNodes(self, m: int, n_nodes: int) -> tuple[np.ndarray, np.ndarray]:
        """Gauss-Legendre nodes and weights on [tau_{m-1}, tau_m]."""
        nodes, weights = leggauss(n_nodes)
        lo, hi = self._breaks[m - 1], self._breaks[m]
        half = 0.5 * (hi - lo)
        return lo + half * (nodes + 1.0), half * weights

    @cached_property
    def _roughness(self) -> np.ndarray:
        L = self.L
        V = np.zeros((L, L))
        if self._degree >= 2:
            # Integrand has degree 2(d - 2) on each interval
            n_nodes = math.ceil((2 * (self._degree - 2) + 1) / 2) + 1
            for m in range(1, self.K + 2):
                x, w = self._intervalNodes(m, n_nodes)
                D = self._spline(x, nu=2)
                V += (D * w[:, None]).T @ D
        V = 0.5 * (V + V.T)
        V.setflags(write=False)
        return V

    @cached_property
    def _intervalGrams(self) -> tuple[np.ndarray, ...]:
        grams = []
        for m in range(1, self.K + 2):
            x, w = self._intervalNodes(m, self._degree + 1)
            B = self._spline(x)
            T_m = (B * w[:, None]).T @ B
            T_m = 0.5 * (T_m + T_m.T)
            T_m.setflags(write=False)
            grams.append(T_m)
        return tuple(grams)

    def roughnessMatrix(self) -> np.ndarray:
        """V = integral of B''(t) B''(t)^T over the domain."""
        return self._roughness

    def intervalGram(self, m: int) -> np.ndarray:
        """T_m = integral of B(t) B(t)^T over [tau_{m-1}, tau_m], for m in 1..K+1."""
        if not isinstance(m, (int, np.integer)) or not 1 <= m <= self.K + 1:
            raise IndexError(f"Interval index must be in 1..{self.K + 1}, got: {m}")
        return self._intervalGrams[m - 1]

    def intervalGrams(self) -> tuple[np.ndarray, ...]:
        return self._intervalGrams

    def gram(self) -> np.ndarray:
        """Whole-domain Gram matrix, the sum of all T_m."""
        return np.sum(self._intervalGrams, axis=0)

    def supportBlock(self, m: int) -> np.ndarray:
        """Indices of the d + 1 basis functions that are nonzero on interval m."""
        if not 1 <= m <= self.K + 1:
            raise IndexError(f"Interval index must be in 1..{self.K + 1}, got: {m}")
        return np.arange(m - 1, m + self._degree)
