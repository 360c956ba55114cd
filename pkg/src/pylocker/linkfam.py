"""Response families: mean functions, IRLS working quantities and kernel-weighted deviances."""
from __future__ import annotations

import logging
from abc import ABC, abstractmethod

import numpy as np
from scipy.special import expit, xlogy

from .utils.exceptions import NumericError, ParameterError


_logger = logging.getLogger(__name__)

ETA_CLAMP = 30.0
MEAN_FLOOR = 1e-10


def _finite(name: str, *arrays: np.ndarray):
    for array in arrays:
        if not np.all(np.isfinite(array)):
            raise NumericError(f"Non-finite values in {name}")


class Family(ABC):
    """Mean function g with inverse f = g^{-1}, so that f'(g(eta)) = 1 / g'(eta)."""

    name: str = ""

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"

    def toJson(self) -> str:
        return self.name

    def clampEta(self, eta) -> np.ndarray:
        return np.asarray(eta, dtype=float)

    @abstractmethod
    def _mean(self, eta: np.ndarray) -> np.ndarray:
        pass

    @abstractmethod
    def meanDeriv(self, eta) -> np.ndarray:
        """g'(eta) on the clamped predictor."""

    @abstractmethod
    def _deviance(self, weight: np.ndarray, y: np.ndarray, mu: np.ndarray) -> float:
        pass

    def mean(self, eta):
        """g(eta), elementwise."""
        mu = self._mean(self.clampEta(eta))
        return float(mu) if np.ndim(mu) == 0 else mu

    def workingQuantities(self, eta, y) -> tuple[np.ndarray, np.ndarray]:
        """Working response Z = eta + (y - g(eta)) f'(g(eta)) and working weight H = g'(eta)."""
        eta = np.asarray(eta, dtype=float)
        y = np.asarray(y, dtype=float)
        if eta.shape != y.shape:
            raise ParameterError(f"eta and y differ in shape, got: {eta.shape} and {y.shape}")
        _finite("linear predictor or response", eta, y)

        eta = self.clampEta(eta)
        mu = self._mean(eta)
        H = self.meanDeriv(eta)
        Z = eta + (y - mu) / H
        _finite("working quantities", Z, H)
        return Z, H

    def fittedMeans(self, pairs, gamma: np.ndarray) -> np.ndarray:
        return np.asarray(self._mean(self.clampEta(pairs.design @ gamma)))

    def deviance(self, pairs, fitted_means) -> float:
        """Kernel-weighted deviance over the retained pairs."""
        mu = np.asarray(fitted_means, dtype=float)
        if mu.shape != pairs.response.shape:
            raise ParameterError(f"Expected {pairs.response.size} fitted means, got: {mu.size}")
        _finite("fitted means", mu)
        return float(self._deviance(pairs.weight, pairs.response, mu))


class Gaussian(Family):
    name = "gaussian"

    def _mean(self, eta):
        return eta

    def meanDeriv(self, eta):
        return np.ones_like(np.asarray(eta, dtype=float))

    def _deviance(self, weight, y, mu):
        return np.sum(weight * (y - mu) ** 2)


class Bernoulli(Family):
    name = "bernoulli"

    def clampEta(self, eta):
        return np.clip(np.asarray(eta, dtype=float), -ETA_CLAMP, ETA_CLAMP)

    def _mean(self, eta):
        return expit(eta)

    def meanDeriv(self, eta):
        mu = expit(self.clampEta(eta))
        return mu * (1.0 - mu)

    def _deviance(self, weight, y, mu):
        mu = np.clip(mu, MEAN_FLOOR, 1.0 - MEAN_FLOOR)
        # xlogy gives 0 log 0 = 0
        terms = xlogy(y, y) - xlogy(y, mu) + xlogy(1.0 - y, 1.0 - y) - xlogy(1.0 - y, 1.0 - mu)
        return 2.0 * np.sum(weight * terms)


class Poisson(Family):
    name = "poisson"

    def clampEta(self, eta):
        return np.clip(np.asarray(eta, dtype=float), -ETA_CLAMP, ETA_CLAMP)

    def _mean(self, eta):
        return np.exp(eta)

    def meanDeriv(self, eta):
        return np.exp(self.clampEta(eta))

    def _deviance(self, weight, y, mu):
        mu = np.maximum(mu, MEAN_FLOOR)
        # saturated form, differs from 2 sum w (mu - y log mu) by a fit-free term
        terms = xlogy(y, y) - xlogy(y, mu) - (y - mu)
        return 2.0 * np.sum(weight * terms)


FAMILIES: dict[str, type[Family]] = {cls.name: cls for cls in (Gaussian, Bernoulli, Poisson)}


def getFamily(name: str | Family) -> Family:
    """Family by name: 'gaussian', 'bernoulli' or 'poisson'."""
    if isinstance(name, Family):
        return name
    key = str(name).strip().lower()
    if key not in FAMILIES:
        raise ParameterError(f"Unknown family '{name}', expected one of {tuple(FAMILIES)}")
    return FAMILIES[key]()
