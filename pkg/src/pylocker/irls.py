"""Penalized kernel-weighted IRLS with fSCAD shrinkage."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.linalg import LinAlgError, block_diag, cho_factor, cho_solve

from .bspline import SplineBasis
from .fscad import ScadParams, lqaMatrix
from .kernelw import PairDesign
from .linkfam import Family, Gaussian, getFamily
from .utils.exceptions import EmptyDatasetError, NumericError, ParameterError, SingularSystemError


_logger = logging.getLogger(__name__)

JITTER = 1e-10
ZERO_PIVOT = 1e-14
VANISH_GATE = 0.1
SINGULAR_ADVICE = "try a larger roughness parameter rho or a smaller basis dimension L"


@dataclass(frozen=True)
class FitConfig:
    rho0: float = 0.0
    rho1: float = 0.0
    scad: ScadParams = field(default_factory=ScadParams)
    max_iter: int = 100
    tol: float = 1e-6
    shrink_eps: float = 1e-4
    family: Family = field(default_factory=Gaussian)

    def __post_init__(self):
        object.__setattr__(self, "family", getFamily(self.family))
        if not (self.rho0 >= 0 and self.rho1 >= 0):
            raise ParameterError(f"Roughness parameters must be nonnegative, got: {self.rho0}, {self.rho1}")
        if int(self.max_iter) < 1:
            raise ParameterError(f"max_iter must be at least 1, got: {self.max_iter}")
        if not self.tol > 0:
            raise ParameterError(f"tol must be positive, got: {self.tol}")
        if not self.shrink_eps >= 0:
            raise ParameterError(f"shrink_eps must be nonnegative, got: {self.shrink_eps}")

    @property
    def lam(self) -> float:
        return self.scad.lam

    def withTuning(self, rho: float, lam: float) -> FitConfig:
        """Copy with rho0 = rho1 = rho and sparseness parameter lam."""
        return replace(self, rho0=float(rho), rho1=float(rho), scad=replace(self.scad, lam=float(lam)))

    def roughnessPenalty(self, basis: SplineBasis) -> np.ndarray:
        """V_rho = diag(rho0 V, rho1 V)."""
        V = basis.roughnessMatrix()
        return block_diag(self.rho0 * V, self.rho1 * V)

    def toJson(self) -> dict:
        return {"rho0": self.rho0, "rho1": self.rho1, "lambda": self.lam, "scad_a": self.scad.a,
                "max_iter": self.max_iter, "tol": self.tol, "shrink_eps": self.shrink_eps,
                "family": self.family.name}


@dataclass(frozen=True, eq=False)
class FitResult:
    gamma: np.ndarray
    active: np.ndarray
    iterations: int
    converged: bool
    residual: float
    basis: SplineBasis
    config: FitConfig
    active_history: tuple[int, ...] = ()

    @property
    def gamma0(self) -> np.ndarray:
        return self.gamma[:self.basis.L]

    @property
    def gamma1(self) -> np.ndarray:
        return self.gamma[self.basis.L:]

    @property
    def activeSize(self) -> int:
        return int(np.count_nonzero(self.active))

    def evaluateBeta(self, t) -> tuple:
        """(beta0_hat(t), beta1_hat(t)) = (B(t)^T gamma0, B(t)^T gamma1)."""
        B = self.basis.evaluate(t)
        beta0, beta1 = B @ self.gamma0, B @ self.gamma1
        if np.ndim(beta0) == 0:
            return float(beta0), float(beta1)
        return beta0, beta1

    def beta0(self, t):
        return self.evaluateBeta(t)[0]

    def beta1(self, t):
        return self.evaluateBeta(t)[1]


def solveSpd(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve a symmetric positive definite system by Cholesky, retrying once with jitter."""
    diag = np.diag(A)
    scale = float(np.max(np.abs(diag))) if diag.size else 0.0
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
        raise NumericError("Non-finite entries in linear system")
    if scale <= 0 or np.any(diag <= ZERO_PIVOT * scale):
        raise SingularSystemError(f"Singular system, {int(np.sum(diag <= ZERO_PIVOT * scale))} coefficient(s) "
                                  f"carry no information; {SINGULAR_ADVICE}")
    try:
        return cho_solve(cho_factor(A), b)
    except LinAlgError:
        jitter = JITTER * np.trace(A) / A.shape[0]
        _logger.debug(f"Cholesky failed, retrying with jitter {jitter:.3g}")
    try:
        return cho_solve(cho_factor(A + jitter * np.eye(A.shape[0])), b)
    except LinAlgError:
        raise SingularSystemError(f"Singular system after jitter; {SINGULAR_ADVICE}")


def _requireRows(pairs: PairDesign):
    if pairs.n0 < 1:
        raise EmptyDatasetError("Pair design has no pairs with positive kernel weight")


def _dataTerm(pairs: PairDesign, gamma: np.ndarray, cfg: FitConfig) -> tuple[np.ndarray, np.ndarray]:
    """(X'WHX / N0, X'WHZ / N0) with H and Z evaluated at gamma."""
    Z, H = cfg.family.workingQuantities(pairs.design @ gamma, pairs.response)
    WH = pairs.weight * H
    return (pairs.design.T * WH) @ pairs.design / pairs.N0, pairs.design.T @ (WH * Z) / pairs.N0


def _normalSystem(pairs: PairDesign, gamma: np.ndarray, cfg: FitConfig,
                  data: tuple[np.ndarray, np.ndarray] | None = None) -> tuple[np.ndarray, np.ndarray]:
    """(X'WHX / N0 + V_rho + U, X'WHZ / N0) with H, Z and U evaluated at gamma."""
    gram, b = data if data is not None else _dataTerm(pairs, gamma, cfg)
    U = lqaMatrix(gamma[pairs.L:], pairs.basis, cfg.scad).U
    A = gram + cfg.roughnessPenalty(pairs.basis) + U
    return 0.5 * (A + A.T), b


def initialGamma(pairs: PairDesign, cfg: FitConfig) -> np.ndarray:
    """Penalized weighted least squares start (X'WX + N0 V_rho)^{-1} X'WY."""
    _requireRows(pairs)
    A = (pairs.design.T * pairs.weight) @ pairs.design / pairs.N0 + cfg.roughnessPenalty(pairs.basis)
    b = pairs.design.T @ (pairs.weight * pairs.response) / pairs.N0
    return solveSpd(0.5 * (A + A.T), b)


def irlsStep(pairs: PairDesign, gamma_prev: np.ndarray, cfg: FitConfig, active: np.ndarray | None = None,
             data: tuple[np.ndarray, np.ndarray] | None = None) -> tuple[np.ndarray, float]:
    """
    One penalized IRLS update restricted to the active coefficients.

    :param data: precomputed (X'WHX / N0, X'WHZ / N0), valid when H and Z do not depend on gamma
    :return: gamma_next, residual - the max-norm defect of the solved system
    """
    _requireRows(pairs)
    gamma_prev = np.asarray(gamma_prev, dtype=float)
    if not np.all(np.isfinite(gamma_prev)):
        raise NumericError("Non-finite coefficients passed to IRLS step")
    active = np.ones(pairs.width, dtype=bool) if active is None else np.asarray(active, dtype=bool)

    A, b = _normalSystem(pairs, gamma_prev, cfg, data)
    A_act, b_act = A[np.ix_(active, active)], b[active]
    solution = solveSpd(A_act, b_act)

    gamma_next = np.zeros(pairs.width)
    gamma_next[active] = solution
    residual = float(np.max(np.abs(A_act @ solution - b_act))) if solution.size else 0.0
    return gamma_next, residual


def slopeScale(gamma1: np.ndarray) -> float:
    """max(1, ||gamma1||_inf), the scale of the shrink threshold."""
    return max(1.0, float(np.max(np.abs(gamma1), initial=0.0)))


def vanishingSlopes(trail: list[np.ndarray], threshold: float, gate: float) -> np.ndarray:
    """
    Slope coefficients whose last three iterates head below threshold.

    Near zero the LQA update scales a coefficient like x -> b x / (a |x| + c), so 1 / |x|
    follows an affine recursion and Aitken's extrapolation on 1 / |x| gives its limit.
    A coefficient is flagged when it is below gate, keeps its sign, shrinks
    monotonically, and 1 / |x| grows at least geometrically or extrapolates past 1 / threshold.
    """
    if len(trail) < 3:
        return np.zeros(trail[-1].shape if trail else 0, dtype=bool)
    x0, x1, x2 = (np.abs(g) for g in trail[-3:])
    same_sign = (np.sign(trail[-3]) == np.sign(trail[-1])) & (np.sign(trail[-2]) == np.sign(trail[-1]))
    candidate = same_sign & (x2 > 0) & (x2 < x1) & (x1 < x0) & (x2 < gate)
    flagged = np.zeros(x2.shape, dtype=bool)
    if not candidate.any():
        return flagged

    y0, y1, y2 = 1.0 / x0[candidate], 1.0 / x1[candidate], 1.0 / x2[candidate]
    d1, d2 = y1 - y0, y2 - y1
    accelerating = d2 >= d1
    with np.errstate(divide="ignore", invalid="ignore"):
        limit_inv = np.where(accelerating, np.inf, y2 + d2 * d2 / (d1 - d2))
    flagged[candidate] = accelerating | (limit_inv * threshold > 1.0)
    return flagged


def fit(pairs: PairDesign, cfg: FitConfig) -> FitResult:
    """
    Iterate IRLS steps from the penalized least squares start.

    With lambda > 0, a slope coefficient leaves the active set for good once it falls below
    shrink_eps * max(1, ||gamma1||_inf), or once its recent iterates extrapolate below that
    level (see vanishingSlopes). Convergence needs a relative change <= tol with an unchanged
    active set.
    """
    L = pairs.L
    gamma = initialGamma(pairs, cfg)
    active = np.ones(pairs.width, dtype=bool)
    history = [int(active.sum())]
    converged, residual, iterations = False, float("nan"), 0
    data = _dataTerm(pairs, gamma, cfg) if isinstance(cfg.family, Gaussian) else None
    trail: list[np.ndarray] = []

    for iterations in range(1, int(cfg.max_iter) + 1):
        gamma_next, residual = irlsStep(pairs, gamma, cfg, active, data)
        shrunk = 0

        if cfg.lam > 0:
            slope = gamma_next[L:]
            scale = slopeScale(slope)
            threshold = cfg.shrink_eps * scale
            trail.append(slope.copy())
            shrink = active[L:] & (np.abs(slope) < threshold)
            if cfg.shrink_eps > 0:
                shrink |= active[L:] & vanishingSlopes(trail, threshold, VANISH_GATE * scale)
            if shrink.any():
                shrunk = int(shrink.sum())
                active[L:][shrink] = False
                gamma_next[L:][shrink] = 0.0
                trail.clear()
        history.append(int(active.sum()))

        change = np.linalg.norm(gamma_next - gamma) / (np.linalg.norm(gamma) + 1e-12)
        gamma = gamma_next
        _logger.debug(f"IRLS iteration {iterations}: change={change:.3e}, active={history[-1]}, "
                      f"shrunk={shrunk}, residual={residual:.3e}")
        if change <= cfg.tol and not shrunk:
            converged = True
            break

    if not converged:
        _logger.warning(f"IRLS stopped after {iterations} iteration(s) without converging "
                        f"(rho={cfg.rho0:g}, lambda={cfg.lam:g})")

    gamma.setflags(write=False)
    active.setflags(write=False)
    return FitResult(gamma, active, iterations, converged, residual, pairs.basis, cfg, tuple(history))


def fixedPointDefect(pairs: PairDesign, result: FitResult, cfg: FitConfig | None = None) -> float:
    """Max-norm defect of the update system evaluated at the fitted coefficients, on the active set."""
    cfg = cfg or result.config
    A, b = _normalSystem(pairs, np.asarray(result.gamma, dtype=float), cfg)
    active = np.asarray(result.active, dtype=bool)
    return float(np.max(np.abs(A[np.ix_(active, active)] @ result.gamma[active] - b[active]), initial=0.0))
