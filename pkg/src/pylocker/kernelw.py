"""Kernel weights for response/covariate time pairs and the kernel-weighted pair design."""
from __future__ import annotations

import logging
from dataclasses import dataclass, replace

import numpy as np
from scipy.stats import truncnorm

from .bspline import SplineBasis
from .longdata import LongDataset
from .utils.exceptions import DomainError, EmptyDatasetError, ParameterError


_logger = logging.getLogger(__name__)

EPANECHNIKOV = "epanechnikov"
TRUNCATED_GAUSSIAN = "truncated_gaussian"
KERNELS = (EPANECHNIKOV, TRUNCATED_GAUSSIAN)

BANDWIDTH_QUANTILE = 0.95
BANDWIDTH_FLOOR = 0.01

# Standard normal renormalized on [-5, 5]
_TRUNCATED_NORMAL = truncnorm(-5.0, 5.0)


def kernelName(name: str) -> str:
    key = str(name).strip().lower().replace("-", "_")
    if key in ("truncatedgaussian", "gaussian", "truncated_normal"):
        key = TRUNCATED_GAUSSIAN
    if key not in KERNELS:
        raise ParameterError(f"Unknown kernel '{name}', expected one of {KERNELS}")
    return key


@dataclass(frozen=True)
class KernelSpec:
    family: str = EPANECHNIKOV
    bandwidth: float = 0.1

    def __post_init__(self):
        object.__setattr__(self, "family", kernelName(self.family))
        bandwidth = float(self.bandwidth)
        if not np.isfinite(bandwidth) or bandwidth <= 0:
            raise ParameterError(f"Kernel bandwidth must be positive, got: {self.bandwidth}")
        object.__setattr__(self, "bandwidth", bandwidth)


def _kernel(family: str, z: np.ndarray) -> np.ndarray:
    if family == EPANECHNIKOV:
        return np.where(np.abs(z) <= 1.0, 0.75 * (1.0 - z * z), 0.0)
    return _TRUNCATED_NORMAL.pdf(z)


def kernelWeight(spec: KernelSpec, u):
    """K_h(u) = K(u / h) / h, elementwise for array u."""
    h = spec.bandwidth
    if not h > 0:
        raise ParameterError(f"Kernel bandwidth must be positive, got: {h}")
    weight = _kernel(spec.family, np.asarray(u, dtype=float) / h) / h
    return float(weight) if np.ndim(weight) == 0 else weight


def defaultBandwidth(ds: LongDataset) -> float:
    """max(0.95-quantile of the per-subject minimum |T - S| gaps, 0.01)."""
    if not ds.subjects:
        raise EmptyDatasetError("Bandwidth needs at least one subject")
    gaps = np.array([subject.minGap() for subject in ds.subjects])
    bandwidth = max(float(np.quantile(gaps, BANDWIDTH_QUANTILE)), BANDWIDTH_FLOOR)
    _logger.debug(f"Bandwidth h={bandwidth:.6g} from {gaps.size} subject gaps")
    return bandwidth


@dataclass(frozen=True, eq=False)
class PairDesign:
    """
    Retained (nonzero weight) response/covariate pairs, ordered by subject,
    then response index, then covariate index. Each row carries the design
    vector (B(S), X(S) B(S)) of length 2L.
    """

    subject: np.ndarray
    weight: np.ndarray
    design: np.ndarray
    response: np.ndarray
    N0: float
    basis: SplineBasis
    subject_ids: tuple[str, ...] = ()

    @property
    def n0(self) -> int:
        return int(self.weight.size)

    @property
    def L(self) -> int:
        return self.basis.L

    @property
    def width(self) -> int:
        return 2 * self.basis.L

    def scaled(self, factor: float) -> PairDesign:
        """Same rows with every weight and N0 multiplied by factor."""
        return replace(self, weight=self.weight * factor, N0=self.N0 * factor)


def pairExpand(ds: LongDataset, basis: SplineBasis, spec: KernelSpec) -> PairDesign:
    """
    Expand every (subject, response time, covariate time) triple into a
    weighted design row, keeping rows with positive kernel weight.
    """
    t_lo, t_hi = basis.domain
    L = basis.L
    subjects, weights, designs, responses = [], [], [], []
    n_total = 0
    for i, subject in enumerate(ds.subjects):
        for times in (subject.response_times, subject.covariate_times):
            outside = times[(times < t_lo) | (times > t_hi)]
            if outside.size:
                raise DomainError(f"Subject '{subject.id}' has time {outside[0]} outside basis domain [{t_lo}, {t_hi}]")

        n_total += subject.nResponse * subject.nCovariate
        w = kernelWeight(spec, subject.response_times[:, None] - subject.covariate_times[None, :])
        j, k = np.nonzero(np.atleast_2d(w) > 0)  # row-major: j outer, k inner
        if not j.size:
            continue

        B = np.atleast_2d(basis.evaluate(subject.covariate_times))
        x_star = np.hstack((B, subject.covariate_values[:, None] * B))
        subjects.append(np.full(j.size, i, dtype=int))
        weights.append(np.atleast_2d(w)[j, k])
        designs.append(x_star[k])
        responses.append(subject.response_values[j])

    if subjects:
        pairs = PairDesign(np.concatenate(subjects), np.concatenate(weights), np.vstack(designs),
                           np.concatenate(responses), n_total, basis, tuple(ds.ids))
    else:
        pairs = PairDesign(np.zeros(0, dtype=int), np.zeros(0), np.zeros((0, 2 * L)), np.zeros(0), n_total, basis,
                           tuple(ds.ids))
    _logger.info(f"Pair design: N0={pairs.N0}, n0={pairs.n0}, h={spec.bandwidth:.6g}, kernel={spec.family}")
    return pairs
