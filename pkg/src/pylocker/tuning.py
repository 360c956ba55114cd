"""EBIC grid selection of the roughness and sparseness parameters, and cross-validated choice of L."""
from __future__ import annotations

import hashlib
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
import pandas as pd

from . import irls
from .bspline import SplineBasis
from .irls import FitConfig, FitResult, solveSpd
from .kernelw import KernelSpec, PairDesign, defaultBandwidth, pairExpand
from .linkfam import Family, getFamily
from .longdata import LongDataset
from .utils.exceptions import NumericError, ParameterError, PyLockerException, TuningError
from .utils.utils import workerCount


_logger = logging.getLogger(__name__)

DEV_FLOOR = 1e-12
DEFAULT_NU = 0.5
DEFAULT_RHO_GRID = tuple(float(x) for x in np.logspace(-6, -1, 6))
DEFAULT_LAMBDA_GRID = (0.0,) + tuple(float(x) for x in np.logspace(-4, 0, 9))


@dataclass(frozen=True)
class EbicBreakdown:
    dev: float
    df: float
    n0: int
    nu: float
    n_basis: int
    score: float


def ebic(fit_result: FitResult, pairs: PairDesign, cfg: FitConfig | None = None, nu: float = DEFAULT_NU) -> EbicBreakdown:
    """
    log(max(Dev, 1e-12)) + df log(n0) / n0 + nu df log(2L) / n0, with
    df = tr{(X_A'WX_A + N0 V_rho,AA)^{-1} X_A'WX_A} over the active columns A.
    """
    cfg = cfg or fit_result.config
    if not 0.0 <= nu <= 1.0:
        raise ParameterError(f"EBIC nu must lie in [0, 1], got: {nu}")
    n0 = pairs.n0
    if n0 < 1:
        raise NumericError("EBIC needs at least one pair with positive weight")

    family = cfg.family
    dev = family.deviance(pairs, family.fittedMeans(pairs, fit_result.gamma))

    active = np.asarray(fit_result.active, dtype=bool)
    X_act = pairs.design[:, active]
    G = (X_act.T * pairs.weight) @ X_act
    M = G + pairs.N0 * cfg.roughnessPenalty(pairs.basis)[np.ix_(active, active)]
    df = float(np.trace(solveSpd(0.5 * (M + M.T), G))) if active.any() else 0.0

    L = pairs.L
    score = math.log(max(dev, DEV_FLOOR)) + df * math.log(n0) / n0 + nu * df * math.log(2 * L) / n0
    if not math.isfinite(score):
        raise NumericError(f"EBIC is not finite (dev={dev}, df={df})")
    return EbicBreakdown(dev, df, n0, nu, L, score)


@dataclass(eq=False)
class GridCell:
    rho: float
    lam: float
    ebic: EbicBreakdown | None = None
    result: FitResult | None = field(default=None, repr=False)
    error: str = ""

    @property
    def ok(self) -> bool:
        return self.ebic is not None

    @property
    def converged(self) -> bool:
        return self.ok and self.result.converged

    def toRow(self) -> dict:
        row = {"rho": self.rho, "lambda": self.lam, "dev": np.nan, "df": np.nan, "n0": np.nan, "score": np.nan,
               "iterations": np.nan, "converged": False, "active_size": np.nan, "error": self.error}
        if self.ok:
            row.update(dev=self.ebic.dev, df=self.ebic.df, n0=self.ebic.n0, score=self.ebic.score,
                       iterations=self.result.iterations, converged=self.result.converged,
                       active_size=self.result.activeSize)
        return row


@dataclass(eq=False)
class GridSelection:
    rho: float
    lam: float
    best: GridCell
    table: list[GridCell]

    @property
    def result(self) -> FitResult:
        return self.best.result

    @property
    def ebic(self) -> EbicBreakdown:
        return self.best.ebic

    @property
    def failures(self) -> list[GridCell]:
        return [cell for cell in self.table if not cell.ok]

    @property
    def nonConverged(self) -> list[GridCell]:
        """Scored cells whose fit hit max_iter; they are only eligible when no cell converged."""
        return [cell for cell in self.table if cell.ok and not cell.converged]

    def toFrame(self) -> pd.DataFrame:
        return pd.DataFrame([cell.toRow() for cell in self.table])


def _fitCell(pairs: PairDesign, cfg: FitConfig, nu: float) -> GridCell:
    cell = GridCell(cfg.rho0, cfg.lam)
    try:
        cell.result = irls.fit(pairs, cfg)
        cell.ebic = ebic(cell.result, pairs, cfg, nu)
    except PyLockerException as e:
        cell.result, cell.ebic, cell.error = None, None, f"{type(e).__name__}: {e}"
    return cell


def selectRhoLambda(pairs: PairDesign, family: str | Family = "gaussian", rho_grid: Sequence[float] | None = None,
                    lambda_grid: Sequence[float] | None = None, base: FitConfig | None = None,
                    nu: float = DEFAULT_NU, workers: int | None = None) -> GridSelection:
    """
    Fit every (rho, lambda) pair with rho0 = rho1 = rho and keep the smallest
    EBIC among converged fits, breaking ties toward larger lambda and then larger rho.
    """
    rho_grid = DEFAULT_RHO_GRID if rho_grid is None else tuple(float(r) for r in rho_grid)
    lambda_grid = DEFAULT_LAMBDA_GRID if lambda_grid is None else tuple(float(x) for x in lambda_grid)
    if not rho_grid or not lambda_grid:
        raise ParameterError("Tuning grids must not be empty")

    base = base or FitConfig()
    if family is not None:
        base = replace(base, family=getFamily(family))
    configs = [base.withTuning(rho, lam) for rho in rho_grid for lam in lambda_grid]

    workers = workers or workerCount()
    if workers > 1 and len(configs) > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            table = list(executor.map(lambda cfg: _fitCell(pairs, cfg, nu), configs))
    else:
        table = [_fitCell(pairs, cfg, nu) for cfg in configs]

    scored = [cell for cell in table if cell.ok]
    if not scored:
        failures = [f"rho={cell.rho:g}, lambda={cell.lam:g}: {cell.error}" for cell in table]
        raise TuningError(f"All {len(table)} grid fits failed; first: {failures[0]}", failures)
    if len(scored) < len(table):
        _logger.warning(f"{len(table) - len(scored)} of {len(table)} grid fits failed")

    eligible = [cell for cell in scored if cell.converged]
    if not eligible:
        _logger.warning(f"None of {len(scored)} grid fits converged; selecting among all of them")
        eligible = scored
    elif len(eligible) < len(scored):
        _logger.warning(f"{len(scored) - len(eligible)} of {len(scored)} grid fits did not converge and are excluded")

    best = min(eligible, key=lambda cell: (cell.ebic.score, -cell.lam, -cell.rho))
    _logger.info(f"EBIC selected rho={best.rho:g}, lambda={best.lam:g} (score={best.ebic.score:.6g}, "
                 f"df={best.ebic.df:.3f}, active={best.result.activeSize})")
    return GridSelection(best.rho, best.lam, best, table)


def foldOf(subject_id: str, seed: int, folds: int) -> int:
    """Fold index from sha256 of 'seed:subject_id'."""
    digest = hashlib.sha256(f"{seed}:{subject_id}".encode("utf-8")).hexdigest()
    return int(digest, 16) % folds


@dataclass(eq=False)
class CvSelection:
    L: int
    folds: pd.DataFrame
    table: pd.DataFrame


def _foldScore(ds: LongDataset, family: Family, L: int, degree: int, kernel: str, train_ids: set[str],
               test_ids: set[str], rho_grid, lambda_grid, base: FitConfig, nu: float, workers: int) -> dict:
    train, test = ds.subset(train_ids), ds.subset(test_ids)
    spec = KernelSpec(kernel, defaultBandwidth(train))
    basis = SplineBasis.fromSize(L, degree, ds.domain)
    train_pairs = pairExpand(train, basis, spec)
    if train_pairs.n0 == 0:
        return {"skipped": "training fold has no pairs with positive weight"}
    test_pairs = pairExpand(test, basis, spec)
    if test_pairs.n0 == 0:
        return {"skipped": "held-out fold has no pairs with positive weight"}

    selection = selectRhoLambda(train_pairs, family, rho_grid, lambda_grid, base, nu, workers)
    score = family.deviance(test_pairs, family.fittedMeans(test_pairs, selection.result.gamma))
    return {"cv_score": score, "rho": selection.rho, "lambda": selection.lam, "bandwidth": spec.bandwidth}


def selectL(ds: LongDataset, family: str | Family, candidate_ls: Sequence[int], folds: int = 5, seed: int = 0,
            degree: int = 3, kernel: str = "epanechnikov", rho_grid: Sequence[float] | None = None,
            lambda_grid: Sequence[float] | None = None, base: FitConfig | None = None, nu: float = DEFAULT_NU,
            workers: int | None = None) -> CvSelection:
    """
    Subject-level K-fold cross-validation of the basis dimension. Each
    training fold picks (rho, lambda) by EBIC; held-out subjects are scored
    with the kernel-weighted deviance. Returns the L with the smallest mean score.
    """
    family = getFamily(family)
    candidate_ls = sorted({int(L) for L in candidate_ls})
    if not candidate_ls:
        raise ParameterError("At least one candidate L is required")
    if candidate_ls[0] < degree + 2:
        raise ParameterError(f"Candidate L must be at least degree + 2 = {degree + 2}, got: {candidate_ls[0]}")
    if int(folds) < 2:
        raise ParameterError(f"At least 2 folds are required, got: {folds}")
    if ds.n < folds:
        raise ParameterError(f"{ds.n} subjects cannot fill {folds} folds")

    ds = ds.sortedById()
    assignment = {subject_id: foldOf(subject_id, seed, folds) for subject_id in ds.ids}
    all_ids = set(assignment)
    rows = []
    for L in candidate_ls:
        for fold in range(folds):
            test_ids = {i for i, f in assignment.items() if f == fold}
            row = {"L": L, "fold": fold, "n_test": len(test_ids), "cv_score": np.nan, "rho": np.nan,
                   "lambda": np.nan, "bandwidth": np.nan, "skipped": ""}
            if not test_ids or test_ids == all_ids:
                row["skipped"] = "empty fold"
            else:
                try:
                    row.update(_foldScore(ds, family, L, degree, kernel, all_ids - test_ids, test_ids, rho_grid,
                                          lambda_grid, base, nu, workers))
                except TuningError as e:
                    row["skipped"] = f"tuning failed: {e}"
            if row["skipped"]:
                _logger.warning(f"CV fold {fold} for L={L} skipped: {row['skipped']}")
            rows.append(row)

    fold_frame = pd.DataFrame(rows)
    scored = fold_frame[fold_frame["skipped"] == ""]
    if scored.empty:
        raise TuningError("Every cross-validation fold was skipped")

    table = (scored.groupby("L", sort=True)["cv_score"].agg(["mean", "count"])
             .rename(columns={"mean": "cv_score", "count": "n_folds"})
             .reindex(candidate_ls).rename_axis("L").reset_index())
    table["n_folds"] = table["n_folds"].fillna(0).astype(int)
    valid = table.dropna(subset=["cv_score"])
    L_best = int(valid.sort_values(["cv_score", "L"], kind="stable").iloc[0]["L"])
    _logger.info(f"Cross-validation selected L={L_best}")
    return CvSelection(L_best, fold_frame, table)
