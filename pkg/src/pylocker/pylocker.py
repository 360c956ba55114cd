from __future__ import annotations

import logging
from dataclasses import replace

import numpy as np
import pandas as pd

from .bspline import SplineBasis
from .fscad import ScadParams
from .irls import FitConfig, FitResult, fit
from .kernelw import KernelSpec, PairDesign, defaultBandwidth, pairExpand
from .linkfam import getFamily
from .longdata import LongDataset, loadCsv, rescaleTime
from .tuning import CvSelection, GridSelection, selectL, selectRhoLambda
from .utils import Env, file
from .utils.exceptions import ParameterError
from .version import PROJECT_NAME, VERSION


_logger = logging.getLogger(__name__)

SUMMARY_NAME = "fit_summary.json"
CURVES_NAME = "curves.csv"
UNPENALIZED_CURVES_NAME = "curves_unpenalized.csv"


def curvesFrame(result: FitResult, points: int = 201) -> pd.DataFrame:
    """beta0_hat and beta1_hat on an equally spaced grid over the basis domain."""
    if int(points) < 2:
        raise ParameterError(f"A curve grid needs at least 2 points, got: {points}")
    grid = np.linspace(*result.basis.domain, int(points))
    beta0, beta1 = result.evaluateBeta(grid)
    return pd.DataFrame({"t": grid, "beta0_hat": beta0, "beta1_hat": beta1})


def resultFromSummary(summary: dict) -> FitResult:
    """Rebuild an evaluable fit from a saved summary."""
    basis = SplineBasis.fromJson(summary["basis"])
    gamma = np.asarray(summary["gamma"], dtype=float)
    if gamma.shape != (2 * basis.L,):
        raise ParameterError(f"Summary holds {gamma.size} coefficients, basis needs {2 * basis.L}")
    tuning = summary["tuning"]
    cfg = FitConfig(tuning["rho0"], tuning["rho1"], ScadParams(tuning["lambda"], tuning["scad_a"]),
                    family=summary["family"])
    return FitResult(gamma, gamma != 0, summary["iterations"], summary["converged"], summary["residual"], basis, cfg)


class Locker:
    """Load, tune and fit pipeline for one dataset, configured from env.config."""

    def __init__(self, env: Env):
        self.env: Env = env
        self.env.locker = self

        self.dataset: LongDataset | None = None
        self.time_domain: tuple[float, float] | None = None
        self.kernel: KernelSpec | None = None
        self.basis: SplineBasis | None = None
        self.pairs: PairDesign | None = None
        self.cv: CvSelection | None = None
        self.selection: GridSelection | None = None
        self.result: FitResult | None = None

    @property
    def config(self) -> dict:
        return self.env.config.get(PROJECT_NAME)

    @property
    def family(self):
        return getFamily(self.config.get("family", "gaussian"))

    def baseConfig(self) -> FitConfig:
        config = self.config
        return FitConfig(scad=ScadParams(0.0, config.get("scad_a", 3.7)), max_iter=config.get("max_iter", 100),
                         tol=config.get("tol", 1e-6), shrink_eps=config.get("shrink_eps", 1e-4), family=self.family)

    def loadData(self, response_path: str, covariate_path: str, domain: tuple[float, float] | None = None,
                 rescale: bool = True) -> LongDataset:
        dataset = loadCsv(response_path, covariate_path, domain)
        self.time_domain = dataset.domain
        self.dataset = rescaleTime(dataset) if rescale else dataset
        return self.dataset

    def selectBasisSize(self, candidate_ls: list[int]) -> CvSelection:
        """Choose L by cross-validation and store it as n_basis."""
        config = self.config
        self.cv = selectL(self.dataset, self.family, candidate_ls, config.get("folds", 5), config.get("seed", 0),
                          config.get("degree", 3), config.get("kernel", "epanechnikov"), config.get("rho_grid"),
                          config.get("lambda_grid"), self.baseConfig(), config.get("nu", 0.5), self.env.threads)
        config["n_basis"] = self.cv.L
        return self.cv

    def prepare(self, bandwidth: float | None = None) -> PairDesign:
        """Build the basis, kernel and pair design for the loaded dataset."""
        if self.dataset is None:
            raise ParameterError("No dataset loaded")
        config = self.config
        self.basis = SplineBasis.fromSize(config.get("n_basis", 13), config.get("degree", 3), self.dataset.domain)
        self.kernel = KernelSpec(config.get("kernel", "epanechnikov"), bandwidth or defaultBandwidth(self.dataset))
        _logger.info(f"Bandwidth h={self.kernel.bandwidth:.6g}, {self.basis}")
        self.pairs = pairExpand(self.dataset, self.basis, self.kernel)
        return self.pairs

    def tune(self) -> GridSelection:
        config = self.config
        self.selection = selectRhoLambda(self.pairs, self.family, config.get("rho_grid"), config.get("lambda_grid"),
                                         self.baseConfig(), config.get("nu", 0.5), self.env.threads)
        self.result = self.selection.result
        return self.selection

    def fitUnpenalized(self) -> FitResult:
        """Refit at the selected roughness parameter with lambda = 0."""
        if self.selection is None:
            raise ParameterError("Tuning must run before the unpenalized comparison fit")
        return fit(self.pairs, replace(self.selection.result.config, scad=replace(self.selection.result.config.scad,
                                                                                   lam=0.0)))

    def summary(self) -> dict:
        result, ebic = self.result, self.selection.ebic
        return {
            "version": VERSION,
            "family": self.family.name,
            "n_subjects": self.dataset.n,
            "time_domain": list(self.time_domain or self.dataset.domain),
            "basis": self.basis.toJson(),
            "kernel": {"family": self.kernel.family, "bandwidth": self.kernel.bandwidth},
            "pairs": {"N0": self.pairs.N0, "n0": self.pairs.n0},
            "tuning": {**result.config.toJson(), "rho": self.selection.rho},
            "ebic": {"dev": ebic.dev, "df": ebic.df, "n0": ebic.n0, "nu": ebic.nu, "score": ebic.score},
            "cv": None if self.cv is None else {"L": self.cv.L, "table": self.cv.table.to_dict(orient="records")},
            "iterations": result.iterations,
            "converged": result.converged,
            "residual": result.residual,
            "active_size": result.activeSize,
            "gamma": result.gamma,
        }

    def saveSummary(self, out_dir: str, name: str = SUMMARY_NAME):
        file.save(out_dir, name, self.summary())
        _logger.info(f"Summary saved as '{name}'")

    def saveCurves(self, out_dir: str, result: FitResult | None = None, name: str = CURVES_NAME):
        file.save(out_dir, name, curvesFrame(result or self.result, self.config.get("curve_points", 201)))
        _logger.info(f"Curves saved as '{name}'")
