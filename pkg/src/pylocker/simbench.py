"""Simulation designs, accuracy metrics and the Monte Carlo benchmark runner."""
from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from .bspline import SplineBasis
from .irls import FitConfig
from .kernelw import KernelSpec, defaultBandwidth, pairExpand
from .fscad import DEFAULT_A, ScadParams
from .linkfam import getFamily
from .longdata import LongDataset, Subject
from .tuning import DEFAULT_NU, selectL, selectRhoLambda
from .utils.exceptions import BenchmarkError, NumericError, ParameterError, PyLockerException
from .utils.utils import workerCount


_logger = logging.getLogger(__name__)

METRIC_GRID = np.linspace(0.0, 1.0, 1001)
ZERO_TOL = 1e-8

COVARIATE_DEGREE = 4
COVARIATE_INTERIOR_KNOTS = 69
TRUTH_DEGREE = 3
TRUTH_INTERIOR_KNOTS = 9

BERNOULLI_RANGE = (0.01, 0.99)
POISSON_FLOOR = 0.01


@dataclass(frozen=True)
class Scenario:
    """
    A simulation setting. synchronous=True observes the covariate at the
    response times; n_basis fixes L for the fit (None defers to the options).
    Responses have mean g(beta0 + beta1 X) for the family link g; identity_mean=True
    uses beta0 + beta1 X itself, clamped into the family's range.
    """

    family: str = "gaussian"
    sparse: bool = False
    n: int = 200
    m: float = 20.0
    seed: int = 0
    synchronous: bool = False
    n_basis: int | None = None
    identity_mean: bool = False

    def __post_init__(self):
        object.__setattr__(self, "family", getFamily(self.family).name)
        if int(self.n) < 1:
            raise ParameterError(f"Scenario needs at least one subject, got: {self.n}")
        if not float(self.m) > 0:
            raise ParameterError(f"Observation intensity m must be positive, got: {self.m}")

    @property
    def name(self) -> str:
        parts = [self.family, "sparse" if self.sparse else "nonsparse", f"m{self.m:g}"]
        if self.synchronous:
            parts.append("sync")
        if self.n_basis:
            parts.append(f"L{self.n_basis}")
        if self.identity_mean and self.family != "gaussian":
            parts.append("identity")
        return "-".join(parts)


_TRUTH_BASIS = SplineBasis(TRUTH_DEGREE, TRUTH_INTERIOR_KNOTS)
_COVARIATE_BASIS = SplineBasis(COVARIATE_DEGREE, COVARIATE_INTERIOR_KNOTS)


def beta0True(t):
    return np.cos(2.0 * np.pi * np.asarray(t, dtype=float))


def beta1Nonsparse(t):
    return np.sin(2.0 * np.pi * np.asarray(t, dtype=float))


def beta1Sparse(t):
    """2 (B_6 + B_7) on the cubic nine-knot basis, zero outside [0.2, 0.7]."""
    B = _TRUTH_BASIS.evaluate(t)
    return 2.0 * (B[..., 5] + B[..., 6])


@dataclass(frozen=True, eq=False)
class TrueFunctions:
    sparse: bool
    covariate_basis: SplineBasis = _COVARIATE_BASIS
    clampRate: float = 0.0

    def beta0(self, t):
        return beta0True(t)

    def beta1(self, t):
        return beta1Sparse(t) if self.sparse else beta1Nonsparse(t)

    def curves(self, points: int = 201) -> pd.DataFrame:
        grid = np.linspace(0.0, 1.0, points)
        return pd.DataFrame({"t": grid, "beta0": self.beta0(grid), "beta1": self.beta1(grid)})


def genDataset(scenario: Scenario) -> tuple[LongDataset, TrueFunctions]:
    """Draw one dataset; identical scenarios give identical datasets."""
    rng = np.random.default_rng(scenario.seed)
    truth = TrueFunctions(scenario.sparse)
    family = getFamily(scenario.family)
    identity = scenario.identity_mean or family.name == "gaussian"
    subjects, clamped, drawn = [], 0, 0

    for i in range(int(scenario.n)):
        n_response = int(rng.poisson(scenario.m)) + 1
        n_covariate = n_response if scenario.synchronous else int(rng.poisson(scenario.m)) + 1
        coefficients = rng.standard_normal(truth.covariate_basis.L)
        response_times = rng.uniform(0.0, 1.0, n_response)
        covariate_times = response_times.copy() if scenario.synchronous else rng.uniform(0.0, 1.0, n_covariate)

        covariate_values = truth.covariate_basis.evaluate(covariate_times) @ coefficients
        x_at_response = truth.covariate_basis.evaluate(response_times) @ coefficients
        eta = truth.beta0(response_times) + truth.beta1(response_times) * x_at_response
        mu = eta if identity else family.mean(eta)

        if family.name == "gaussian":
            responses = rng.normal(mu, 1.0)
        elif family.name == "bernoulli":
            p = np.clip(mu, *BERNOULLI_RANGE) if identity else mu
            clamped += int(np.count_nonzero(p != mu))
            responses = rng.binomial(1, p).astype(float)
        else:
            rate = np.maximum(mu, POISSON_FLOOR) if identity else mu
            clamped += int(np.count_nonzero(rate != mu))
            responses = rng.poisson(rate).astype(float)
        drawn += n_response

        subjects.append(Subject(f"S{i + 1:05d}", response_times, responses, covariate_times, covariate_values))

    clamp_rate = clamped / drawn if drawn else 0.0
    if clamp_rate > 0:
        _logger.info(f"Scenario {scenario.name}: {clamp_rate:.1%} of response means clamped")
    return LongDataset(tuple(subjects), (0.0, 1.0)), replace(truth, clampRate=clamp_rate)


def ise(estimate: Callable, truth: Callable) -> float:
    """Integrated squared error on [0, 1], trapezoid rule over 1001 points."""
    diff = np.asarray(estimate(METRIC_GRID), dtype=float) - np.asarray(truth(METRIC_GRID), dtype=float)
    if not np.all(np.isfinite(diff)):
        raise NumericError("Non-finite function values in ISE")
    return float(trapezoid(diff * diff, METRIC_GRID))


def tpfn(beta1_hat: Callable, beta1_true: Callable) -> tuple[float | None, float]:
    """
    Zero-region identification on the 1001-point grid. TP is the share of
    true zeros estimated as zero (None without true zeros), FN the share of
    true nonzeros estimated as zero. Isolated zero crossings of the truth
    count as neither.
    """
    zero_hat = np.abs(np.asarray(beta1_hat(METRIC_GRID), dtype=float)) < ZERO_TOL
    zero_point = np.abs(np.asarray(beta1_true(METRIC_GRID), dtype=float)) < ZERO_TOL
    padded = np.pad(zero_point, 1)
    zero_true = zero_point & (padded[:-2] | padded[2:])
    nonzero_true = ~zero_point
    n_zero, n_nonzero = int(zero_true.sum()), int(nonzero_true.sum())
    tp = float(np.sum(zero_true & zero_hat)) / n_zero if n_zero else None
    fn = float(np.sum(nonzero_true & zero_hat)) / n_nonzero if n_nonzero else 0.0
    return tp, fn


@dataclass(frozen=True)
class BenchOptions:
    """Fit settings shared by every replicate. cv_ls selects L by cross-validation instead of n_basis."""

    n_basis: int = 13
    degree: int = 3
    kernel: str = "epanechnikov"
    rho_grid: tuple[float, ...] | None = None
    lambda_grid: tuple[float, ...] | None = None
    cv_ls: tuple[int, ...] | None = None
    folds: int = 5
    scad_a: float = DEFAULT_A
    nu: float = DEFAULT_NU
    max_iter: int = 100
    tol: float = 1e-6
    shrink_eps: float = 1e-4
    workers: int | None = None

    def fitConfig(self, family: str) -> FitConfig:
        return FitConfig(scad=ScadParams(0.0, self.scad_a), max_iter=self.max_iter, tol=self.tol,
                         shrink_eps=self.shrink_eps, family=family)


@dataclass(frozen=True)
class ReplicateOutcome:
    seed: int
    L: int = 0
    ise0: float = math.nan
    ise1: float = math.nan
    tp: float | None = None
    fn: float = math.nan
    clamp_rate: float = 0.0
    rho: float = math.nan
    lam: float = math.nan
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def runReplicate(scenario: Scenario, options: BenchOptions) -> ReplicateOutcome:
    """Generate, tune, fit and score one dataset."""
    try:
        ds, truth = genDataset(scenario)
        family = scenario.family
        base = options.fitConfig(family)
        if options.cv_ls:
            L = selectL(ds, family, options.cv_ls, options.folds, scenario.seed, options.degree, options.kernel,
                        options.rho_grid, options.lambda_grid, base, options.nu, workers=1).L
        else:
            L = int(scenario.n_basis or options.n_basis)
        basis = SplineBasis.fromSize(L, options.degree, ds.domain)
        pairs = pairExpand(ds, basis, KernelSpec(options.kernel, defaultBandwidth(ds)))
        selection = selectRhoLambda(pairs, family, options.rho_grid, options.lambda_grid, base, options.nu, workers=1)
        result = selection.result

        tp, fn = tpfn(result.beta1, truth.beta1)
        return ReplicateOutcome(scenario.seed, L, ise(result.beta0, truth.beta0), ise(result.beta1, truth.beta1),
                                tp, fn, truth.clampRate, selection.rho, selection.lam)
    except PyLockerException as e:
        _logger.warning(f"Replicate seed={scenario.seed} of {scenario.name} failed: {e}")
        return ReplicateOutcome(scenario.seed, error=f"{type(e).__name__}: {e}")


def _meanSd(values: Sequence[float]) -> tuple[float, float]:
    values = np.asarray([v for v in values if v is not None], dtype=float)
    if not values.size:
        return math.nan, math.nan
    sd = float(np.std(values, ddof=1)) if values.size > 1 else 0.0
    return float(np.mean(values)), sd


@dataclass(eq=False)
class BenchRow:
    scenario: Scenario
    L: str
    outcomes: list[ReplicateOutcome]
    runtime: float = 0.0

    @property
    def successes(self) -> list[ReplicateOutcome]:
        return [o for o in self.outcomes if o.ok]

    @property
    def failures(self) -> int:
        return len(self.outcomes) - len(self.successes)

    def toRow(self) -> dict:
        ok = self.successes
        ise0, ise0_sd = _meanSd([o.ise0 for o in ok])
        ise1, ise1_sd = _meanSd([o.ise1 for o in ok])
        tp, tp_sd = _meanSd([o.tp for o in ok])
        fn, fn_sd = _meanSd([o.fn for o in ok])
        clamp, _ = _meanSd([o.clamp_rate for o in ok])
        return {
            "scenario": self.scenario.name, "family": self.scenario.family, "sparse": self.scenario.sparse,
            "synchronous": self.scenario.synchronous, "identity_mean": self.scenario.identity_mean,
            "n": self.scenario.n, "m": self.scenario.m, "L": self.L,
            "replicates": len(self.outcomes), "failures": self.failures,
            "ise0_mean": ise0, "ise0_sd": ise0_sd, "ise1_mean": ise1, "ise1_sd": ise1_sd,
            "tp_mean": tp, "tp_sd": tp_sd, "fn_mean": fn, "fn_sd": fn_sd, "clamp_rate": clamp,
        }


@dataclass(eq=False)
class BenchReport:
    rows: list[BenchRow] = field(default_factory=list)

    @property
    def runtime(self) -> float:
        return sum(row.runtime for row in self.rows)

    @property
    def failedScenarios(self) -> list[str]:
        return [row.scenario.name for row in self.rows if not row.successes]

    def toFrame(self) -> pd.DataFrame:
        return pd.DataFrame([row.toRow() for row in self.rows])

    def toText(self) -> str:
        """Aligned table with mean (sd) cells; TP shows '-' when the truth has no zero region."""
        def cell(mean: float, sd: float) -> str:
            return "-" if math.isnan(mean) else f"{mean:.4f} ({sd:.4f})"

        header = ["Scenario", "n", "L", "R", "Failed", "ISE0", "ISE1", "TP", "FN"]
        lines = [header]
        for row in (r.toRow() for r in self.rows):
            lines.append([row["scenario"], str(row["n"]), str(row["L"]), str(row["replicates"]), str(row["failures"]),
                          cell(row["ise0_mean"], row["ise0_sd"]), cell(row["ise1_mean"], row["ise1_sd"]),
                          cell(row["tp_mean"], row["tp_sd"]), cell(row["fn_mean"], row["fn_sd"])])
        widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
        text = ["  ".join(value.ljust(widths[i]) if i == 0 else value.rjust(widths[i])
                          for i, value in enumerate(line)) for line in lines]
        text.insert(1, "  ".join("-" * w for w in widths))
        return "\n".join(text) + "\n"

    def check(self):
        """Raise when a scenario has no successful replicate."""
        failed = self.failedScenarios
        if failed:
            raise BenchmarkError(f"No successful replicate for scenario(s): {', '.join(failed)}")


def runBenchmark(scenarios: Sequence[Scenario], replicates: int, options: BenchOptions | None = None) -> BenchReport:
    """
    Run R replicates per scenario, replicate r using seed = scenario.seed + r,
    and aggregate the accuracy metrics. Failed replicates are counted and left
    out of the aggregates.
    """
    if int(replicates) < 1:
        raise ParameterError(f"At least one replicate is required, got: {replicates}")
    options = options or BenchOptions()
    workers = options.workers or workerCount()

    report = BenchReport()
    for scenario in scenarios:
        start = time.perf_counter()
        runs = [replace(scenario, seed=scenario.seed + r) for r in range(int(replicates))]
        if workers > 1 and len(runs) > 1:
            with ThreadPoolExecutor(max_workers=workers) as executor:
                outcomes = list(executor.map(lambda sc: runReplicate(sc, options), runs))
        else:
            outcomes = [runReplicate(sc, options) for sc in runs]

        sizes = sorted({o.L for o in outcomes if o.ok})
        L = "cv" if options.cv_ls else str(scenario.n_basis or options.n_basis)
        if options.cv_ls and len(sizes) == 1:
            L = str(sizes[0])
        row = BenchRow(scenario, L, outcomes, time.perf_counter() - start)
        report.rows.append(row)

        summary = row.toRow()
        _logger.info(f"{scenario.name}: ISE0={summary['ise0_mean']:.4f}, ISE1={summary['ise1_mean']:.4f}, "
                     f"failures={row.failures}/{len(outcomes)}, runtime={row.runtime:.1f}s")
    return report


def runLSweep(scenario: Scenario, ls: Sequence[int], replicates: int, options: BenchOptions | None = None) -> BenchReport:
    """Benchmark one scenario at each fixed basis dimension in ls, one row per L."""
    options = replace(options or BenchOptions(), cv_ls=None)
    report = BenchReport()
    for L in ls:
        report.rows.extend(runBenchmark([replace(scenario, n_basis=int(L))], replicates, options).rows)
    return report


def presetScenarios(name: str, n: int = 200, seed: int = 2024) -> list[Scenario]:
    """Named scenario sets for the benchmark command."""
    name = name.strip().lower()
    grid = [(sparse, m) for sparse in (False, True) for m in (15.0, 20.0)]
    if name in ("gaussian", "bernoulli", "poisson"):
        return [Scenario(name, sparse, n, m, seed) for sparse, m in grid]
    if name == "all":
        return [Scenario(family, sparse, n, m, seed)
                for family in ("gaussian", "bernoulli", "poisson") for sparse, m in grid]
    if name == "lsweep":
        return [Scenario("gaussian", sparse, n, 15.0, seed, synchronous=True, n_basis=L)
                for sparse in (True, False) for L in (10, 13, 20)]
    if name == "identity":
        return [Scenario(family, sparse, n, m, seed, identity_mean=True)
                for family in ("bernoulli", "poisson") for sparse, m in grid]
    raise ParameterError(f"Unknown scenario preset '{name}'")
