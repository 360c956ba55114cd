from __future__ import annotations

import argparse
import json
import logging
import sys
from os import path as os_path

from . import closeEnv, loadEnv
from .linkfam import getFamily
from .pylocker import CURVES_NAME, UNPENALIZED_CURVES_NAME, Locker, curvesFrame, resultFromSummary
from .simbench import BenchOptions, Scenario, genDataset, presetScenarios, runBenchmark, runLSweep
from .utils import Env, file, makePath
from .utils.exceptions import EXIT_IO, EXIT_OK, EXIT_USAGE, EXIT_NUMERIC, ParameterError, PyLockerException
from .version import PROJECT_NAME, PROJECT_NAME_TEXT, VERSION


_logger = logging.getLogger(__name__)

COMMANDS = ("fit", "simulate", "tune", "benchmark", "curves")
SETTINGS_NAME = "settings"

# flag attribute -> [pylocker] option
MODEL_OPTIONS = {
    "family": "family",
    "L": "n_basis",
    "degree": "degree",
    "kernel": "kernel",
    "folds": "folds",
    "seed": "seed",
    "rho_grid": "rho_grid",
    "lambda_grid": "lambda_grid",
    "points": "curve_points",
}


class _ArgumentParser(argparse.ArgumentParser):
    """Reports usage problems as ParameterError instead of exiting."""

    def error(self, message):
        raise ParameterError(f"{self.prog}: {message}")


def _floatList(value: str) -> tuple[float, ...]:
    try:
        values = tuple(float(x) for x in value.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated numbers, got: '{value}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _intList(value: str) -> tuple[int, ...]:
    try:
        values = tuple(int(x) for x in value.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got: '{value}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one integer")
    return values


def _bool(value: str) -> bool:
    key = str(value).strip().lower()
    if key in ("1", "true", "yes", "y", "on"):
        return True
    if key in ("0", "false", "no", "n", "off"):
        return False
    raise argparse.ArgumentTypeError(f"expected a boolean, got: '{value}'")


def _domain(value: str) -> tuple[float, float]:
    bounds = _floatList(value)
    if len(bounds) != 2:
        raise argparse.ArgumentTypeError(f"expected LO,HI, got: '{value}'")
    return bounds[0], bounds[1]


def buildParser() -> argparse.ArgumentParser:
    parser = _ArgumentParser(prog=PROJECT_NAME, description=f"{PROJECT_NAME_TEXT} {VERSION}")
    parser.add_argument("--version", action="version", version=f"{PROJECT_NAME_TEXT} {VERSION}")
    commands = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    common = _ArgumentParser(add_help=False)
    common.add_argument("--config", default="", help="Config file merged over the packaged defaults")
    common.add_argument("--out", default=".", help="Output directory")
    common.add_argument("--log-level", default=None, help="Console log level")

    model = _ArgumentParser(add_help=False)
    model.add_argument("--family", default=None, help="gaussian, bernoulli or poisson")
    model.add_argument("--L", type=int, default=None, help="Number of basis functions")
    model.add_argument("--degree", type=int, default=None, help="Spline degree")
    model.add_argument("--kernel", default=None, help="epanechnikov or truncated_gaussian")
    model.add_argument("--rho-grid", type=_floatList, default=None, help="Roughness grid, comma separated")
    model.add_argument("--lambda-grid", type=_floatList, default=None, help="Sparseness grid, comma separated")
    model.add_argument("--folds", type=int, default=None, help="Cross-validation folds")
    model.add_argument("--cv-ls", type=_intList, default=None, help="Candidate L values for cross-validation")
    model.add_argument("--seed", type=int, default=None, help="Seed for folds or simulation")

    data = _ArgumentParser(add_help=False)
    data.add_argument("--response", required=True, help="Response CSV (subject_id,time,value)")
    data.add_argument("--covariate", required=True, help="Covariate CSV (subject_id,time,value)")
    data.add_argument("--domain", type=_domain, default=None, help="Explicit time domain LO,HI")
    data.add_argument("--bandwidth", type=float, default=None, help="Kernel bandwidth override")

    fit = commands.add_parser("fit", parents=[common, model, data], help="Tune and fit a dataset")
    fit.add_argument("--points", type=int, default=None, help="Curve grid size")
    fit.add_argument("--compare-unpenalized", action="store_true",
                     help="Also write curves refitted with lambda = 0")

    commands.add_parser("tune", parents=[common, model, data], help="Write the EBIC grid and CV tables")

    scenario = _ArgumentParser(add_help=False)
    scenario.add_argument("--family", default=None, help="gaussian, bernoulli or poisson")
    scenario.add_argument("--sparse", type=_bool, nargs="?", const=True, default=False, help="Locally sparse beta1")
    scenario.add_argument("--synchronous", type=_bool, nargs="?", const=True, default=False,
                          help="Observe the covariate at the response times")
    scenario.add_argument("--identity-mean", type=_bool, nargs="?", const=True, default=False,
                          help="Use beta0 + beta1 X as the response mean instead of its inverse link")
    scenario.add_argument("--n", type=int, default=None, help="Number of subjects")
    scenario.add_argument("--m", type=float, default=None, help="Observation intensity")
    scenario.add_argument("--seed", type=int, default=None, help="Base seed")

    simulate = commands.add_parser("simulate", parents=[common, scenario], help="Generate a simulated dataset")
    simulate.add_argument("--points", type=int, default=None, help="Truth grid size")

    benchmark = commands.add_parser("benchmark", parents=[common, scenario], help="Monte Carlo benchmark")
    benchmark.add_argument("--scenario", default="custom",
                           help="custom, gaussian, bernoulli, poisson, all, lsweep or identity")
    benchmark.add_argument("--replicates", type=int, default=None, help="Replicates per scenario")
    benchmark.add_argument("--L", type=int, default=None, help="Number of basis functions")
    benchmark.add_argument("--ls", type=_intList, default=None, help="Sweep over these L values")
    benchmark.add_argument("--cv-ls", type=_intList, default=None, help="Select L by cross-validation")
    benchmark.add_argument("--degree", type=int, default=None, help="Spline degree")
    benchmark.add_argument("--kernel", default=None, help="epanechnikov or truncated_gaussian")
    benchmark.add_argument("--rho-grid", type=_floatList, default=None, help="Roughness grid")
    benchmark.add_argument("--lambda-grid", type=_floatList, default=None, help="Sparseness grid")
    benchmark.add_argument("--folds", type=int, default=None, help="Cross-validation folds")

    curves = commands.add_parser("curves", parents=[common], help="Evaluate a saved fit on a grid")
    curves.add_argument("--summary", required=True, help="fit_summary.json written by fit")
    curves.add_argument("--points", type=int, default=None, help="Curve grid size")
    return parser


def _buildEnv(config: argparse.Namespace) -> Env:
    """Env with flag values merged over the config file."""
    env = loadEnv(config.config, log_level=config.log_level)
    section = env.config.get(PROJECT_NAME)
    if config.family is not None:
        getFamily(config.family)
    for attr, option in MODEL_OPTIONS.items():
        value = getattr(config, attr, None)
        if value is not None:
            section[option] = value
    return env


def _outDir(config: argparse.Namespace) -> str:
    return makePath(os_path.abspath(config.out))


def _saveSettings(env: Env, out_dir: str) -> str:
    """Write the effective settings, flags merged over the config files, as settings.conf."""
    return env.config.saveConfig(out_dir, SETTINGS_NAME)


def cmdFit(config: argparse.Namespace) -> int:
    """Load, rescale, tune, fit and write fit_summary.json and curves.csv."""
    env = _buildEnv(config)
    locker = Locker(env)
    locker.loadData(config.response, config.covariate, config.domain)
    if config.cv_ls:
        locker.selectBasisSize(list(config.cv_ls))
    locker.prepare(config.bandwidth)
    locker.tune()

    out_dir = _outDir(config)
    locker.saveSummary(out_dir)
    _saveSettings(env, out_dir)
    locker.saveCurves(out_dir)
    if config.compare_unpenalized:
        locker.saveCurves(out_dir, locker.fitUnpenalized(), UNPENALIZED_CURVES_NAME)
    return EXIT_OK


def cmdTune(config: argparse.Namespace) -> int:
    """Write the EBIC grid (ebic_grid.csv) and, with --cv-ls, the CV tables."""
    env = _buildEnv(config)
    locker = Locker(env)
    locker.loadData(config.response, config.covariate, config.domain)
    out_dir = _outDir(config)
    if config.cv_ls:
        cv = locker.selectBasisSize(list(config.cv_ls))
        file.save(out_dir, "cv_table.csv", cv.table)
        file.save(out_dir, "cv_folds.csv", cv.folds)
    locker.prepare(config.bandwidth)
    selection = locker.tune()
    file.save(out_dir, "ebic_grid.csv", selection.toFrame())
    _saveSettings(env, out_dir)
    file.save(out_dir, "tuning.json", {"L": locker.basis.L, "rho": selection.rho, "lambda": selection.lam,
                                       "bandwidth": locker.kernel.bandwidth, "ebic": selection.ebic})
    return EXIT_OK


def _scenario(config: argparse.Namespace, env: Env, **kwargs) -> Scenario:
    bench = env.config.get("benchmark")
    return Scenario(
        config.family or env.config.get(PROJECT_NAME).get("family", "gaussian"),
        config.sparse,
        config.n if config.n is not None else bench.get("n", 200),
        config.m if config.m is not None else bench.get("m", 20.0),
        config.seed if config.seed is not None else bench.get("seed", 0),
        config.synchronous,
        identity_mean=config.identity_mean,
        **kwargs,
    )


def cmdSimulate(config: argparse.Namespace) -> int:
    """Write response.csv, covariate.csv and truth.csv for one simulated dataset."""
    env = loadEnv(config.config, log_level=config.log_level)
    dataset, truth = genDataset(_scenario(config, env))
    response, covariate = dataset.toFrames()

    out_dir = _outDir(config)
    file.save(out_dir, "response.csv", response)
    file.save(out_dir, "covariate.csv", covariate)
    points = config.points or env.config.get(PROJECT_NAME).get("curve_points", 201)
    file.save(out_dir, "truth.csv", truth.curves(points))
    _logger.info(f"Simulated {dataset.n} subjects into '{out_dir}'")
    return EXIT_OK


def cmdBenchmark(config: argparse.Namespace) -> int:
    """Write bench.csv and bench.txt; exits 4 when a scenario has no successful replicate."""
    env = loadEnv(config.config, log_level=config.log_level)
    settings, bench = env.config.get(PROJECT_NAME), env.config.get("benchmark")

    if config.scenario.strip().lower() == "custom":
        scenarios = [_scenario(config, env, n_basis=config.L)]
    else:
        scenarios = presetScenarios(config.scenario, config.n or bench.get("n", 200),
                                    config.seed if config.seed is not None else bench.get("seed", 0))

    options = BenchOptions(
        n_basis=config.L or bench.get("n_basis", 13),
        degree=config.degree or settings.get("degree", 3),
        kernel=config.kernel or settings.get("kernel", "epanechnikov"),
        rho_grid=config.rho_grid or settings.get("rho_grid"),
        lambda_grid=config.lambda_grid or settings.get("lambda_grid"),
        cv_ls=config.cv_ls,
        folds=config.folds or settings.get("folds", 5),
        scad_a=settings.get("scad_a", 3.7),
        nu=settings.get("nu", 0.5),
        max_iter=settings.get("max_iter", 100),
        tol=settings.get("tol", 1e-6),
        shrink_eps=settings.get("shrink_eps", 1e-4),
        workers=env.threads,
    )
    replicates = config.replicates or bench.get("replicates", 20)

    if config.ls:
        report = runLSweep(scenarios[0], config.ls, replicates, options)
        for scenario in scenarios[1:]:
            report.rows.extend(runLSweep(scenario, config.ls, replicates, options).rows)
    else:
        report = runBenchmark(scenarios, replicates, options)
    _logger.info(f"Benchmark finished in {report.runtime:.1f}s")

    out_dir = _outDir(config)
    file.save(out_dir, "bench.csv", report.toFrame())
    text = report.toText()
    file.save(out_dir, "bench.txt", text)
    sys.stdout.write(text)
    report.check()
    return EXIT_OK


def cmdCurves(config: argparse.Namespace) -> int:
    """Re-evaluate a saved fit_summary.json on a grid and write curves.csv."""
    env = loadEnv(config.config, log_level=config.log_level)
    summary = file.load(config.summary)
    points = config.points or env.config.get(PROJECT_NAME).get("curve_points", 201)
    file.save(_outDir(config), CURVES_NAME, curvesFrame(resultFromSummary(summary), points))
    return EXIT_OK


HANDLERS = {
    "fit": cmdFit,
    "simulate": cmdSimulate,
    "tune": cmdTune,
    "benchmark": cmdBenchmark,
    "curves": cmdCurves,
}


def _reportError(error: BaseException, exit_code: int) -> int:
    payload = {"error": type(error).__name__, "message": str(error), "exit_code": exit_code}
    sys.stderr.write(json.dumps(payload, sort_keys=True) + "\n")
    return exit_code


def main(argv: list[str] | None = None) -> int:
    """Run one command, mapping failures to exit codes 2 (I/O), 3 (usage), 4 (benchmark) and 5 (numeric)."""
    try:
        config = buildParser().parse_args(argv)
    except SystemExit as e:  # --help and --version
        return int(e.code or 0)
    except PyLockerException as e:
        return _reportError(e, e.exit_code)

    try:
        return HANDLERS[config.command](config)
    except PyLockerException as e:
        return _reportError(e, e.exit_code)
    except (FileNotFoundError, PermissionError, IsADirectoryError) as e:
        return _reportError(e, EXIT_IO)
    except (ValueError, KeyError) as e:
        return _reportError(e, EXIT_USAGE)
    except (ArithmeticError, OSError) as e:
        return _reportError(e, EXIT_NUMERIC if isinstance(e, ArithmeticError) else EXIT_IO)
    finally:
        closeEnv()


def run():
    sys.exit(main())
