import io
import json
import os
import tempfile
import unittest
from contextlib import redirect_stderr, redirect_stdout

import pandas as pd

from src.pylocker import cli
from src.pylocker.utils import file
from src.pylocker.utils.config import Config

TESTS_DIR = os.path.dirname(os.path.abspath(__file__))
DATA_DIR = os.path.join(TESTS_DIR, "test_data")
TEST_CONFIG = os.path.join(DATA_DIR, "pylocker.conf")

FAST_FLAGS = ["--config", TEST_CONFIG, "--family", "gaussian", "--L", "8", "--rho-grid", "1e-4,1e-2",
              "--lambda-grid", "0,0.05"]


def _run(argv: list[str]) -> tuple[int, str, str]:
    stdout, stderr = io.StringIO(), io.StringIO()
    with redirect_stdout(stdout), redirect_stderr(stderr):
        code = cli.main(argv)
    return code, stdout.getvalue(), stderr.getvalue()


def _errorPayload(stderr: str) -> dict:
    return json.loads(stderr.strip().splitlines()[-1])


class TestCommands(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.tmp = tempfile.TemporaryDirectory()
        cls.sim_dir = os.path.join(cls.tmp.name, "sim")
        code, _, stderr = _run(["simulate", "--config", TEST_CONFIG, "--family", "gaussian", "--sparse",
                                "--n", "40", "--m", "6", "--seed", "7", "--out", cls.sim_dir])
        assert code == 0, stderr
        cls.data_flags = ["--response", os.path.join(cls.sim_dir, "response.csv"),
                          "--covariate", os.path.join(cls.sim_dir, "covariate.csv")]

    @classmethod
    def tearDownClass(cls):
        cls.tmp.cleanup()

    def test_simulate_outputs(self):
        response = file.load(self.sim_dir, "response.csv")
        self.assertEqual(list(response.columns), ["subject_id", "time", "value"])
        self.assertEqual(response["subject_id"].nunique(), 40)
        truth = file.load(self.sim_dir, "truth.csv")
        self.assertEqual(list(truth.columns), ["t", "beta0", "beta1"])

    def test_simulate_is_deterministic(self):
        out_dir = os.path.join(self.tmp.name, "sim_again")
        code, _, _ = _run(["simulate", "--config", TEST_CONFIG, "--family", "gaussian", "--sparse",
                           "--n", "40", "--m", "6", "--seed", "7", "--out", out_dir])
        self.assertEqual(code, 0)
        pd.testing.assert_frame_equal(file.load(out_dir, "covariate.csv"), file.load(self.sim_dir, "covariate.csv"))

    def test_simulate_identity_mean(self):
        """--identity-mean changes the Poisson responses drawn from the same seed."""
        outputs = {}
        for label, extra in (("link", []), ("identity", ["--identity-mean"])):
            out_dir = os.path.join(self.tmp.name, f"poisson_{label}")
            code, _, stderr = _run(["simulate", "--config", TEST_CONFIG, "--family", "poisson", "--n", "40",
                                    "--m", "6", "--seed", "7", "--out", out_dir] + extra)
            self.assertEqual(code, 0, stderr)
            outputs[label] = file.load(out_dir, "covariate.csv"), file.load(out_dir, "response.csv")
        first = [frame[frame["subject_id"] == "S00001"].reset_index(drop=True) for frame, _ in outputs.values()]
        pd.testing.assert_frame_equal(first[0], first[1])
        link, identity = (response["value"] for _, response in outputs.values())
        self.assertFalse(link.equals(identity))

    def test_fit_and_curves(self):
        out_dir = os.path.join(self.tmp.name, "fit")
        code, _, stderr = _run(["fit", *FAST_FLAGS, *self.data_flags, "--compare-unpenalized", "--out", out_dir])
        self.assertEqual(code, 0, stderr)

        summary = file.load(out_dir, "fit_summary.json")
        self.assertEqual(summary["family"], "gaussian")
        self.assertEqual(summary["basis"]["n_basis"], 8)
        self.assertEqual(len(summary["gamma"]), 16)
        self.assertIn(summary["tuning"]["lambda"], (0.0, 0.05))
        curves = file.load(out_dir, "curves.csv")
        self.assertEqual(len(curves), 201)
        self.assertTrue(os.path.isfile(os.path.join(out_dir, "curves_unpenalized.csv")))

        settings = Config(os.path.join(out_dir, "settings.conf"))
        self.assertEqual(settings["pylocker"]["family"], "gaussian")
        self.assertEqual(settings["pylocker"]["n_basis"], 8)
        self.assertEqual(list(settings["pylocker"]["rho_grid"]), [1e-4, 1e-2])

        curves_dir = os.path.join(self.tmp.name, "curves")
        code, _, stderr = _run(["curves", "--config", TEST_CONFIG, "--summary",
                                os.path.join(out_dir, "fit_summary.json"), "--out", curves_dir])
        self.assertEqual(code, 0, stderr)
        pd.testing.assert_frame_equal(file.load(curves_dir, "curves.csv"), curves, atol=1e-12)

    def test_tune_outputs(self):
        out_dir = os.path.join(self.tmp.name, "tune")
        code, _, stderr = _run(["tune", *FAST_FLAGS, *self.data_flags, "--cv-ls", "6,8", "--folds", "3",
                                "--out", out_dir])
        self.assertEqual(code, 0, stderr)
        grid = file.load(out_dir, "ebic_grid.csv")
        self.assertEqual(len(grid), 4)
        self.assertEqual(file.load(out_dir, "cv_table.csv")["L"].tolist(), [6, 8])
        tuning = file.load(out_dir, "tuning.json")
        self.assertIn(tuning["L"], (6, 8))
        self.assertIn("score", tuning["ebic"])
        self.assertTrue(os.path.isfile(os.path.join(out_dir, "settings.conf")))

    def test_benchmark(self):
        out_dir = os.path.join(self.tmp.name, "bench")
        code, stdout, stderr = _run(["benchmark", "--config", TEST_CONFIG, "--family", "gaussian", "--n", "30",
                                     "--m", "5", "--replicates", "2", "--L", "6", "--rho-grid", "1e-3",
                                     "--lambda-grid", "0", "--out", out_dir])
        self.assertEqual(code, 0, stderr)
        self.assertTrue(stdout.startswith("Scenario"))
        bench = file.load(out_dir, "bench.csv")
        self.assertEqual(bench.loc[0, "scenario"], "gaussian-nonsparse-m5-L6")
        self.assertEqual(bench.loc[0, "failures"], 0)
        self.assertEqual(file.load(out_dir, "bench.txt"), stdout)


class TestExitCodes(unittest.TestCase):

    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def _dataFlags(self, response: str = "response.csv", covariate: str = "covariate.csv") -> list[str]:
        return ["--response", os.path.join(DATA_DIR, response), "--covariate", os.path.join(DATA_DIR, covariate)]

    def test_missing_file(self):
        code, _, stderr = _run(["fit", *FAST_FLAGS, *self._dataFlags(covariate="absent.csv"), "--out", self.tmp.name])
        self.assertEqual(code, 2)
        self.assertEqual(_errorPayload(stderr)["exit_code"], 2)

    def test_parse_error(self):
        code, _, stderr = _run(["fit", *FAST_FLAGS, *self._dataFlags(response="bad_value.csv"),
                                "--out", self.tmp.name])
        self.assertEqual(code, 2)
        payload = _errorPayload(stderr)
        self.assertEqual(payload["error"], "DataParseError")
        self.assertIn(":4:", payload["message"])

    def test_unknown_family(self):
        code, _, stderr = _run(["fit", "--config", TEST_CONFIG, "--family", "gamma", *self._dataFlags(),
                                "--out", self.tmp.name])
        self.assertEqual(code, 3)
        self.assertEqual(_errorPayload(stderr)["error"], "ParameterError")

    def test_bad_flag(self):
        code, _, stderr = _run(["fit", "--rho-grid", "a,b"])
        self.assertEqual(code, 3)
        self.assertEqual(_errorPayload(stderr)["exit_code"], 3)

    def test_unknown_command(self):
        code, _, _ = _run(["explode"])
        self.assertEqual(code, 3)

    def test_singular_tuning(self):
        """Without roughness the two-subject fixture cannot identify the basis coefficients."""
        code, _, stderr = _run(["fit", "--config", TEST_CONFIG, "--family", "gaussian", "--L", "8",
                                "--rho-grid", "0", "--lambda-grid", "0", *self._dataFlags(), "--out", self.tmp.name])
        self.assertEqual(code, 5)
        self.assertEqual(_errorPayload(stderr)["error"], "TuningError")

    def test_benchmark_without_success(self):
        code, stdout, _ = _run(["benchmark", "--config", TEST_CONFIG, "--family", "gaussian", "--n", "10",
                                "--m", "3", "--replicates", "1", "--L", "3", "--out", self.tmp.name])
        self.assertEqual(code, 4)
        self.assertIn("gaussian-nonsparse-m3-L3", stdout)
        self.assertTrue(os.path.isfile(os.path.join(self.tmp.name, "bench.csv")))

    def test_version(self):
        code, stdout, _ = _run(["--version"])
        self.assertEqual(code, 0)
        self.assertIn("PyLocker", stdout)


if __name__ == "__main__":
    unittest.main()
