import unittest

import numpy as np

from src.pylocker.bspline import SplineBasis
from src.pylocker.kernelw import (EPANECHNIKOV, TRUNCATED_GAUSSIAN, KernelSpec, defaultBandwidth, kernelName,
                                  kernelWeight, pairExpand)
from src.pylocker.longdata import LongDataset, Subject
from src.pylocker.utils.exceptions import DomainError, ParameterError


def _dataset() -> LongDataset:
    return LongDataset((
        Subject("A", [0.2, 0.5], [1.0, 2.0], [0.25, 0.9], [0.4, -1.0]),
        Subject("B", [0.6], [3.0], [0.58, 0.62, 0.1], [2.0, 1.0, 5.0]),
    ), (0.0, 1.0))


class TestKernelWeight(unittest.TestCase):

    def test_epanechnikov_values(self):
        """K_h(u) = 0.75 (1 - (u/h)^2) / h on the support."""
        spec = KernelSpec(EPANECHNIKOV, 0.1)
        self.assertAlmostEqual(kernelWeight(spec, 0.0), 7.5)
        self.assertAlmostEqual(kernelWeight(spec, 0.05), 5.625)
        self.assertEqual(kernelWeight(spec, 0.1), 0.0)
        self.assertEqual(kernelWeight(spec, -0.2), 0.0)

    def test_truncated_gaussian(self):
        """Zero beyond five bandwidths and symmetric inside."""
        spec = KernelSpec(TRUNCATED_GAUSSIAN, 0.2)
        self.assertEqual(kernelWeight(spec, 1.01), 0.0)
        self.assertGreater(kernelWeight(spec, 0.99), 0.0)
        self.assertAlmostEqual(kernelWeight(spec, 0.3), kernelWeight(spec, -0.3))

    def test_integrates_to_one(self):
        u = np.linspace(-1.0, 1.0, 40001)
        for family in (EPANECHNIKOV, TRUNCATED_GAUSSIAN):
            weights = kernelWeight(KernelSpec(family, 0.15), u)
            self.assertAlmostEqual(float(np.sum(weights) * (u[1] - u[0])), 1.0, places=3)

    def test_array_input(self):
        weights = kernelWeight(KernelSpec(bandwidth=0.5), np.zeros((2, 3)))
        self.assertEqual(weights.shape, (2, 3))

    def test_invalid_bandwidth(self):
        for bandwidth in (0.0, -1.0, float("nan")):
            with self.assertRaises(ParameterError):
                KernelSpec(EPANECHNIKOV, bandwidth)

    def test_kernel_names(self):
        self.assertEqual(kernelName("Truncated-Gaussian"), TRUNCATED_GAUSSIAN)
        self.assertEqual(kernelName("EPANECHNIKOV"), EPANECHNIKOV)
        with self.assertRaises(ParameterError):
            kernelName("uniform")


class TestDefaultBandwidth(unittest.TestCase):

    def test_floor(self):
        """Tiny gaps are floored at 0.01."""
        ds = LongDataset((Subject("A", [0.5], [1.0], [0.501], [0.0]),), (0.0, 1.0))
        self.assertEqual(defaultBandwidth(ds), 0.01)

    def test_quantile_of_gaps(self):
        """Gaps 0.05 and 0.02 give the 0.95 quantile by linear interpolation."""
        self.assertAlmostEqual(defaultBandwidth(_dataset()), 0.02 + 0.95 * 0.03)


class TestPairExpand(unittest.TestCase):

    def setUp(self):
        self.basis = SplineBasis(degree=3, n_interior=3)
        self.pairs = pairExpand(_dataset(), self.basis, KernelSpec(EPANECHNIKOV, 0.1))

    def test_counts(self):
        """N0 counts every pair; n0 keeps only positive weights."""
        self.assertEqual(self.pairs.N0, 2 * 2 + 1 * 3)
        self.assertEqual(self.pairs.n0, 3)
        self.assertTrue(np.all(self.pairs.weight > 0))

    def test_row_order(self):
        """Rows are grouped by subject, then response, then covariate index."""
        np.testing.assert_array_equal(self.pairs.subject, [0, 1, 1])
        np.testing.assert_array_equal(self.pairs.response, [1.0, 3.0, 3.0])
        self.assertEqual(self.pairs.subject_ids, ("A", "B"))

    def test_design_rows(self):
        """Each row is (B(S), X(S) B(S)): first half sums to 1, second half to X(S)."""
        L = self.basis.L
        self.assertEqual(self.pairs.design.shape, (3, 2 * L))
        np.testing.assert_allclose(self.pairs.design[:, :L].sum(axis=1), 1.0)
        np.testing.assert_allclose(self.pairs.design[:, L:].sum(axis=1), [0.4, 2.0, 1.0])
        np.testing.assert_allclose(self.pairs.design[0, :L], self.basis.evaluate(0.25))

    def test_weights(self):
        np.testing.assert_allclose(self.pairs.weight, [5.625, 7.5 * (1 - 0.04), 7.5 * (1 - 0.04)])

    def test_scaled(self):
        scaled = self.pairs.scaled(2.0)
        np.testing.assert_allclose(scaled.weight, 2.0 * self.pairs.weight)
        self.assertEqual(scaled.N0, 14)

    def test_no_pairs_in_window(self):
        """A bandwidth below every gap leaves an empty design with N0 intact."""
        pairs = pairExpand(_dataset(), self.basis, KernelSpec(EPANECHNIKOV, 0.001))
        self.assertEqual(pairs.n0, 0)
        self.assertEqual(pairs.N0, 7)
        self.assertEqual(pairs.design.shape, (0, 2 * self.basis.L))

    def test_basis_domain_mismatch(self):
        basis = SplineBasis(degree=3, n_interior=3, domain=(0.0, 0.5))
        with self.assertRaises(DomainError):
            pairExpand(_dataset(), basis, KernelSpec(EPANECHNIKOV, 0.1))


if __name__ == "__main__":
    unittest.main()
