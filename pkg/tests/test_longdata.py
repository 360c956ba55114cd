import unittest
from os import path as os_path

import numpy as np

from src.pylocker.longdata import LongDataset, Subject, loadCsv, rescaleTime
from src.pylocker.utils.exceptions import DataParseError, DegenerateDomainError, DomainError, EmptyDatasetError

TESTS_DIR = os_path.dirname(os_path.abspath(__file__))
DATA_DIR = os_path.join(TESTS_DIR, "test_data")


def _dataPath(name: str) -> str:
    return os_path.join(DATA_DIR, name)


class TestLoadCsv(unittest.TestCase):

    def setUp(self):
        self.ds = loadCsv(_dataPath("response.csv"), _dataPath("covariate.csv"))

    def test_intersection_of_subject_ids(self):
        """Subjects present in only one file are dropped."""
        self.assertEqual(self.ds.ids, ["A", "B"])

    def test_observation_counts(self):
        """Row counts per subject give L_i and M_i."""
        subject = self.ds.subject("A")
        self.assertEqual(subject.nResponse, 2)
        self.assertEqual(subject.nCovariate, 3)
        self.assertEqual(self.ds.subject("B").nCovariate, 1)
        self.assertEqual(self.ds.pairCount, 2 * 3 + 2 * 1)

    def test_default_domain_is_observed_range(self):
        """Domain defaults to the min and max retained observation times."""
        self.assertEqual(self.ds.domain, (2.0, 6.0))

    def test_observations_sorted_by_time(self):
        """Covariate times are ascending after loading."""
        times = self.ds.subject("A").covariate_times
        np.testing.assert_array_equal(times, np.sort(times))
        np.testing.assert_array_equal(self.ds.subject("A").covariate_values, [0.3, 0.1, -0.7])

    def test_non_numeric_value_names_line(self):
        """A non-numeric value raises a parse error naming file and physical line."""
        with self.assertRaises(DataParseError) as context:
            loadCsv(_dataPath("bad_value.csv"), _dataPath("covariate.csv"))
        self.assertEqual(context.exception.line, 4)
        self.assertIn("bad_value.csv", str(context.exception))

    def test_missing_field(self):
        """A row with a missing field is a parse error."""
        with self.assertRaises(DataParseError) as context:
            loadCsv(_dataPath("covariate.csv"), _dataPath("short_row.csv"))
        self.assertEqual(context.exception.line, 3)

    def test_bad_header(self):
        """Files must start with the subject_id,time,value header."""
        with self.assertRaises(DataParseError):
            loadCsv(_dataPath("bad_header.csv"), _dataPath("covariate.csv"))

    def test_missing_file(self):
        """A missing file is reported as FileNotFoundError."""
        with self.assertRaises(FileNotFoundError):
            loadCsv(_dataPath("response.csv"), _dataPath("missing.csv"))

    def test_no_shared_subjects(self):
        """Zero retained subjects raises an empty-dataset error."""
        with self.assertRaises(EmptyDatasetError):
            loadCsv(_dataPath("response.csv"), _dataPath("other_subjects.csv"))

    def test_explicit_domain_rejects_outside_times(self):
        """Times outside an explicit domain are rejected at load."""
        with self.assertRaises(DomainError):
            loadCsv(_dataPath("response.csv"), _dataPath("covariate.csv"), domain=(2.0, 5.0))
        ds = loadCsv(_dataPath("response.csv"), _dataPath("covariate.csv"), domain=(0.0, 10.0))
        self.assertEqual(ds.domain, (0.0, 10.0))


class TestRescaleTime(unittest.TestCase):

    def test_affine_map(self):
        """Times {2, 4, 6} on [2, 6] map to {0, 0.5, 1}."""
        subject = Subject("A", [2.0, 4.0, 6.0], [1.0, 2.0, 3.0], [4.0], [0.5])
        ds = rescaleTime(LongDataset((subject,), (2.0, 6.0)))
        np.testing.assert_allclose(ds.subjects[0].response_times, [0.0, 0.5, 1.0])
        np.testing.assert_array_equal(ds.subjects[0].response_values, [1.0, 2.0, 3.0])
        self.assertEqual(ds.domain, (0.0, 1.0))

    def test_idempotent_on_unit_domain(self):
        """A dataset already on [0, 1] is returned unchanged."""
        subject = Subject("A", [0.1, 0.7], [1.0, 2.0], [0.3], [0.5])
        ds = LongDataset((subject,), (0.0, 1.0))
        self.assertIs(rescaleTime(ds), ds)
        self.assertIs(rescaleTime(rescaleTime(ds)), ds)

    def test_degenerate_domain(self):
        """A single distinct time cannot be rescaled."""
        subject = Subject("A", [3.0], [1.0], [3.0], [0.5])
        ds = LongDataset((subject,), (3.0, 3.0))
        with self.assertRaises(DegenerateDomainError):
            rescaleTime(ds)


class TestLongDataset(unittest.TestCase):

    def test_rejects_times_outside_domain(self):
        """Construction checks every time against the domain."""
        subject = Subject("A", [0.5, 1.5], [1.0, 2.0], [0.3], [0.5])
        with self.assertRaises(DomainError):
            LongDataset((subject,), (0.0, 1.0))

    def test_empty(self):
        """A dataset needs at least one subject."""
        with self.assertRaises(EmptyDatasetError):
            LongDataset((), (0.0, 1.0))

    def test_min_gap(self):
        """minGap is the smallest response/covariate time distance."""
        subject = Subject("A", [0.5], [1.0], [0.4, 0.65], [0.0, 0.0])
        self.assertAlmostEqual(subject.minGap(), 0.1)

    def test_subset_and_frames(self):
        """subset keeps order and toFrames writes the CSV layout."""
        subjects = tuple(Subject(name, [0.1 * (i + 1)], [float(i)], [0.5], [1.0]) for i, name in enumerate("ABC"))
        ds = LongDataset(subjects, (0.0, 1.0))
        self.assertEqual(ds.subset({"C", "A"}).ids, ["A", "C"])
        response, covariate = ds.toFrames()
        self.assertEqual(list(response.columns), ["subject_id", "time", "value"])
        self.assertEqual(len(response), 3)
        self.assertEqual(covariate["subject_id"].tolist(), ["A", "B", "C"])

    def test_sorted_by_id(self):
        subjects = tuple(Subject(name, [0.2], [1.0], [0.5], [1.0]) for name in "CAB")
        ds = LongDataset(subjects, (0.0, 1.0)).sortedById()
        self.assertEqual(ds.ids, ["A", "B", "C"])
        self.assertEqual(ds.subject("B").id, "B")
        self.assertEqual(ds.domain, (0.0, 1.0))


if __name__ == "__main__":
    unittest.main()
