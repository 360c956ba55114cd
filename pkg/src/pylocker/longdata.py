"""Asynchronous longitudinal observations of one response and one covariate."""
from __future__ import annotations

import logging
import os
import re
from dataclasses import dataclass, field
from typing import Iterable

import numpy as np
import pandas as pd

from .utils.exceptions import DataParseError, DegenerateDomainError, DomainError, EmptyDatasetError, ParameterError


_logger = logging.getLogger(__name__)

CSV_COLUMNS = ["subject_id", "time", "value"]


def _frozen(values) -> np.ndarray:
    array = np.array(values, dtype=float)
    array.setflags(write=False)
    return array


@dataclass(frozen=True, eq=False)
class Subject:
    """One subject's response sequence (T_ij, Y_ij) and covariate sequence (S_ik, X_ik), sorted by time."""

    id: str
    response_times: np.ndarray
    response_values: np.ndarray
    covariate_times: np.ndarray
    covariate_values: np.ndarray

    def __post_init__(self):
        for prefix in ("response", "covariate"):
            times = np.asarray(getattr(self, f"{prefix}_times"), dtype=float).ravel()
            values = np.asarray(getattr(self, f"{prefix}_values"), dtype=float).ravel()
            if times.size != values.size:
                raise ParameterError(f"Subject '{self.id}': {prefix} times and values differ in length")
            if times.size < 1:
                raise ParameterError(f"Subject '{self.id}' has no {prefix} observations")
            order = np.argsort(times, kind="stable")
            object.__setattr__(self, f"{prefix}_times", _frozen(times[order]))
            object.__setattr__(self, f"{prefix}_values", _frozen(values[order]))

    @property
    def nResponse(self) -> int:
        return int(self.response_times.size)

    @property
    def nCovariate(self) -> int:
        return int(self.covariate_times.size)

    def minGap(self) -> float:
        """Smallest |T_ij - S_ik| over all response/covariate pairs."""
        return float(np.min(np.abs(self.response_times[:, None] - self.covariate_times[None, :])))

    def shiftTimes(self, offset: float, scale: float) -> Subject:
        """Times mapped by (t - offset) / scale, clipped to [0, 1]."""
        return Subject(
            self.id,
            np.clip((self.response_times - offset) / scale, 0.0, 1.0), self.response_values,
            np.clip((self.covariate_times - offset) / scale, 0.0, 1.0), self.covariate_values,
        )


@dataclass(frozen=True, eq=False)
class LongDataset:
    """Subjects observed on the closed interval domain = (t_lo, t_hi)."""

    subjects: tuple[Subject, ...]
    domain: tuple[float, float]
    _index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        subjects = tuple(self.subjects)
        if not subjects:
            raise EmptyDatasetError("Dataset has no subjects")
        t_lo, t_hi = (float(x) for x in self.domain)
        if not (np.isfinite(t_lo) and np.isfinite(t_hi)) or t_lo > t_hi:
            raise DomainError(f"Invalid domain [{t_lo}, {t_hi}]")
        for subject in subjects:
            for times in (subject.response_times, subject.covariate_times):
                if times[0] < t_lo or times[-1] > t_hi:
                    bad = times[0] if times[0] < t_lo else times[-1]
                    raise DomainError(f"Subject '{subject.id}' has time {bad} outside domain [{t_lo}, {t_hi}]")
        object.__setattr__(self, "subjects", subjects)
        object.__setattr__(self, "domain", (t_lo, t_hi))
        object.__setattr__(self, "_index", {subject.id: i for i, subject in enumerate(subjects)})

    def __len__(self) -> int:
        return len(self.subjects)

    @property
    def n(self) -> int:
        return len(self.subjects)

    @property
    def length(self) -> float:
        return self.domain[1] - self.domain[0]

    @property
    def ids(self) -> list[str]:
        return [subject.id for subject in self.subjects]

    @property
    def pairCount(self) -> int:
        """N0 = sum_i L_i M_i."""
        return sum(s.nResponse * s.nCovariate for s in self.subjects)

    def subject(self, subject_id: str) -> Subject:
        return self.subjects[self._index[subject_id]]

    def subset(self, ids: Iterable[str]) -> LongDataset:
        """Dataset restricted to ids, keeping this dataset's order and domain."""
        wanted = set(ids)
        return LongDataset(tuple(s for s in self.subjects if s.id in wanted), self.domain)

    def sortedById(self) -> LongDataset:
        return LongDataset(tuple(sorted(self.subjects, key=lambda s: s.id)), self.domain)

    def toFrames(self) -> tuple[pd.DataFrame, pd.DataFrame]:
        """Response and covariate tables in the subject_id,time,value layout."""
        frames = []
        for prefix in ("response", "covariate"):
            rows = [
                (subject.id, t, v)
                for subject in self.subjects
                for t, v in zip(getattr(subject, f"{prefix}_times"), getattr(subject, f"{prefix}_values"))
            ]
            frames.append(pd.DataFrame(rows, columns=CSV_COLUMNS))
        return frames[0], frames[1]


def _readObservations(file_path: str) -> pd.DataFrame:
    """Read and validate one subject_id,time,value file; line numbers in errors are physical file lines."""
    if not os.path.isfile(file_path):
        raise FileNotFoundError(f"No such file: '{file_path}'")
    try:
        frame = pd.read_csv(file_path, dtype=str, skipinitialspace=True, keep_default_na=False,
                            skip_blank_lines=False, index_col=False, encoding="utf-8")
    except pd.errors.EmptyDataError:
        raise DataParseError(file_path, 1, f"expected header {','.join(CSV_COLUMNS)}")
    except pd.errors.ParserError as e:
        match = re.search(r"line (\d+)", str(e))
        raise DataParseError(file_path, int(match.group(1)) if match else 0, f"wrong number of fields ({e})")

    columns = [str(c).strip() for c in frame.columns]
    if columns != CSV_COLUMNS:
        raise DataParseError(file_path, 1, f"expected header {','.join(CSV_COLUMNS)}, got {','.join(columns)}")
    frame.columns = CSV_COLUMNS

    frame["line"] = frame.index + 2
    blank = frame[CSV_COLUMNS].apply(lambda col: col.isna() | (col.str.strip() == "")).all(axis=1)
    frame = frame.loc[~blank]

    ids = frame["subject_id"]
    times = pd.to_numeric(frame["time"], errors="coerce")
    values = pd.to_numeric(frame["value"], errors="coerce")
    bad = ids.isna() | (ids.str.strip() == "") | ~np.isfinite(times) | ~np.isfinite(values)
    if bad.any():
        row = frame.loc[bad].iloc[0]
        raise DataParseError(file_path, int(row["line"]),
                             f"expected subject_id,time,value with numeric time and value, "
                             f"got {row['subject_id']!r},{row['time']!r},{row['value']!r}")

    return pd.DataFrame({
        "subject_id": ids.str.strip().to_numpy(),
        "time": times.to_numpy(dtype=float),
        "value": values.to_numpy(dtype=float),
        "line": frame["line"].to_numpy(),
    })


def _checkDomain(frame: pd.DataFrame, file_path: str, domain: tuple[float, float]):
    outside = (frame["time"] < domain[0]) | (frame["time"] > domain[1])
    if outside.any():
        row = frame.loc[outside].iloc[0]
        raise DomainError(f"{file_path}:{int(row['line'])}: time {row['time']} of subject "
                          f"'{row['subject_id']}' outside domain [{domain[0]}, {domain[1]}]")


def loadCsv(response_path: str, covariate_path: str, domain: tuple[float, float] | None = None) -> LongDataset:
    """
    Load a dataset from a response file and a covariate file. Only subjects
    with rows in both files are kept.

    :param response_path: CSV of response observations
    :param covariate_path: CSV of covariate observations
    :param domain: Explicit (t_lo, t_hi); times outside it are rejected. Defaults to the observed range
    :return: dataset - LongDataset
    """
    responses = _readObservations(response_path)
    covariates = _readObservations(covariate_path)

    if domain is not None:
        domain = (float(domain[0]), float(domain[1]))
        if domain[0] > domain[1]:
            raise DomainError(f"Invalid domain [{domain[0]}, {domain[1]}]")
        _checkDomain(responses, response_path, domain)
        _checkDomain(covariates, covariate_path, domain)

    response_ids, covariate_ids = set(responses["subject_id"]), set(covariates["subject_id"])
    kept = sorted(response_ids & covariate_ids)
    dropped = len(response_ids | covariate_ids) - len(kept)
    if dropped:
        _logger.warning(f"Dropped {dropped} subject(s) without both response and covariate observations")
    if not kept:
        raise EmptyDatasetError(f"No subject appears in both '{response_path}' and '{covariate_path}'")

    response_groups = dict(tuple(responses.groupby("subject_id", sort=False)))
    covariate_groups = dict(tuple(covariates.groupby("subject_id", sort=False)))
    subjects = tuple(
        Subject(
            subject_id,
            response_groups[subject_id]["time"].to_numpy(), response_groups[subject_id]["value"].to_numpy(),
            covariate_groups[subject_id]["time"].to_numpy(), covariate_groups[subject_id]["value"].to_numpy(),
        )
        for subject_id in kept
    )

    if domain is None:
        t_lo = min(min(s.response_times[0], s.covariate_times[0]) for s in subjects)
        t_hi = max(max(s.response_times[-1], s.covariate_times[-1]) for s in subjects)
        domain = (float(t_lo), float(t_hi))

    dataset = LongDataset(subjects, domain)
    _logger.info(f"Loaded {dataset.n} subjects, N0={dataset.pairCount} pairs, domain=[{domain[0]}, {domain[1]}]")
    return dataset


def rescaleTime(ds: LongDataset) -> LongDataset:
    """Affinely map all times so the domain becomes [0, 1]."""
    t_lo, t_hi = ds.domain
    if not t_hi > t_lo:
        raise DegenerateDomainError(f"Cannot rescale a degenerate domain [{t_lo}, {t_hi}]")
    if (t_lo, t_hi) == (0.0, 1.0):
        return ds
    scale = t_hi - t_lo
    return LongDataset(tuple(s.shiftTimes(t_lo, scale) for s in ds.subjects), (0.0, 1.0))
