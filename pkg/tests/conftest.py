import typing as T

import numpy as np
import pytest

from cohort_kit.event_model import AnalysisWindow, IndividualLog, StudyDataset
from cohort_kit.types_fmt import DAY, HOUR

# 2017-04-07T14:53:00Z, a Friday
ANCHOR = 1491576780.0


@pytest.fixture
def make_log():
    def _make(individual_id: str, cohort: str, hours: T.Sequence[float], duration: float = DAY):
        return IndividualLog(
            individual_id, cohort, np.sort(np.asarray(hours, dtype=np.float64) * HOUR), duration
        )

    return _make


@pytest.fixture
def make_study(make_log):
    """
    Study from {id: [hours of window 0, hours of window 1, ...]} and {id: label}.
    """

    def _make(
        hours: T.Mapping[str, T.Sequence[T.Sequence[float]]],
        cohorts: T.Mapping[str, str],
        labels: T.Tuple[str, str] = ("A", "B"),
        anchor: float = ANCHOR,
        zone: T.Optional[str] = None,
    ) -> StudyDataset:
        n_windows = len(next(iter(hours.values())))
        attack = AnalysisWindow(anchor, DAY)
        logs = {
            (individual_id, index): make_log(individual_id, cohorts[individual_id], per_window[index])
            for individual_id, per_window in hours.items()
            for index in range(n_windows)
        }
        return StudyDataset(
            attack_window=attack,
            background_windows=tuple(attack.shifted(k, zone) for k in range(1, n_windows)),
            logs=logs,
            cohorts=dict(cohorts),
            labels=labels,
            zone=zone,
        )

    return _make
