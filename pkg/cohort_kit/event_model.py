import logging
import math
import typing as T
from collections import Counter, defaultdict
from dataclasses import dataclass, field

import numpy as np
from tqdm import tqdm

from .error import CohortHistoryError, CohortInputError, CohortRecordError
from .types_fmt import DAY, WEEK, EventRecord, format_timestamp, local_shift, parse_timestamp

LOG = logging.getLogger(__name__)

DEFAULT_WEEKS = 8


class AnalysisWindow(T.NamedTuple):
    start: float
    duration: float = DAY

    @property
    def end(self) -> float:
        return self.start + self.duration

    def validate(self) -> "AnalysisWindow":
        if not (math.isfinite(self.start) and math.isfinite(self.duration)):
            raise ValueError("window bounds must be finite")
        if self.duration <= 0:
            raise ValueError(f"window duration must be positive, got {self.duration}")
        return self

    def contains(self, timestamp: float) -> bool:
        # half-open [start, start + duration)
        return self.start <= timestamp < self.end

    def shifted(self, weeks: int, zone: T.Optional[str] = None) -> "AnalysisWindow":
        # same wall-clock time of the zone; absolute seconds without a zone
        return AnalysisWindow(local_shift(self.start, zone, weeks=-weeks), self.duration)


def _sorted_offsets(offsets: T.Iterable[float]) -> np.ndarray:
    return np.sort(np.asarray(list(offsets), dtype=np.float64))


@dataclass(frozen=True, eq=False)
class IndividualLog:
    individual_id: str
    cohort: str
    offsets: np.ndarray
    duration: float = DAY

    def __post_init__(self):
        if not self.individual_id:
            raise ValueError("individual_id must be non-empty")
        offsets = np.asarray(self.offsets, dtype=np.float64)
        if offsets.ndim != 1:
            raise ValueError("offsets must be one-dimensional")
        if offsets.size:
            if np.any(np.diff(offsets) < 0):
                raise ValueError(f"offsets of {self.individual_id} are not sorted")
            if offsets[0] < 0 or offsets[-1] >= self.duration:
                raise ValueError(
                    f"offsets of {self.individual_id} fall outside [0, {self.duration})"
                )
        if offsets.flags.writeable:
            offsets = offsets.copy()
            offsets.setflags(write=False)
        object.__setattr__(self, "offsets", offsets)

    @property
    def n_events(self) -> int:
        return int(self.offsets.size)

    def to_records(self, window: AnalysisWindow, kind: str = "communication") -> T.List[EventRecord]:
        return [
            EventRecord(self.individual_id, window.start + float(offset), kind)
            for offset in self.offsets
        ]

    def same_as(self, other: "IndividualLog") -> bool:
        return (
            self.individual_id == other.individual_id
            and self.cohort == other.cohort
            and self.duration == other.duration
            and np.array_equal(self.offsets, other.offsets)
        )


class IngestResult(T.NamedTuple):
    logs: T.List[IndividualLog]
    skipped_ids: T.Set[str]
    in_window_events: int


def ingest_events(
    records: T.Iterable[EventRecord],
    window: AnalysisWindow,
    cohort_map: T.Mapping[str, str],
    kind: T.Optional[str] = None,
) -> IngestResult:
    """
    Slice raw events into one log per individual of the cohort map.

    Args:
        records: raw events, any order
        window: the half-open analysis window
        cohort_map: individual id -> cohort label
        kind: keep only this event category when given

    Returns:
        logs sorted by individual id (individuals without in-window events get an empty log),
        ids absent from the cohort map, and the number of in-window events kept
    """
    window.validate()
    per_individual: T.Dict[str, T.List[float]] = defaultdict(list)
    skipped: T.Set[str] = set()
    kept = 0
    for index, record in enumerate(records):
        if not record.individual_id:
            raise CohortRecordError("<events>", index + 1, "missing id")
        if not math.isfinite(record.timestamp):
            raise CohortRecordError("<events>", index + 1, "timestamp is not finite")
        if kind is not None and record.kind != kind:
            continue
        if record.individual_id not in cohort_map:
            skipped.add(record.individual_id)
            continue
        if window.contains(record.timestamp):
            offset = record.timestamp - window.start
            if offset >= window.duration:
                # rounding at the right edge
                offset = float(np.nextafter(window.duration, 0.0))
            per_individual[record.individual_id].append(offset)
            kept += 1

    if skipped:
        LOG.warning(f"{len(skipped)} individuals are not in the cohort map and were skipped")

    logs = [
        IndividualLog(
            individual_id,
            cohort_map[individual_id],
            _sorted_offsets(per_individual.get(individual_id, [])),
            window.duration,
        )
        for individual_id in sorted(cohort_map)
    ]
    return IngestResult(logs, skipped, kept)


LogKey = T.Tuple[str, int]


@dataclass(frozen=True, eq=False)
class StudyDataset:
    """
    Attack window plus W background windows; window index 0 is the attack window and
    index k is the background window k weeks earlier, counted in calendar weeks of zone
    when one is declared.
    """

    attack_window: AnalysisWindow
    background_windows: T.Tuple[AnalysisWindow, ...]
    logs: T.Mapping[LogKey, IndividualLog]
    cohorts: T.Mapping[str, str]
    labels: T.Tuple[str, str] = field(default=("A", "B"))
    zone: T.Optional[str] = None

    def __post_init__(self):
        self.attack_window.validate()
        if len(self.background_windows) < 1:
            raise ValueError("a study needs at least one background window")
        for k, window in enumerate(self.background_windows, start=1):
            window.validate()
            if window.duration != self.attack_window.duration:
                raise ValueError(f"background window {k} has a different duration")
            if window != self.attack_window.shifted(k, self.zone):
                raise ValueError(f"background window {k} is not {k} weeks before the attack")
        if len(self.labels) != 2 or self.labels[0] == self.labels[1]:
            raise ValueError(f"a study compares two cohorts, got labels {self.labels}")
        unknown = set(self.cohorts.values()) - set(self.labels)
        if unknown:
            raise ValueError(f"cohort labels {sorted(unknown)} are not in {self.labels}")
        for individual_id, label in self.cohorts.items():
            for index in range(self.n_windows):
                log = self.logs.get((individual_id, index))
                if log is None:
                    raise ValueError(f"missing log of {individual_id} in window {index}")
                if log.cohort != label:
                    raise ValueError(f"{individual_id} changes cohort in window {index}")

    @property
    def weeks(self) -> int:
        return len(self.background_windows)

    @property
    def n_windows(self) -> int:
        return 1 + len(self.background_windows)

    @property
    def t_max(self) -> float:
        return self.attack_window.duration

    @property
    def cohort_sizes(self) -> T.Dict[str, int]:
        sizes = Counter(self.cohorts.values())
        return {label: sizes.get(label, 0) for label in self.labels}

    def window(self, index: int) -> AnalysisWindow:
        if index == 0:
            return self.attack_window
        return self.background_windows[index - 1]

    def members(self, label: T.Optional[str] = None) -> T.List[str]:
        return sorted(i for i, lab in self.cohorts.items() if label is None or lab == label)

    def window_logs(self, index: int, label: T.Optional[str] = None) -> T.List[IndividualLog]:
        return [self.logs[(individual_id, index)] for individual_id in self.members(label)]

    def background_pool(self, label: str) -> T.List[IndividualLog]:
        # ordered by individual, then by week
        return [
            self.logs[(individual_id, k)]
            for individual_id in self.members(label)
            for k in range(1, self.n_windows)
        ]

    def events_per_window(self) -> T.List[int]:
        return [
            sum(log.n_events for log in self.window_logs(index))
            for index in range(self.n_windows)
        ]


def parse_anchor(
    anchor: T.Union[str, float],
    zone: T.Optional[str] = None,
    named: T.Optional[T.Mapping[str, T.Tuple[str, str]]] = None,
) -> float:
    if isinstance(anchor, str) and named and anchor in named:
        anchor = named[anchor][0]
    try:
        return parse_timestamp(anchor, zone)
    except (ValueError, OverflowError) as ex:
        raise CohortInputError(f"Invalid window anchor {anchor!r}: {ex}")


def _labels_of(cohort_map: T.Mapping[str, str]) -> T.Tuple[str, str]:
    labels = sorted(set(cohort_map.values()))
    if len(labels) != 2:
        raise CohortInputError(f"Expect exactly two cohort labels, got {labels}")
    return labels[0], labels[1]


def slice_background(
    records: T.Sequence[EventRecord],
    attack_window: AnalysisWindow,
    cohort_map: T.Mapping[str, str],
    weeks: int = DEFAULT_WEEKS,
    kind: T.Optional[str] = None,
    zone: T.Optional[str] = None,
    disable_progress: bool = True,
) -> StudyDataset:
    """
    Slice the attack window and the W weekly background windows before it. With a zone the
    background windows keep the attack window's wall-clock time across daylight saving changes.

    A background week is missing when no raw record (of any individual or kind) falls in
    the seven days starting at its window start.
    """
    if weeks < 1:
        raise ValueError(f"weeks must be at least 1, got {weeks}")
    attack_window.validate()
    records = list(records)

    zone = zone or None
    windows = [attack_window] + [attack_window.shifted(k, zone) for k in range(1, weeks + 1)]
    timestamps = np.array([r.timestamp for r in records], dtype=np.float64)
    timestamps.sort()
    for k, start in enumerate((w.start for w in windows[1:]), start=1):
        lo = np.searchsorted(timestamps, start, side="left")
        if lo >= timestamps.size or timestamps[lo] >= start + WEEK:
            when = format_timestamp(start, zone)
            raise CohortHistoryError(
                f"Missing background week {k} starting {when}: no events recorded that week",
                week=k,
                start=when,
            )

    labels = _labels_of(cohort_map)
    logs: T.Dict[LogKey, IndividualLog] = {}
    for index, window in enumerate(
        tqdm(windows, unit="windows", desc="Slicing windows", disable=disable_progress)
    ):
        result = ingest_events(records, window, cohort_map, kind=kind)
        for log in result.logs:
            logs[(log.individual_id, index)] = log
        LOG.debug(
            f"window {index} starting {format_timestamp(window.start, zone)}: "
            f"{result.in_window_events} events"
        )

    return StudyDataset(
        attack_window=attack_window,
        background_windows=tuple(windows[1:]),
        logs=logs,
        cohorts=dict(cohort_map),
        labels=labels,
        zone=zone,
    )
