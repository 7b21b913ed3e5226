import math
import typing as T
from dataclasses import dataclass

import numpy as np

from .error import CohortDegenerateError
from .event_model import IndividualLog
from .types_fmt import HOUR, ProfileMode


@dataclass(frozen=True, eq=False)
class CumulativeCurve:
    """
    Normalized cumulative activity C(t) of a population on [0, t_max].

    Jumps are kept as integer event counts; C(t) is the count at or before t divided once by
    the total, so the curve is right-continuous and reaches exactly 1.
    """

    # seconds from the window start, strictly increasing
    jump_times: np.ndarray
    jump_counts: np.ndarray
    t_max: float

    def __post_init__(self):
        times = np.array(self.jump_times, dtype=np.float64)
        counts = np.array(self.jump_counts, dtype=np.int64)
        if times.shape != counts.shape or times.ndim != 1:
            raise ValueError("jump_times and jump_counts must be matching vectors")
        if times.size == 0 or counts.sum() < 1:
            raise CohortDegenerateError("empty population activity")
        if np.any(counts <= 0):
            raise ValueError("jump counts must be positive")
        if np.any(np.diff(times) <= 0):
            raise ValueError("jump times must be strictly increasing")
        if times[0] < 0 or times[-1] >= self.t_max:
            raise ValueError(f"jump times must lie in [0, {self.t_max})")
        times.setflags(write=False)
        counts.setflags(write=False)
        object.__setattr__(self, "jump_times", times)
        object.__setattr__(self, "jump_counts", counts)

    @property
    def total_events(self) -> int:
        return int(self.jump_counts.sum())

    @property
    def jump_sizes(self) -> np.ndarray:
        return self.jump_counts / self.total_events

    def value_at(self, t: T.Union[float, np.ndarray]) -> T.Union[float, np.ndarray]:
        cumulative = np.concatenate(([0], np.cumsum(self.jump_counts)))
        index = np.searchsorted(self.jump_times, t, side="right")
        values = cumulative[index] / self.total_events
        return float(values) if np.ndim(values) == 0 else values

    def as_points(self) -> T.List[T.List[float]]:
        """Step corners as [offset hours, C] pairs, ending at [t_max hours, 1]."""
        cumulative = np.cumsum(self.jump_counts) / self.total_events
        points = [[0.0, float(self.value_at(0.0))]]
        for time, value in zip(self.jump_times, cumulative):
            points.append([float(time) / HOUR, float(value)])
        points.append([self.t_max / HOUR, 1.0])
        return points


class MergedEvents:
    """
    Events of several sources on one sorted timeline, each event tagged with its source.

    area() evaluates the divergence between two curves built by weighting the sources with
    non-negative integer multiplicities; the integrand is constant between consecutive
    distinct event times, so a single sweep gives the exact integral.
    """

    def __init__(self, times: np.ndarray, owners: np.ndarray, t_max: float):
        times = np.asarray(times, dtype=np.float64)
        owners = np.asarray(owners, dtype=np.int64)
        order = np.argsort(times, kind="stable")
        self.times = times[order]
        self.owners = owners[order]
        self.t_max = float(t_max)
        if self.times.size:
            is_last = np.ones(self.times.size, dtype=bool)
            is_last[:-1] = self.times[1:] != self.times[:-1]
            self.last = np.flatnonzero(is_last)
            self.widths = np.diff(np.append(self.times[self.last], self.t_max))
        else:
            self.last = np.zeros(0, dtype=np.int64)
            self.widths = np.zeros(0, dtype=np.float64)

    @classmethod
    def from_logs(
        cls, logs: T.Sequence[IndividualLog], t_max: float, extra: T.Sequence[IndividualLog] = ()
    ) -> "MergedEvents":
        # source i is logs[i]; every log in extra shares the single source len(logs)
        chunks = [log.offsets for log in logs] + [log.offsets for log in extra]
        owners = [np.full(log.n_events, i, dtype=np.int64) for i, log in enumerate(logs)]
        owners += [np.full(log.n_events, len(logs), dtype=np.int64) for log in extra]
        if not chunks:
            return cls(np.zeros(0), np.zeros(0, dtype=np.int64), t_max)
        return cls(np.concatenate(chunks), np.concatenate(owners), t_max)

    def totals(self, weights: np.ndarray) -> int:
        return int(np.asarray(weights, dtype=np.int64)[self.owners].sum())

    def area(self, weights_x: np.ndarray, weights_y: np.ndarray) -> float:
        """Divergence in hours between the curves weighted by weights_x and weights_y."""
        wx = np.asarray(weights_x, dtype=np.int64)[self.owners]
        wy = np.asarray(weights_y, dtype=np.int64)[self.owners]
        cx = np.cumsum(wx)[self.last]
        cy = np.cumsum(wy)[self.last]
        nx = int(cx[-1]) if cx.size else 0
        ny = int(cy[-1]) if cy.size else 0
        if nx == 0 or ny == 0:
            raise CohortDegenerateError("empty population activity")
        diff = np.abs(cx * ny - cy * nx)
        return float(np.dot(diff, self.widths)) / (nx * ny) / HOUR


def _common_duration(logs: T.Sequence[IndividualLog]) -> float:
    durations = {log.duration for log in logs}
    if len(durations) > 1:
        raise ValueError(f"logs cover windows of different durations {sorted(durations)}")
    return durations.pop()


def population_curve(logs: T.Sequence[IndividualLog], t_max: T.Optional[float] = None) -> CumulativeCurve:
    logs = list(logs)
    if t_max is None:
        if not logs:
            raise CohortDegenerateError("empty population activity")
        t_max = _common_duration(logs)
    offsets = np.concatenate([log.offsets for log in logs]) if logs else np.zeros(0)
    if offsets.size == 0:
        raise CohortDegenerateError("empty population activity")
    times, counts = np.unique(offsets, return_counts=True)
    return CumulativeCurve(times, counts, t_max)


def delta_area(x: CumulativeCurve, y: CumulativeCurve) -> float:
    """Area between two cumulative curves, in hours."""
    if x.t_max != y.t_max:
        raise ValueError(f"curves cover different windows ({x.t_max} != {y.t_max})")
    nx = x.jump_times.size
    merged = MergedEvents(
        np.concatenate((x.jump_times, y.jump_times)),
        np.concatenate((np.arange(nx), nx + np.arange(y.jump_times.size))),
        x.t_max,
    )
    zeros_x = np.zeros(nx, dtype=np.int64)
    zeros_y = np.zeros(y.jump_times.size, dtype=np.int64)
    return merged.area(
        np.concatenate((x.jump_counts, zeros_y)),
        np.concatenate((zeros_x, y.jump_counts)),
    )


@dataclass(frozen=True, eq=False)
class DiurnalProfile:
    bin_width: float
    t_max: float
    counts: np.ndarray

    @property
    def n_bins(self) -> int:
        return int(self.counts.size)

    def same_shape(self, other: "DiurnalProfile") -> bool:
        return self.bin_width == other.bin_width and self.n_bins == other.n_bins

    def as_dict(self) -> T.Dict[str, T.Any]:
        return {
            "bin_hours": self.bin_width / HOUR,
            "t_max_hours": self.t_max / HOUR,
            "counts": [float(c) if isinstance(c, np.floating) else int(c) for c in self.counts],
        }


def diurnal_profile(
    logs: T.Sequence[IndividualLog],
    bin_width: float = HOUR,
    t_max: T.Optional[float] = None,
) -> DiurnalProfile:
    if bin_width <= 0:
        raise ValueError(f"bin_width must be positive, got {bin_width}")
    logs = list(logs)
    if t_max is None:
        if not logs:
            raise ValueError("t_max is required for an empty population")
        t_max = _common_duration(logs)
    n_bins = int(math.ceil(t_max / bin_width))
    offsets = np.concatenate([log.offsets for log in logs]) if logs else np.zeros(0)
    index = np.minimum((offsets // bin_width).astype(np.int64), n_bins - 1)
    counts = np.bincount(index, minlength=n_bins).astype(np.int64)
    return DiurnalProfile(bin_width, t_max, counts)


def mean_profile(profiles: T.Sequence[DiurnalProfile]) -> DiurnalProfile:
    profiles = list(profiles)
    if not profiles:
        raise ValueError("no profiles to average")
    first = profiles[0]
    for profile in profiles[1:]:
        if not first.same_shape(profile):
            raise ValueError("profiles have different bins")
    counts = np.mean([p.counts for p in profiles], axis=0)
    return DiurnalProfile(first.bin_width, first.t_max, counts)


class NormalizedProfile(T.NamedTuple):
    ratios: np.ndarray
    # bins whose background mean is zero
    undefined: np.ndarray
    mode: str

    def as_list(self) -> T.List[T.Optional[float]]:
        return [None if flag else float(r) for r, flag in zip(self.ratios, self.undefined)]


def normalize_to_background(
    day: DiurnalProfile,
    background: T.Sequence[DiurnalProfile],
    mode: ProfileMode = "per_bin",
) -> NormalizedProfile:
    background = list(background)
    if not background:
        raise ValueError("background profiles are required")
    for profile in background:
        if not day.same_shape(profile):
            raise ValueError("day and background profiles have different bins")
    mean = mean_profile(background).counts.astype(np.float64)
    if mode == "per_bin":
        reference = mean
    elif mode == "global":
        reference = np.full(day.n_bins, mean.mean())
    else:
        raise ValueError(f"Invalid normalization mode {mode}")
    undefined = reference == 0
    ratios = np.full(day.n_bins, np.nan)
    ratios[~undefined] = day.counts[~undefined] / reference[~undefined]
    return NormalizedProfile(ratios, undefined, mode)


def activity_ratio(
    logs_a: T.Sequence[IndividualLog], logs_b: T.Sequence[IndividualLog]
) -> float:
    """
    Mean events per cohort-A log over mean events per cohort-B log.

    Each log is one individual in one window, so passing every background log of a cohort
    gives the mean per individual per window.
    """
    logs_a, logs_b = list(logs_a), list(logs_b)
    if not logs_a or not logs_b:
        raise CohortDegenerateError("activity ratio needs two non-empty cohorts")
    mean_a = sum(log.n_events for log in logs_a) / len(logs_a)
    mean_b = sum(log.n_events for log in logs_b) / len(logs_b)
    if mean_b == 0:
        raise CohortDegenerateError("cohort B has no events; activity ratio undefined")
    return mean_a / mean_b
