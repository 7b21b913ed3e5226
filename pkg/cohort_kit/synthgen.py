import dataclasses
import logging
import os
import typing as T
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
from tqdm import tqdm

from . import rng
from .event_log import write_cohort_map, write_events
from .event_model import AnalysisWindow, IndividualLog, StudyDataset
from .geo import GeoBoundingBox
from .gps_parser import write_gps
from .resampling import background_null, empirical_p, shuffle_null
from .types_fmt import DAY, HOUR, EventRecord, GpsRecord, KernelShape

LOG = logging.getLogger(__name__)

# 2017-04-07T14:53:00Z
DEFAULT_ANCHOR = 1491576780.0
GPS_RECORDS_AT_HOME = 6
GPS_RECORDS_ELSEWHERE = 2


def default_diurnal_shape() -> T.Tuple[float, ...]:
    # quiet night, a midday plateau and an evening peak; a fixture, not a fit
    hours = np.arange(24) + 0.5
    weights = (
        0.08
        + 0.9 * np.exp(-0.5 * ((hours - 12.5) / 3.0) ** 2)
        + 1.0 * np.exp(-0.5 * ((hours - 19.5) / 2.2) ** 2)
    )
    weights /= weights.mean()
    return tuple(float(w) for w in weights)


@dataclass(frozen=True)
class ResponseKernel:
    """
    Multiplicative rate perturbation from onset on, with one amplitude and decay per cohort.

    exponential_decay: 1 + (amplitude - 1) * exp(-(t - onset) / decay)
    boxcar: amplitude on [onset, onset + decay)
    """

    onset: float
    amplitude: T.Tuple[float, float]
    decay: T.Tuple[float, float]
    shape: KernelShape = "exponential_decay"

    def __post_init__(self):
        if self.shape not in ("exponential_decay", "boxcar"):
            raise ValueError(f"Invalid kernel shape {self.shape}")
        if self.onset < 0:
            raise ValueError("onset must be non-negative")
        for amplitude in self.amplitude:
            if not np.isfinite(amplitude) or amplitude < 0:
                raise ValueError(f"amplitude must be finite and non-negative, got {amplitude}")
        for decay in self.decay:
            if not decay > 0:
                raise ValueError(f"decay must be positive, got {decay}")

    @property
    def symmetric(self) -> bool:
        return self.amplitude[0] == self.amplitude[1] and self.decay[0] == self.decay[1]

    def factor(self, t: np.ndarray, cohort: int) -> np.ndarray:
        amplitude, decay = self.amplitude[cohort], self.decay[cohort]
        since = t - self.onset
        after = since >= 0
        out = np.ones_like(t, dtype=np.float64)
        if self.shape == "exponential_decay":
            out[after] = 1.0 + (amplitude - 1.0) * np.exp(-since[after] / decay)
        else:
            out[after & (since < decay)] = amplitude
        return out

    def envelope(self, cohort: int) -> float:
        return max(1.0, self.amplitude[cohort])


@dataclass(frozen=True)
class SyntheticSpec:
    n_a: int
    n_b: int
    # events per individual per day
    base_rate: float = 20.0
    activity_ratio: float = 1.18
    diurnal_shape: T.Tuple[float, ...] = dataclasses.field(default_factory=default_diurnal_shape)
    # sigma of the log-normal, unit-median individual multiplier
    dispersion: float = 0.0
    response: T.Optional[ResponseKernel] = None
    seed: int = 0
    labels: T.Tuple[str, str] = ("A", "B")
    t_max: float = DAY
    anchor: float = DEFAULT_ANCHOR

    def __post_init__(self):
        if self.n_a < 1 or self.n_b < 1:
            raise ValueError(f"cohort sizes must be at least 1, got {self.n_a} and {self.n_b}")
        if not self.base_rate > 0:
            raise ValueError("base_rate must be positive")
        if not self.activity_ratio > 0:
            raise ValueError("activity_ratio must be positive")
        if self.dispersion < 0:
            raise ValueError("dispersion must be non-negative")
        if not self.t_max > 0:
            raise ValueError("t_max must be positive")
        shape = np.asarray(self.diurnal_shape, dtype=np.float64)
        if shape.shape != (24,) or np.any(shape < 0) or shape.sum() <= 0:
            raise ValueError("diurnal_shape needs 24 non-negative weights with a positive sum")
        object.__setattr__(self, "diurnal_shape", tuple(float(w) for w in shape / shape.mean()))
        if len(self.labels) != 2 or self.labels[0] == self.labels[1]:
            raise ValueError(f"two distinct labels are required, got {self.labels}")
        rng.check_seed(self.seed)

    @property
    def n_total(self) -> int:
        return self.n_a + self.n_b

    def individual_id(self, index: int) -> str:
        return f"u{index:06d}"

    def cohort_of(self, index: int) -> int:
        return 0 if index < self.n_a else 1


def _shape_at(spec: SyntheticSpec, t: np.ndarray) -> np.ndarray:
    # diurnal weights follow the clock, so the window's start time sets the phase
    phase = spec.anchor % DAY
    hour = (((phase + t) % DAY) // HOUR).astype(np.int64)
    return np.asarray(spec.diurnal_shape)[hour]


def _thinned_offsets(
    spec: SyntheticSpec,
    gen: np.random.Generator,
    rate: float,
    kernel: T.Optional[ResponseKernel],
    cohort: int,
) -> np.ndarray:
    # rate is events per second before the diurnal and response factors
    envelope = rate * max(spec.diurnal_shape)
    if kernel is not None:
        envelope *= kernel.envelope(cohort)
    if envelope <= 0:
        return np.zeros(0)
    n_candidates = gen.poisson(envelope * spec.t_max)
    candidates = gen.uniform(0.0, spec.t_max, size=n_candidates)
    intensity = rate * _shape_at(spec, candidates)
    if kernel is not None:
        intensity = intensity * kernel.factor(candidates, cohort)
    keep = gen.uniform(0.0, envelope, size=n_candidates) < intensity
    return np.sort(candidates[keep])


def _generate_individual(spec: SyntheticSpec, index: int, windows: int) -> T.List[np.ndarray]:
    """Offsets of individual `index` for window 0 (attack) and the background windows 1..W."""
    gen = rng.stream(spec.seed, index)
    cohort = spec.cohort_of(index)
    # always drawn, so dispersion 0 and > 0 consume the stream alike
    multiplier = float(np.exp(spec.dispersion * gen.standard_normal()))
    cohort_multiplier = spec.activity_ratio if cohort == 0 else 1.0
    rate = spec.base_rate / DAY * cohort_multiplier * multiplier
    offsets = []
    for window in range(windows + 1):
        kernel = spec.response if window == 0 else None
        offsets.append(_thinned_offsets(spec, gen, rate, kernel, cohort))
    return offsets


def generate(
    spec: SyntheticSpec,
    windows: int = 8,
    threads: int = 1,
    disable_progress: bool = False,
) -> StudyDataset:
    """
    Draw a two-cohort study from an inhomogeneous Poisson process by thinning.

    Args:
        spec: generative description; cohort A holds individuals 0..n_a-1
        windows: number of background weeks W
        threads: workers for per-individual generation; output does not depend on it

    Returns:
        the study, its attack window starting at spec.anchor and carrying the response kernel
    """
    if windows < 1:
        raise ValueError(f"windows must be at least 1, got {windows}")
    attack = AnalysisWindow(spec.anchor, spec.t_max).validate()
    background = tuple(attack.shifted(k) for k in range(1, windows + 1))

    def run(index: int) -> T.List[np.ndarray]:
        return _generate_individual(spec, index, windows)

    indices = range(spec.n_total)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            per_individual = list(
                tqdm(executor.map(run, indices), total=spec.n_total, unit="individuals",
                     desc="Generating", disable=disable_progress)
            )
    else:
        per_individual = [
            run(i)
            for i in tqdm(indices, unit="individuals", desc="Generating", disable=disable_progress)
        ]

    cohorts: T.Dict[str, str] = {}
    logs: T.Dict[T.Tuple[str, int], IndividualLog] = {}
    for index, offsets in enumerate(per_individual):
        individual_id = spec.individual_id(index)
        label = spec.labels[spec.cohort_of(index)]
        cohorts[individual_id] = label
        for window, window_offsets in enumerate(offsets):
            logs[(individual_id, window)] = IndividualLog(
                individual_id, label, window_offsets, spec.t_max
            )

    return StudyDataset(
        attack_window=attack,
        background_windows=background,
        logs=logs,
        cohorts=cohorts,
        labels=T.cast(T.Tuple[str, str], tuple(sorted(spec.labels))),
    )


def synthetic_gps(
    spec: SyntheticSpec,
    bbox: GeoBoundingBox,
    outside_fraction: float = 0.0,
) -> T.List[GpsRecord]:
    """
    GPS records placing every individual's most visited cell inside the box, except for a
    fraction homed just north of it.
    """
    if not 0 <= outside_fraction <= 1:
        raise ValueError("outside_fraction must lie in [0, 1]")
    records: T.List[GpsRecord] = []
    height = bbox.max_lat - bbox.min_lat
    width = bbox.max_lon - bbox.min_lon
    start = spec.anchor - 8 * 7 * DAY
    for index in range(spec.n_total):
        gen = rng.stream(spec.seed, index, 1)
        outside = gen.random() < outside_fraction
        # keep homes off the edges so grid snapping stays in the box
        lat = bbox.min_lat + height * gen.uniform(0.1, 0.9)
        lon = bbox.min_lon + width * gen.uniform(0.1, 0.9)
        if outside:
            lat = min(89.0, bbox.max_lat + max(0.5, height))
        individual_id = spec.individual_id(index)
        times = np.sort(gen.uniform(start, spec.anchor, size=GPS_RECORDS_AT_HOME + GPS_RECORDS_ELSEWHERE))
        for k, ts in enumerate(times):
            if k < GPS_RECORDS_AT_HOME:
                point = (lat, lon)
            else:
                point = (
                    bbox.min_lat + height * gen.random(),
                    bbox.min_lon + width * gen.random(),
                )
            records.append(GpsRecord(individual_id, float(ts), point[0], point[1]))
    return records


def dataset_records(dataset: StudyDataset) -> T.List[EventRecord]:
    records: T.List[EventRecord] = []
    for (_, index), log in sorted(dataset.logs.items()):
        records.extend(log.to_records(dataset.window(index)))
    return records


def export_dataset(
    dataset: StudyDataset,
    output_dir: str,
    gps: T.Optional[T.Sequence[GpsRecord]] = None,
    fmt: str = "csv",
) -> T.Dict[str, str]:
    """
    Write events, cohort map and (optionally) GPS records in the ingestible formats.

    Returns:
        written file paths keyed by "events", "cohorts" and "gps"
    """
    ext = {"csv": ".csv", "jsonl": ".jsonl"}[fmt]
    os.makedirs(output_dir, exist_ok=True)
    paths = {
        "events": os.path.join(output_dir, "events" + ext),
        "cohorts": os.path.join(output_dir, "cohorts" + ext),
    }
    n_events = write_events(paths["events"], dataset_records(dataset))
    write_cohort_map(paths["cohorts"], dataset.cohorts)
    if gps is not None:
        paths["gps"] = os.path.join(output_dir, "gps" + ext)
        write_gps(paths["gps"], gps)
    LOG.info(f"Wrote {n_events} events of {len(dataset.cohorts)} individuals to {output_dir}")
    return paths


def null_battery(
    spec: SyntheticSpec,
    datasets: int,
    replicates: int = 2000,
    model: str = "shuffle",
    windows: int = 8,
    threads: int = 1,
    disable_progress: bool = False,
) -> np.ndarray:
    """
    Raw p-values of the full null pipeline on independent synthetic datasets.

    Dataset k and its resampling run use seeds derived from (spec.seed, k).
    """
    if spec.response is not None and not spec.response.symmetric:
        raise ValueError("a null battery needs no response kernel or identical kernels")
    if model not in ("shuffle", "background"):
        raise ValueError(f"Invalid null model {model}")
    if datasets < 1:
        raise ValueError("datasets must be at least 1")
    pvalues = np.empty(datasets, dtype=np.float64)
    for k in tqdm(range(datasets), unit="datasets", desc="Null battery", disable=disable_progress):
        data_seed = rng.derived_seed(spec.seed, k, 0)
        null_seed = rng.derived_seed(spec.seed, k, 1)
        study = generate(dataclasses.replace(spec, seed=data_seed), windows, threads, True)
        if model == "shuffle":
            null = shuffle_null(
                study.window_logs(0), replicates=replicates, seed=null_seed,
                cohort_a=spec.labels[0], threads=threads, disable_progress=True,
            )
        else:
            null = background_null(
                study, replicates=replicates, seed=null_seed, cohort_a=spec.labels[0],
                threads=threads, disable_progress=True,
            )
        pvalues[k] = empirical_p(null).p
    return pvalues
