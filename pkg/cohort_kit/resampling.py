import logging
import typing as T
from dataclasses import dataclass, field

import numpy as np

from . import rng
from .curves import MergedEvents, delta_area, population_curve
from .error import CohortDegenerateError
from .event_model import IndividualLog, StudyDataset
from .types_fmt import HOUR, EmpiricalPJSON, NullModel, NullSummaryJSON

LOG = logging.getLogger(__name__)

DEFAULT_REPLICATES = 100_000
MAX_REDRAWS = 1000
# relative tolerance when comparing a sample with the observed value
TIE_RTOL = 1e-12

QUANTILES: T.List[T.Tuple[str, float]] = [
    ("min", 0.0),
    ("q0.1", 0.001),
    ("q1", 0.01),
    ("q5", 0.05),
    ("q25", 0.25),
    ("q50", 0.5),
    ("q75", 0.75),
    ("q95", 0.95),
    ("q99", 0.99),
    ("q99.9", 0.999),
    ("max", 1.0),
]


@dataclass(frozen=True, eq=False)
class NullDistribution:
    samples: np.ndarray
    observed: float
    seed: int
    model: NullModel
    t_max_hours: float
    redraws: int = 0
    meta: T.Dict[str, T.Any] = field(default_factory=dict)

    def __post_init__(self):
        samples = np.array(self.samples, dtype=np.float64)
        if samples.ndim != 1 or samples.size < 1:
            raise ValueError("a null distribution needs at least one replicate")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    @property
    def replicates(self) -> int:
        return int(self.samples.size)

    def as_dict(self, full_samples: bool = False) -> NullSummaryJSON:
        raw = empirical_p(self, smoothed=False)
        smooth = empirical_p(self, smoothed=True)
        summary: NullSummaryJSON = {
            "model": self.model,
            "seed": self.seed,
            "replicates": self.replicates,
            "observed": self.observed,
            "redraws": self.redraws,
            "p_raw": raw.as_dict(),
            "p_smoothed": smooth.as_dict(),
        }
        if full_samples:
            summary["samples"] = [float(s) for s in self.samples]
        else:
            summary["quantiles"] = quantile_summary(self.samples)
        summary.update(self.meta)  # type: ignore
        return summary


class EmpiricalP(T.NamedTuple):
    p: float
    count_ge: int
    replicates: int
    smoothed: bool

    def as_dict(self) -> EmpiricalPJSON:
        return {
            "p": self.p,
            "count_ge": self.count_ge,
            "replicates": self.replicates,
            "smoothed": self.smoothed,
        }


def empirical_p(null: NullDistribution, smoothed: bool = False) -> EmpiricalP:
    """
    Fraction of null samples at least as large as the observed divergence.

    Raw: count/R. Smoothed: (count + 1)/(R + 1), never zero.
    """
    replicates = null.replicates
    threshold = null.observed - TIE_RTOL * max(1.0, abs(null.observed))
    count_ge = int(np.count_nonzero(null.samples >= threshold))
    if smoothed:
        return EmpiricalP((count_ge + 1) / (replicates + 1), count_ge, replicates, True)
    return EmpiricalP(count_ge / replicates, count_ge, replicates, False)


def quantile_summary(samples: np.ndarray) -> T.Dict[str, float]:
    values = np.quantile(np.asarray(samples, dtype=np.float64), [q for _, q in QUANTILES])
    return {name: float(v) for (name, _), v in zip(QUANTILES, values)}


def _check_replicates(replicates: int) -> int:
    replicates = int(replicates)
    if replicates < 1:
        raise ValueError(f"replicates must be at least 1, got {replicates}")
    return replicates


def _labels(logs: T.Sequence[IndividualLog], cohort_a: T.Optional[str]) -> T.Tuple[str, str]:
    labels = sorted({log.cohort for log in logs})
    if cohort_a is None:
        if not labels:
            raise CohortDegenerateError("no individuals to compare")
        cohort_a = labels[0]
    others = [label for label in labels if label != cohort_a]
    if len(others) > 1:
        raise CohortDegenerateError(f"Expect two cohorts, got {labels}")
    return cohort_a, others[0] if others else ""


def _t_max(logs: T.Sequence[IndividualLog]) -> float:
    durations = {log.duration for log in logs}
    if len(durations) != 1:
        raise ValueError("logs must share one window duration")
    return durations.pop()


def shuffle_null(
    day_logs: T.Sequence[IndividualLog],
    size_a: T.Optional[int] = None,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    cohort_a: T.Optional[str] = None,
    threads: int = 1,
    max_redraws: int = MAX_REDRAWS,
    disable_progress: bool = False,
) -> NullDistribution:
    """
    Label-shuffle null: split the day's individuals at random into pseudo-cohorts of the
    original sizes and measure the divergence of their curves.

    Args:
        day_logs: one log per individual for the analysed window
        size_a: size of the first pseudo-cohort; defaults to the size of cohort_a
        replicates: R
        seed: run seed, replicate k draws from stream (seed, k)
        cohort_a: label of the first cohort; defaults to the smallest label

    Returns:
        the null distribution, observed being the divergence between the true cohorts
    """
    replicates = _check_replicates(replicates)
    logs = sorted(day_logs, key=lambda log: log.individual_id)
    total = len(logs)
    cohort_a, _ = _labels(logs, cohort_a)
    is_a = np.array([log.cohort == cohort_a for log in logs], dtype=np.int64)
    if size_a is None:
        size_a = int(is_a.sum())
    if size_a <= 0 or size_a >= total:
        raise CohortDegenerateError(
            f"size of the first group must lie strictly between 0 and {total}, got {size_a}"
        )

    t_max = _t_max(logs)
    merged = MergedEvents.from_logs(logs, t_max)
    observed = merged.area(is_a, 1 - is_a)
    counts = np.array([log.n_events for log in logs], dtype=np.int64)
    total_events = int(counts.sum())

    def replicate(gen: np.random.Generator) -> T.Tuple[float, int]:
        for attempt in range(max_redraws + 1):
            chosen = gen.choice(total, size=size_a, replace=False)
            events_a = int(counts[chosen].sum())
            if 0 < events_a < total_events:
                member = np.zeros(total, dtype=np.int64)
                member[chosen] = 1
                return merged.area(member, 1 - member), attempt
        raise CohortDegenerateError(
            f"no split with events in both groups after {max_redraws} redraws"
        )

    samples, redraws = rng.run_replicates(
        replicate, replicates, seed, threads, desc="Shuffling labels",
        disable_progress=disable_progress,
    )
    return NullDistribution(
        samples, observed, seed, "shuffle", t_max / HOUR, redraws,
        meta={"cohort": cohort_a},
    )


def _background_pools(
    study: StudyDataset, cohort_a: T.Optional[str]
) -> T.Tuple[str, str, T.List[IndividualLog], T.List[IndividualLog]]:
    label_a = cohort_a or study.labels[0]
    if label_a not in study.labels:
        raise CohortDegenerateError(f"Unknown cohort {label_a}, expect one of {study.labels}")
    label_b = study.labels[1] if label_a == study.labels[0] else study.labels[0]
    pool_a = study.background_pool(label_a)
    pool_b = study.background_pool(label_b)
    for label, pool in ((label_a, pool_a), (label_b, pool_b)):
        if not pool:
            raise CohortDegenerateError(f"empty background pool for cohort {label}")
    return label_a, label_b, pool_a, pool_b


def background_null(
    study: StudyDataset,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    cohort_a: T.Optional[str] = None,
    replace: bool = True,
    threads: int = 1,
    max_redraws: int = MAX_REDRAWS,
    disable_progress: bool = False,
) -> NullDistribution:
    """
    Background-resample null: pseudo-cohorts of the original sizes filled with logs drawn
    from the same cohort's background weeks.

    With replace=True every slot draws uniformly, with replacement, from the pool of all
    (individual, week) logs of the cohort. With replace=False each individual appears exactly
    once, contributing one of its own background weeks chosen uniformly.
    """
    replicates = _check_replicates(replicates)
    label_a, label_b, pool_a, pool_b = _background_pools(study, cohort_a)
    size_a, size_b = len(study.members(label_a)), len(study.members(label_b))
    weeks = study.weeks

    observed = delta_area(
        population_curve(study.window_logs(0, label_a), study.t_max),
        population_curve(study.window_logs(0, label_b), study.t_max),
    )

    merged = MergedEvents.from_logs(pool_a + pool_b, study.t_max)
    n_a, n_b = len(pool_a), len(pool_b)
    pool_counts = np.array([log.n_events for log in pool_a + pool_b], dtype=np.int64)
    if not pool_counts[:n_a].any() or not pool_counts[n_a:].any():
        raise CohortDegenerateError("a background pool has no events")

    def draw(gen: np.random.Generator, pool_size: int, size: int) -> np.ndarray:
        if replace:
            return gen.integers(0, pool_size, size=size)
        # pools are ordered by individual, then by week
        return np.arange(size) * weeks + gen.integers(0, weeks, size=size)

    def replicate(gen: np.random.Generator) -> T.Tuple[float, int]:
        for attempt in range(max_redraws + 1):
            mult_a = np.bincount(draw(gen, n_a, size_a), minlength=n_a)
            mult_b = np.bincount(draw(gen, n_b, size_b), minlength=n_b)
            if pool_counts[:n_a] @ mult_a and pool_counts[n_a:] @ mult_b:
                weights_x = np.concatenate((mult_a, np.zeros(n_b, dtype=np.int64)))
                weights_y = np.concatenate((np.zeros(n_a, dtype=np.int64), mult_b))
                return merged.area(weights_x, weights_y), attempt
        raise CohortDegenerateError(
            f"no background draw with events in both cohorts after {max_redraws} redraws"
        )

    samples, redraws = rng.run_replicates(
        replicate, replicates, seed, threads, desc="Resampling background",
        disable_progress=disable_progress,
    )
    return NullDistribution(
        samples, observed, seed, "background", study.t_max / HOUR, redraws,
        meta={"cohort": label_a},
    )


def spike_null(
    study: StudyDataset,
    cohort: str,
    week_index: int,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    threads: int = 1,
    max_redraws: int = MAX_REDRAWS,
    disable_progress: bool = False,
) -> NullDistribution:
    """
    Bootstrap spike test of one cohort against background week i.

    Each replicate draws n logs with replacement from the cohort's n*W background logs and
    measures the divergence of their curve from the week-i curve; the observed value is the
    divergence between the attack-window curve and the week-i curve.
    """
    replicates = _check_replicates(replicates)
    if cohort not in study.labels:
        raise CohortDegenerateError(f"Unknown cohort {cohort}, expect one of {study.labels}")
    if not 1 <= week_index <= study.weeks:
        raise ValueError(f"week_index must lie in 1..{study.weeks}, got {week_index}")
    members = study.members(cohort)
    if not members:
        raise CohortDegenerateError(f"cohort {cohort} has no individuals")
    pool = study.background_pool(cohort)
    pool_counts = np.array([log.n_events for log in pool], dtype=np.int64)
    if not pool_counts.any():
        raise CohortDegenerateError(f"empty background pool for cohort {cohort}")

    reference_logs = study.window_logs(week_index, cohort)
    reference = population_curve(reference_logs, study.t_max)
    observed = delta_area(population_curve(study.window_logs(0, cohort), study.t_max), reference)

    n = len(members)
    merged = MergedEvents.from_logs(pool, study.t_max, extra=reference_logs)
    reference_weights = np.zeros(len(pool) + 1, dtype=np.int64)
    reference_weights[-1] = 1

    def replicate(gen: np.random.Generator) -> T.Tuple[float, int]:
        for attempt in range(max_redraws + 1):
            mult = np.bincount(gen.integers(0, len(pool), size=n), minlength=len(pool))
            if pool_counts @ mult:
                return merged.area(np.append(mult, 0), reference_weights), attempt
        raise CohortDegenerateError(
            f"no bootstrap draw with events after {max_redraws} redraws"
        )

    samples, redraws = rng.run_replicates(
        replicate, replicates, seed, threads, desc=f"Bootstrapping {cohort} week {week_index}",
        disable_progress=disable_progress,
    )
    return NullDistribution(
        samples, observed, seed, "spike_bootstrap", study.t_max / HOUR, redraws,
        meta={"cohort": cohort, "week": week_index},
    )
