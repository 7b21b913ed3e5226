import configparser
import logging
import typing as T

from . import rng
from .archive import read_archive, write_archive
from .combine import combinable_pvalues, fisher_combine
from .config import VOLATILE_KEYS, load_anchors, load_boxes, load_config, save_config
from .curves import activity_ratio as cohort_activity_ratio
from .curves import diurnal_profile, mean_profile, normalize_to_background
from .error import CohortConfigError, CohortDegenerateError, CohortInputError
from .event_log import read_cohort_map, read_events
from .event_model import AnalysisWindow, StudyDataset, ingest_events, parse_anchor, slice_background
from .geo import DEFAULT_GRID_STEP, GeoBoundingBox, home_locations, select_cohort
from .gps_parser import read_gps
from .report import curve_points, null_entry, read_report
from .resampling import (
    DEFAULT_REPLICATES,
    background_null,
    empirical_p,
    shuffle_null,
    spike_null,
)
from .synthgen import (
    DEFAULT_ANCHOR,
    ResponseKernel,
    SyntheticSpec,
    export_dataset,
    generate,
    synthetic_gps,
)
from .types_fmt import HOUR, EventRecord, IngestSummary, format_timestamp, local_shift

LOG = logging.getLogger(__name__)

Sections = T.Dict[str, T.Any]


def _parser_of(config: T.Optional[str]) -> T.Optional[configparser.ConfigParser]:
    return load_config(config) if config else None


def resolve_box(
    city: T.Optional[str] = None,
    box: T.Optional[T.Sequence[float]] = None,
    parser: T.Optional[configparser.ConfigParser] = None,
) -> T.Optional[GeoBoundingBox]:
    """An explicit box wins over a city name looked up in the configured boxes."""
    if box:
        try:
            return GeoBoundingBox.from_values([float(v) for v in box])
        except ValueError as ex:
            raise CohortConfigError(f"Invalid bounding box {box}: {ex}")
    if city:
        boxes = load_boxes(parser)
        if city not in boxes:
            raise CohortConfigError(f"Unknown city {city}, expect one of {sorted(boxes)}")
        try:
            return GeoBoundingBox.from_values(boxes[city])
        except ValueError as ex:
            raise CohortConfigError(f"Invalid bounding box of {city}: {ex}")
    return None


def _convention(transform: T.Optional[str], tail: T.Optional[str]) -> T.Tuple[str, str]:
    if transform is None or tail is None:
        raise CohortConfigError(
            "the combination convention has no default: "
            "pass --transform {direct,one_minus} and --tail {upper,lower}"
        )
    return transform, tail


def run_ingest(
    events_path: str,
    cohorts_path: str,
    anchor: str,
    output: T.Optional[str] = None,
    gps_path: T.Optional[str] = None,
    city: T.Optional[str] = None,
    box: T.Optional[T.Sequence[float]] = None,
    weeks: int = 8,
    duration_hours: float = 24.0,
    timezone: T.Optional[str] = None,
    kind: T.Optional[str] = None,
    grid_step: float = DEFAULT_GRID_STEP,
    skip_malformed: bool = False,
    config: T.Optional[str] = None,
    disable_progress: bool = False,
) -> IngestSummary:
    """
    Read raw events, select individuals by home location and write the sliced study archive.

    Args:
        events_path: CSV or JSON-lines events
        cohorts_path: CSV or JSON-lines cohort map (id, label)
        anchor: attack window start, ISO-8601, epoch seconds or a configured attack name
        output: archive path
        gps_path: GPS records (CSV, JSON-lines or GPX); enables home-location selection
        city: configured bounding box, defaults to the city of a named anchor
        box: explicit min_lat max_lat min_lon max_lon

    Returns:
        the ingestion summary stored in the archive
    """
    if not output:
        raise CohortConfigError("ingest needs --output for the dataset archive")
    if not anchor or not cohorts_path:
        raise CohortConfigError("ingest needs --anchor and --cohorts_path")
    if duration_hours <= 0:
        raise CohortConfigError(f"duration_hours must be positive, got {duration_hours}")
    parser = _parser_of(config)
    anchors = load_anchors(parser)
    zone = timezone or None
    window = AnalysisWindow(parse_anchor(anchor, zone, anchors), duration_hours * HOUR)
    if city is None and anchor in anchors:
        city = anchors[anchor][1]

    cohort_map = read_cohort_map(cohorts_path)
    records, malformed = read_events(events_path, zone, skip_malformed)
    unknown = sorted({r.individual_id for r in records} - set(cohort_map))

    outside: T.List[str] = []
    without_gps: T.List[str] = []
    if gps_path:
        bbox = resolve_box(city, box, parser)
        if bbox is None:
            raise CohortConfigError("--gps_path needs --city, --box or a named --anchor")
        homes = home_locations(read_gps(gps_path, zone), grid_step)
        inside = select_cohort(homes, bbox)
        without_gps = sorted(i for i in cohort_map if i not in homes)
        outside = sorted(i for i in cohort_map if i in homes and i not in inside)
        cohort_map = {i: label for i, label in cohort_map.items() if i in inside}
        LOG.info(
            f"{len(cohort_map)} individuals live in {city or bbox}, "
            f"{len(outside)} outside, {len(without_gps)} without GPS records"
        )
    elif box or city:
        LOG.warning("No GPS records given, the bounding box is not applied")

    dataset = slice_background(
        records, window, cohort_map, weeks, kind=kind, zone=zone, disable_progress=disable_progress
    )
    summary: IngestSummary = {
        "individuals_kept": len(dataset.cohorts),
        "cohort_sizes": dataset.cohort_sizes,
        "per_window_events": dataset.events_per_window(),
        "skipped_ids": unknown,
        "malformed_records": malformed,
        "attack_start": format_timestamp(window.start, zone),
        "background_starts": [format_timestamp(w.start, zone) for w in dataset.background_windows],
    }
    if gps_path:
        summary["dropped_outside_box"] = outside
        summary["dropped_without_gps"] = without_gps
    write_archive(output, dataset, summary)
    return summary


def _attack_sections(dataset: StudyDataset) -> Sections:
    return {
        "curves": {
            label: curve_points(dataset.window_logs(0, label), dataset.t_max)
            for label in dataset.labels
        },
        "events": {
            label: sum(log.n_events for log in dataset.window_logs(0, label))
            for label in dataset.labels
        },
    }


def run_test(
    archive: str,
    model: str = "shuffle",
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    threads: int = 1,
    background_sampling: str = "replacement",
    full_samples: bool = False,
    alpha: float = 0.01,
    cohort_a: T.Optional[str] = None,
    disable_progress: bool = False,
) -> Sections:
    dataset, _ = read_archive(archive)
    if cohort_a is not None and cohort_a not in dataset.labels:
        raise CohortConfigError(f"Unknown cohort {cohort_a}, expect one of {dataset.labels}")
    label_a = cohort_a or dataset.labels[0]
    models = ["shuffle", "background"] if model == "both" else [model]

    nulls = []
    for name in models:
        if name == "shuffle":
            null = shuffle_null(
                dataset.window_logs(0), replicates=replicates, seed=seed, cohort_a=label_a,
                threads=threads, disable_progress=disable_progress,
            )
        elif name == "background":
            if background_sampling not in ("replacement", "per_individual"):
                raise CohortConfigError(f"Invalid background sampling {background_sampling}")
            null = background_null(
                dataset, replicates=replicates, seed=seed, cohort_a=label_a,
                replace=background_sampling == "replacement", threads=threads,
                disable_progress=disable_progress,
            )
        else:
            raise CohortConfigError(f"Invalid null model {name}")
        p = empirical_p(null)
        LOG.info(f"{name} null: observed divergence {null.observed:.6g} h, p = {p.p:.6g}")
        nulls.append(null_entry(null, alpha, full_samples))

    sections = _attack_sections(dataset)
    sections["nulls"] = nulls
    return sections


def run_spike(
    archive: T.Optional[str] = None,
    pvalues: T.Optional[T.Sequence[float]] = None,
    cohort: T.Optional[str] = None,
    transform: T.Optional[str] = None,
    tail: T.Optional[str] = None,
    replicates: int = DEFAULT_REPLICATES,
    seed: int = 0,
    threads: int = 1,
    full_samples: bool = False,
    alpha: float = 0.01,
    disable_progress: bool = False,
) -> Sections:
    """
    Per-week bootstrap spike tests of each cohort, combined into one value per cohort.

    Weeks whose cohort curve is empty are skipped and named in the report. With pvalues the
    per-week values are combined directly.
    """
    transform, tail = _convention(transform, tail)
    if pvalues:
        result = fisher_combine([float(p) for p in pvalues], transform=transform, tail=tail)  # type: ignore
        LOG.info(f"combined p = {result.p_combined:.6g}")
        return {"combined": result.as_dict()}
    if not archive:
        raise CohortConfigError("spike needs a dataset archive or --pvalues")

    dataset, _ = read_archive(archive)
    if cohort is not None and cohort not in dataset.labels:
        raise CohortConfigError(f"Unknown cohort {cohort}, expect one of {dataset.labels}")
    cohorts = [cohort] if cohort else list(dataset.labels)

    nulls = []
    combined = {}
    skipped: T.Dict[str, T.List[int]] = {}
    for label in cohorts:
        raw: T.List[float] = []
        smoothed: T.List[float] = []
        for week in range(1, dataset.weeks + 1):
            if not any(log.n_events for log in dataset.window_logs(week, label)):
                LOG.warning(f"Cohort {label} has no events in background week {week}, skipped")
                skipped.setdefault(label, []).append(week)
                continue
            null = spike_null(
                dataset, label, week, replicates=replicates,
                seed=rng.derived_seed(seed, dataset.labels.index(label), week),
                threads=threads, disable_progress=disable_progress,
            )
            nulls.append(null_entry(null, alpha, full_samples))
            raw.append(empirical_p(null).p)
            smoothed.append(empirical_p(null, smoothed=True).p)
        if not raw:
            raise CohortDegenerateError(f"Cohort {label} has no background week with events")
        values, replaced = combinable_pvalues(raw, smoothed)
        result = fisher_combine(values, transform=transform, tail=tail, upper_bound=replaced)  # type: ignore
        LOG.info(f"cohort {label}: combined p = {result.p_combined:.6g} over {len(raw)} weeks")
        combined[label] = result.as_dict()

    sections = _attack_sections(dataset)
    sections.update({"nulls": nulls, "combined": combined})
    if skipped:
        sections["skipped_weeks"] = skipped
    return sections


def run_combine(
    pvalues: T.Optional[T.Sequence[float]] = None,
    reports: T.Optional[T.Sequence[str]] = None,
    transform: T.Optional[str] = None,
    tail: T.Optional[str] = None,
) -> Sections:
    """
    Combine probabilities given directly, or the empirical p-values of earlier reports.

    Report p-values are grouped by null model; raw zeros are replaced by the smoothed value
    and the combined result is then marked as an upper bound.
    """
    transform, tail = _convention(transform, tail)
    if pvalues and reports:
        raise CohortConfigError("give --pvalues or --reports, not both")
    if pvalues:
        result = fisher_combine([float(p) for p in pvalues], transform=transform, tail=tail)  # type: ignore
        LOG.info(f"T = {result.statistic:.6g}, dof = {result.dof}, p = {result.p_combined:.6g}")
        return {"combined": result.as_dict()}
    if not reports:
        raise CohortConfigError("nothing to combine: give --pvalues or --reports")

    groups: T.Dict[str, T.Tuple[T.List[float], T.List[float]]] = {}
    for path in reports:
        for entry in read_report(path).get("nulls", []):
            raw, smoothed = groups.setdefault(entry["model"], ([], []))
            raw.append(entry["p_raw"]["p"])
            smoothed.append(entry["p_smoothed"]["p"])
    if not groups:
        raise CohortInputError("The reports hold no null results to combine")

    combined = {}
    for model, (raw, smoothed) in sorted(groups.items()):
        values, replaced = combinable_pvalues(raw, smoothed)
        result = fisher_combine(values, transform=transform, tail=tail, upper_bound=replaced)  # type: ignore
        LOG.info(f"{model}: combined p = {result.p_combined:.6g} over {len(values)} values")
        combined[model] = result.as_dict()
    if len(combined) == 1:
        return {"combined": next(iter(combined.values()))}
    return {"combined": combined}


def _ini_value(value: T.Any) -> str:
    if isinstance(value, (list, tuple)):
        return ", ".join(str(v) for v in value)
    return str(value)


def run_synth(
    output: str,
    n_a: int = 200,
    n_b: int = 200,
    base_rate: float = 20.0,
    activity_ratio: float = 1.18,
    dispersion: float = 0.0,
    diurnal_shape: T.Optional[T.Sequence[float]] = None,
    amplitude_a: T.Optional[float] = None,
    amplitude_b: T.Optional[float] = None,
    decay_hours_a: float = 2.0,
    decay_hours_b: float = 2.0,
    onset_hours: float = 0.0,
    kernel_shape: str = "exponential_decay",
    weeks: int = 8,
    anchor: T.Optional[str] = None,
    timezone: T.Optional[str] = None,
    labels: T.Sequence[str] = ("A", "B"),
    city: str = "Berlin",
    box: T.Optional[T.Sequence[float]] = None,
    outside_fraction: float = 0.0,
    file_format: str = "csv",
    seed: int = 0,
    threads: int = 1,
    config: T.Optional[str] = None,
    disable_progress: bool = False,
) -> Sections:
    """
    Generate a synthetic two-cohort population and write it as ingestible event, cohort map
    and GPS files under output.
    """
    if not output:
        raise CohortConfigError("synth needs --output for the event files")
    parser = _parser_of(config)
    start = DEFAULT_ANCHOR
    if anchor:
        start = parse_anchor(anchor, timezone or None, load_anchors(parser))
    response = None
    if amplitude_a is not None or amplitude_b is not None:
        response = ResponseKernel(
            onset=onset_hours * HOUR,
            amplitude=(
                1.0 if amplitude_a is None else float(amplitude_a),
                1.0 if amplitude_b is None else float(amplitude_b),
            ),
            decay=(decay_hours_a * HOUR, decay_hours_b * HOUR),
            shape=kernel_shape,  # type: ignore
        )
    kwargs = {}
    if diurnal_shape:
        kwargs["diurnal_shape"] = tuple(float(w) for w in diurnal_shape)
    spec = SyntheticSpec(
        n_a=int(n_a),
        n_b=int(n_b),
        base_rate=base_rate,
        activity_ratio=activity_ratio,
        dispersion=dispersion,
        response=response,
        seed=seed,
        labels=tuple(labels),  # type: ignore
        anchor=start,
        **kwargs,
    )
    bbox = resolve_box(city, box, parser)

    dataset = generate(spec, weeks, threads=threads, disable_progress=disable_progress)
    gps = synthetic_gps(spec, bbox, outside_fraction) if bbox is not None else None
    export_dataset(dataset, output, gps, file_format)

    label_a, label_b = spec.labels
    background = range(1, dataset.n_windows)
    measured = cohort_activity_ratio(
        [log for k in background for log in dataset.window_logs(k, label_a)],
        [log for k in background for log in dataset.window_logs(k, label_b)],
    )
    LOG.info(f"Generated {sum(dataset.events_per_window())} events, activity ratio {measured:.4f}")
    sections = _attack_sections(dataset)
    sections["activity_ratio"] = measured
    return sections


def save_synth_config(resolved: T.Mapping[str, T.Any], path: str) -> None:
    """Store the parameters of a synth run as a [synth] section that --config can replay."""
    parser = configparser.ConfigParser()
    parser.optionxform = str  # type: ignore
    parser.add_section("synth")
    for key, value in sorted(resolved.items()):
        if value is None or key in VOLATILE_KEYS:
            continue
        parser.set("synth", key, _ini_value(value))
    save_config(parser, path)


def _window_logs(
    records: T.Sequence[EventRecord],
    window: AnalysisWindow,
    dataset: StudyDataset,
    label: str,
    kind: T.Optional[str],
):
    logs = ingest_events(records, window, dataset.cohorts, kind=kind).logs
    return [log for log in logs if log.cohort == label]


def run_profile(
    archive: str,
    bin_hours: float = 1.0,
    mode: str = "per_bin",
    days: int = 0,
    events_path: T.Optional[str] = None,
    timezone: T.Optional[str] = None,
    kind: T.Optional[str] = None,
) -> Sections:
    """
    Diurnal profiles of the attack window, and of the following days when raw events are given,
    normalized by the mean profile of the same days in the background weeks.
    """
    if bin_hours <= 0:
        raise CohortConfigError(f"bin_hours must be positive, got {bin_hours}")
    if days < 0:
        raise CohortConfigError(f"days must be non-negative, got {days}")
    if days and not events_path:
        raise CohortConfigError("--days needs --events_path to slice the following days")
    dataset, _ = read_archive(archive)
    records: T.List[EventRecord] = []
    if events_path:
        records, _ = read_events(events_path, timezone or None)

    bin_width = bin_hours * HOUR
    attack = dataset.attack_window
    profiles: T.Dict[str, T.Any] = {}
    for label in dataset.labels:
        entries = []
        for day in range(days + 1):
            if day == 0:
                day_logs = dataset.window_logs(0, label)
                background_logs = [dataset.window_logs(k, label) for k in range(1, dataset.n_windows)]
            else:
                window = AnalysisWindow(local_shift(attack.start, dataset.zone, days=day), attack.duration)
                day_logs = _window_logs(records, window, dataset, label, kind)
                background_logs = [
                    _window_logs(records, window.shifted(k, dataset.zone), dataset, label, kind)
                    for k in range(1, dataset.n_windows)
                ]
            day_profile = diurnal_profile(day_logs, bin_width, dataset.t_max)
            background = [diurnal_profile(logs, bin_width, dataset.t_max) for logs in background_logs]
            normalized = normalize_to_background(day_profile, background, mode)  # type: ignore
            entries.append(
                {
                    "offset_days": day,
                    "counts": day_profile.as_dict()["counts"],
                    "background_mean": mean_profile(background).as_dict()["counts"],
                    "normalized": normalized.as_list(),
                }
            )
        members = max(1, len(dataset.members(label)))
        profiles[label] = {
            "bin_hours": bin_hours,
            "mode": mode,
            "individuals": len(dataset.members(label)),
            "mean_events_per_window": sum(
                log.n_events for log in dataset.background_pool(label)
            ) / (members * dataset.weeks),
            "days": entries,
        }

    label_a, label_b = dataset.labels
    sections: Sections = {"profiles": profiles}
    try:
        sections["activity_ratio"] = cohort_activity_ratio(
            dataset.background_pool(label_a), dataset.background_pool(label_b)
        )
    except CohortDegenerateError as ex:
        LOG.warning(f"Activity ratio not reported: {ex}")
    return sections
