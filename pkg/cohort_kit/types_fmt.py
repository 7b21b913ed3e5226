import datetime
import math
import sys
import typing as T

from dateutil import parser as date_parser
from dateutil import tz as date_tz
from dateutil.relativedelta import relativedelta

if sys.version_info >= (3, 8):
    from typing import TypedDict, Literal  # pylint: disable=no-name-in-module
else:
    from typing_extensions import TypedDict, Literal


HOUR = 3600.0
DAY = 24 * HOUR
WEEK = 7 * DAY

NullModel = Literal["shuffle", "background", "spike_bootstrap"]
Transform = Literal["direct", "one_minus"]
Tail = Literal["upper", "lower"]
ProfileMode = Literal["per_bin", "global"]
KernelShape = Literal["exponential_decay", "boxcar"]


class EventRecord(T.NamedTuple):
    individual_id: str
    # absolute UTC seconds
    timestamp: float
    kind: str = "communication"


class GpsRecord(T.NamedTuple):
    individual_id: str
    timestamp: float
    lat: float
    lon: float


class WindowJSON(TypedDict, total=True):
    start: float
    duration: float


class _DatasetJSONRequired(TypedDict, total=True):
    format_version: int
    labels: T.List[str]
    attack_window: WindowJSON
    background_windows: T.List[WindowJSON]
    cohorts: T.Dict[str, str]
    # individual id -> offsets per window, attack window first
    logs: T.Dict[str, T.List[T.List[float]]]


class DatasetJSON(_DatasetJSONRequired, total=False):
    zone: str


class _IngestSummaryRequired(TypedDict, total=True):
    individuals_kept: int
    cohort_sizes: T.Dict[str, int]
    per_window_events: T.List[int]


class IngestSummary(_IngestSummaryRequired, total=False):
    dropped_outside_box: T.List[str]
    dropped_without_gps: T.List[str]
    skipped_ids: T.List[str]
    malformed_records: T.List[str]
    attack_start: str
    background_starts: T.List[str]


class EmpiricalPJSON(TypedDict, total=True):
    p: float
    count_ge: int
    replicates: int
    smoothed: bool


class _NullSummaryRequired(TypedDict, total=True):
    model: str
    seed: int
    replicates: int
    observed: float
    redraws: int
    p_raw: EmpiricalPJSON
    p_smoothed: EmpiricalPJSON


class NullSummaryJSON(_NullSummaryRequired, total=False):
    quantiles: T.Dict[str, float]
    samples: T.List[float]
    significant: bool
    cohort: str
    week: int


class CombinedJSON(TypedDict, total=True):
    inputs: T.List[float]
    transform: str
    tail: str
    T: float
    dof: int
    p_combined: float
    upper_bound: bool


class _ReportRequired(TypedDict, total=True):
    command: str
    version: str
    config: T.Dict[str, T.Any]
    config_hash: str


class AnalysisReport(_ReportRequired, total=False):
    curves: T.Dict[str, T.List[T.List[float]]]
    events: T.Dict[str, int]
    nulls: T.List[NullSummaryJSON]
    combined: T.Union[CombinedJSON, T.Dict[str, CombinedJSON]]
    skipped_weeks: T.Dict[str, T.List[int]]
    profiles: T.Dict[str, T.Any]
    activity_ratio: float


WindowSchema = {
    "type": "object",
    "properties": {
        "start": {"type": "number", "description": "Window start in UTC seconds"},
        "duration": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["start", "duration"],
    "additionalProperties": False,
}

DatasetArchiveSchema = {
    "type": "object",
    "properties": {
        "format_version": {"type": "integer", "enum": [1]},
        "labels": {
            "type": "array",
            "items": {"type": "string"},
            "minItems": 2,
            "maxItems": 2,
        },
        "attack_window": WindowSchema,
        "background_windows": {"type": "array", "items": WindowSchema, "minItems": 1},
        "cohorts": {"type": "object", "additionalProperties": {"type": "string"}},
        "logs": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number", "minimum": 0}},
            },
        },
        "zone": {
            "type": "string",
            "description": "Time zone whose calendar weeks separate the windows",
        },
    },
    "required": [
        "format_version",
        "labels",
        "attack_window",
        "background_windows",
        "cohorts",
        "logs",
    ],
    "additionalProperties": False,
}

IngestSummarySchema = {
    "type": "object",
    "properties": {
        "individuals_kept": {"type": "integer", "minimum": 0},
        "cohort_sizes": {"type": "object", "additionalProperties": {"type": "integer"}},
        "per_window_events": {"type": "array", "items": {"type": "integer"}},
        "dropped_outside_box": {"type": "array", "items": {"type": "string"}},
        "dropped_without_gps": {"type": "array", "items": {"type": "string"}},
        "skipped_ids": {"type": "array", "items": {"type": "string"}},
        "malformed_records": {"type": "array", "items": {"type": "string"}},
        "attack_start": {"type": "string"},
        "background_starts": {"type": "array", "items": {"type": "string"}},
    },
    "required": ["individuals_kept", "cohort_sizes", "per_window_events"],
    "additionalProperties": False,
}

EmpiricalPSchema = {
    "type": "object",
    "properties": {
        "p": {"type": "number", "minimum": 0, "maximum": 1},
        "count_ge": {"type": "integer", "minimum": 0},
        "replicates": {"type": "integer", "minimum": 1},
        "smoothed": {"type": "boolean"},
    },
    "required": ["p", "count_ge", "replicates", "smoothed"],
    "additionalProperties": False,
}

NullSummarySchema = {
    "type": "object",
    "properties": {
        "model": {"type": "string", "enum": ["shuffle", "background", "spike_bootstrap"]},
        "seed": {"type": "integer", "minimum": 0},
        "replicates": {"type": "integer", "minimum": 1},
        "observed": {"type": "number", "minimum": 0},
        "redraws": {"type": "integer", "minimum": 0},
        "p_raw": EmpiricalPSchema,
        "p_smoothed": EmpiricalPSchema,
        "quantiles": {"type": "object", "additionalProperties": {"type": "number"}},
        "samples": {"type": "array", "items": {"type": "number", "minimum": 0}},
        "significant": {"type": "boolean"},
        "cohort": {"type": "string"},
        "week": {"type": "integer", "minimum": 1},
    },
    "required": [
        "model",
        "seed",
        "replicates",
        "observed",
        "redraws",
        "p_raw",
        "p_smoothed",
    ],
    "additionalProperties": False,
}

CombinedSchema = {
    "type": "object",
    "properties": {
        "inputs": {
            "type": "array",
            "items": {"type": "number", "minimum": 0, "maximum": 1},
            "minItems": 1,
        },
        "transform": {"type": "string", "enum": ["direct", "one_minus"]},
        "tail": {"type": "string", "enum": ["upper", "lower"]},
        "T": {"type": "number", "minimum": 0},
        "dof": {"type": "integer", "minimum": 2},
        "p_combined": {"type": "number", "minimum": 0, "maximum": 1},
        "upper_bound": {"type": "boolean"},
    },
    "required": ["inputs", "transform", "tail", "T", "dof", "p_combined", "upper_bound"],
    "additionalProperties": False,
}

AnalysisReportSchema = {
    "type": "object",
    "properties": {
        "command": {
            "type": "string",
            "enum": ["test", "spike", "combine", "profile", "synth"],
        },
        "version": {"type": "string"},
        "config": {"type": "object"},
        "config_hash": {"type": "string", "pattern": "^[0-9a-f]{64}$"},
        "curves": {
            "type": "object",
            "additionalProperties": {
                "type": "array",
                "items": {"type": "array", "items": {"type": "number"}},
            },
        },
        "events": {"type": "object", "additionalProperties": {"type": "integer"}},
        "nulls": {"type": "array", "items": NullSummarySchema},
        "combined": {
            "oneOf": [
                CombinedSchema,
                {"type": "object", "additionalProperties": CombinedSchema},
            ]
        },
        "skipped_weeks": {
            "type": "object",
            "additionalProperties": {"type": "array", "items": {"type": "integer"}},
        },
        "profiles": {"type": "object"},
        "activity_ratio": {"type": "number", "minimum": 0},
    },
    "required": ["command", "version", "config", "config_hash"],
    "additionalProperties": False,
}


def parse_timestamp(value: T.Union[str, float, int], zone: T.Optional[str] = None) -> float:
    """
    Epoch seconds or ISO-8601; naive ISO times are taken in the declared zone (UTC by default).

    >>> parse_timestamp("1970-01-01T01:00:00")
    3600.0
    >>> parse_timestamp("86400")
    86400.0
    """
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        ts = float(value)
    else:
        text = str(value).strip()
        try:
            ts = float(text)
        except ValueError:
            dt = date_parser.isoparse(text)
            if dt.tzinfo is None:
                dt = dt.replace(tzinfo=resolve_zone(zone))
            ts = dt.timestamp()
    if not math.isfinite(ts):
        raise ValueError(f"timestamp {value!r} is not finite")
    return ts


def resolve_zone(zone: T.Optional[str]) -> datetime.tzinfo:
    if not zone:
        return date_tz.UTC
    tzinfo = date_tz.gettz(zone)
    if tzinfo is None:
        raise ValueError(f"Unknown time zone {zone}")
    return tzinfo


def format_timestamp(ts: float, zone: T.Optional[str] = None) -> str:
    return datetime.datetime.fromtimestamp(ts, tz=resolve_zone(zone)).isoformat()


def week_monday(ts: float, zone: T.Optional[str] = None) -> datetime.date:
    day = datetime.datetime.fromtimestamp(ts, tz=resolve_zone(zone)).date()
    return day - datetime.timedelta(days=day.weekday())


def local_shift(ts: float, zone: T.Optional[str] = None, **delta: int) -> float:
    """
    Move ts by whole weeks or days of the zone's wall clock; without a zone, by absolute seconds.

    >>> local_shift(1491576780.0, weeks=-1)
    1490971980.0
    >>> # two weeks before 16:53 CEST is 16:53 CET, one hour less than 14 x 24 hours
    >>> local_shift(1491576780.0, "Europe/Stockholm", weeks=-2) - 1491576780.0
    -1206000.0
    """
    if not zone:
        return ts + datetime.timedelta(**delta).total_seconds()
    tzinfo = resolve_zone(zone)
    local = datetime.datetime.fromtimestamp(ts, tz=tzinfo)
    moved = local.replace(tzinfo=None) + relativedelta(**delta)
    return date_tz.resolve_imaginary(moved.replace(tzinfo=tzinfo, fold=local.fold)).timestamp()


if __name__ == "__main__":
    import json

    print(json.dumps(AnalysisReportSchema, indent=4))
