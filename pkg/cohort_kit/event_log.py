import csv
import json
import logging
import math
import os
import typing as T

from .error import CohortInputError, CohortRecordError
from .types_fmt import EventRecord, parse_timestamp

LOG = logging.getLogger(__name__)

EVENT_FIELDS = ("id", "timestamp", "kind")
COHORT_FIELDS = ("id", "label")


def file_format(path: str) -> str:
    _, ext = os.path.splitext(path)
    ext = ext.lower()
    if ext == ".csv":
        return "csv"
    if ext in (".jsonl", ".ndjson", ".json"):
        return "jsonl"
    if ext == ".gpx":
        return "gpx"
    raise CohortInputError(f"Unsupported file format {ext or path}")


def _decoded_lines(path: str, fp: T.BinaryIO) -> T.Generator[str, None, None]:
    for line_num, raw in enumerate(fp, start=1):
        try:
            yield raw.decode("utf-8-sig" if line_num == 1 else "utf-8")
        except UnicodeDecodeError as ex:
            raise CohortRecordError(path, line_num, f"not UTF-8 text (byte {raw[ex.start]:#04x})")


def iter_rows(path: str) -> T.Generator[T.Tuple[int, T.Dict[str, T.Any]], None, None]:
    """
    Yield (line number, row) pairs from a CSV file with a header or a JSON-lines file.
    """
    if not os.path.isfile(path):
        raise CohortInputError(f"File {path} does not exist")
    fmt = file_format(path)
    with open(path, "rb") as fp:
        lines = _decoded_lines(path, fp)
        if fmt == "csv":
            reader = csv.DictReader(lines, skipinitialspace=True)
            for row in reader:
                if not any(v for v in row.values() if v):
                    continue
                yield reader.line_num, row
        elif fmt == "jsonl":
            for line_num, line in enumerate(lines, start=1):
                if not line.strip():
                    continue
                try:
                    row = json.loads(line)
                except json.JSONDecodeError as ex:
                    raise CohortRecordError(path, line_num, f"invalid JSON ({ex.msg})")
                if not isinstance(row, dict):
                    raise CohortRecordError(path, line_num, "expect a JSON object")
                yield line_num, row
        else:
            raise CohortInputError(f"{path} is not a tabular file")


def _event_from_row(row: T.Mapping[str, T.Any], zone: T.Optional[str]) -> EventRecord:
    individual_id = str(row.get("id") or "").strip()
    if not individual_id:
        raise ValueError("missing id")
    if row.get("timestamp") in (None, ""):
        raise ValueError("missing timestamp")
    timestamp = parse_timestamp(row["timestamp"], zone)
    kind = str(row.get("kind") or "communication").strip()
    return EventRecord(individual_id, timestamp, kind)


def read_events(
    path: str,
    zone: T.Optional[str] = None,
    skip_malformed: bool = False,
) -> T.Tuple[T.List[EventRecord], T.List[str]]:
    """
    Read event records, failing on the first malformed row unless skip_malformed is set.

    Args:
        path: CSV or JSON-lines file with id, timestamp, kind
        zone: declared zone for naive ISO timestamps
        skip_malformed: collect malformed rows instead of failing

    Returns:
        the records and the "path:line: reason" strings of skipped rows
    """
    records: T.List[EventRecord] = []
    malformed: T.List[str] = []
    for line_num, row in iter_rows(path):
        try:
            records.append(_event_from_row(row, zone))
        except (ValueError, OverflowError) as ex:
            error = CohortRecordError(path, line_num, str(ex))
            if not skip_malformed:
                raise error
            malformed.append(str(error))
    if malformed:
        LOG.warning(f"Skipped {len(malformed)} malformed records in {path}")
    LOG.info(f"Read {len(records)} events from {path}")
    return records, malformed


def read_cohort_map(path: str) -> T.Dict[str, str]:
    cohorts: T.Dict[str, str] = {}
    for line_num, row in iter_rows(path):
        individual_id = str(row.get("id") or "").strip()
        label = str(row.get("label") or "").strip()
        if not individual_id or not label:
            raise CohortRecordError(path, line_num, "expect id and label")
        previous = cohorts.setdefault(individual_id, label)
        if previous != label:
            raise CohortRecordError(
                path, line_num, f"{individual_id} labelled both {previous} and {label}"
            )
    return cohorts


def _format_number(value: float) -> str:
    if math.isfinite(value) and value == int(value):
        return str(int(value))
    return repr(value)


def write_rows(path: str, fields: T.Sequence[str], rows: T.Iterable[T.Sequence[T.Any]]) -> int:
    fmt = file_format(path)
    count = 0
    with open(path, "w", newline="") as fp:
        if fmt == "csv":
            writer = csv.writer(fp, lineterminator="\n")
            writer.writerow(fields)
            for row in rows:
                writer.writerow(
                    [_format_number(v) if isinstance(v, float) else v for v in row]
                )
                count += 1
        else:
            for row in rows:
                fp.write(json.dumps(dict(zip(fields, row)), sort_keys=True) + "\n")
                count += 1
    return count


def write_events(path: str, records: T.Iterable[EventRecord]) -> int:
    return write_rows(
        path,
        EVENT_FIELDS,
        (
            (r.individual_id, round(r.timestamp, 3), r.kind)
            for r in sorted(records, key=lambda r: (r.timestamp, r.individual_id))
        ),
    )


def write_cohort_map(path: str, cohorts: T.Mapping[str, str]) -> int:
    return write_rows(path, COHORT_FIELDS, sorted(cohorts.items()))
