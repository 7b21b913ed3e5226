"""
Methods for reading location records from CSV, JSON-lines and GPX files.
"""

import datetime
import typing as T

import gpxpy

from .error import CohortInputError, CohortRecordError
from .event_log import file_format, iter_rows, write_rows
from .geo import validate_lat_lon
from .types_fmt import GpsRecord, parse_timestamp

GPS_FIELDS = ("id", "timestamp", "lat", "lon")


def _gps_from_row(row: T.Mapping[str, T.Any], zone: T.Optional[str]) -> GpsRecord:
    individual_id = str(row.get("id") or "").strip()
    if not individual_id:
        raise ValueError("missing id")
    if row.get("timestamp") in (None, ""):
        raise ValueError("missing timestamp")
    lat = float(row["lat"])
    lon = float(row["lon"])
    validate_lat_lon(lat, lon)
    return GpsRecord(individual_id, parse_timestamp(row["timestamp"], zone), lat, lon)


def get_records_from_table(path: str, zone: T.Optional[str] = None) -> T.List[GpsRecord]:
    records: T.List[GpsRecord] = []
    for line_num, row in iter_rows(path):
        try:
            records.append(_gps_from_row(row, zone))
        except (KeyError, TypeError, ValueError) as ex:
            raise CohortRecordError(path, line_num, f"invalid GPS record ({ex})")
    return records


def get_records_from_gpx(gpx_file: str) -> T.List[GpsRecord]:
    # one track per individual, the track name being the individual id
    with open(gpx_file, "r", encoding="utf-8") as f:
        try:
            gpx = gpxpy.parse(f)
        except (gpxpy.gpx.GPXException, UnicodeDecodeError) as ex:
            raise CohortInputError(f"Invalid GPX file {gpx_file}: {ex}")

    records: T.List[GpsRecord] = []
    for track in gpx.tracks:
        if not track.name:
            raise CohortInputError(f"GPX track without a name in {gpx_file}")
        for segment in track.segments:
            for point in segment.points:
                if point.time is None:
                    raise CohortInputError(
                        f"GPX point without time in track {track.name} of {gpx_file}"
                    )
                validate_lat_lon(point.latitude, point.longitude)
                time = point.time
                if time.tzinfo is None:
                    time = time.replace(tzinfo=datetime.timezone.utc)
                records.append(
                    GpsRecord(
                        individual_id=track.name.strip(),
                        timestamp=time.timestamp(),
                        lat=point.latitude,
                        lon=point.longitude,
                    )
                )

    # sort by time just in case
    records.sort(key=lambda r: (r.timestamp, r.individual_id))
    return records


def read_gps(path: str, zone: T.Optional[str] = None) -> T.List[GpsRecord]:
    if file_format(path) == "gpx":
        return get_records_from_gpx(path)
    return get_records_from_table(path, zone)


def write_gps(path: str, records: T.Iterable[GpsRecord]) -> int:
    return write_rows(
        path,
        GPS_FIELDS,
        (
            (r.individual_id, round(r.timestamp, 3), round(r.lat, 6), round(r.lon, 6))
            for r in sorted(records, key=lambda r: (r.individual_id, r.timestamp))
        ),
    )
