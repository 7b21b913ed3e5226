import pytest

from cohort_kit.error import CohortInputError, CohortRecordError
from cohort_kit.event_log import read_cohort_map, read_events, write_cohort_map, write_events
from cohort_kit.gps_parser import read_gps, write_gps
from cohort_kit.types_fmt import EventRecord, GpsRecord

GPX = """<?xml version="1.0" encoding="UTF-8"?>
<gpx version="1.1" creator="tests" xmlns="http://www.topografix.com/GPX/1/1">
  <trk>
    <name>u7</name>
    <trkseg>
      <trkpt lat="52.52" lon="13.40"><time>2017-04-01T10:00:00Z</time></trkpt>
      <trkpt lat="52.53" lon="13.41"><time>2017-04-01T09:00:00Z</time></trkpt>
    </trkseg>
  </trk>
</gpx>
"""


def test_read_events_csv(tmpdir):
    path = tmpdir.join("events.csv")
    path.write(
        "id,timestamp,kind\n"
        "u1,1491576780,call\n"
        "u2,2017-04-07T16:53:00,\n"
        "\n"
    )
    records, malformed = read_events(str(path))
    assert records == [
        EventRecord("u1", 1491576780.0, "call"),
        EventRecord("u2", 1491583980.0, "communication"),
    ]
    assert malformed == []


def test_naive_times_follow_the_declared_zone(tmpdir):
    path = tmpdir.join("events.jsonl")
    path.write('{"id": "u1", "timestamp": "2017-04-07T16:53:00"}\n')
    records, _ = read_events(str(path), "Europe/Stockholm")
    assert records[0].timestamp == 1491576780.0


def test_malformed_records_fail_or_are_collected(tmpdir):
    path = tmpdir.join("events.csv")
    path.write("id,timestamp,kind\nu1,1491576780,call\n,1491576781,call\nu3,yesterday,sms\n")
    with pytest.raises(CohortRecordError) as excinfo:
        read_events(str(path))
    assert excinfo.value.line == 3

    records, malformed = read_events(str(path), skip_malformed=True)
    assert len(records) == 1
    assert len(malformed) == 2
    assert malformed[0].endswith(":3: missing id")


def test_undecodable_bytes_name_the_line(tmpdir):
    path = tmpdir.join("events.csv")
    path.write_binary(b"\xef\xbb\xbfid,timestamp\nu1,1491576780\nu2,\xff1491576781\n")
    with pytest.raises(CohortRecordError) as excinfo:
        read_events(str(path))
    assert excinfo.value.path == str(path)
    assert excinfo.value.line == 3
    assert "0xff" in str(excinfo.value)

    path.write_binary(b"\xef\xbb\xbfid,timestamp\nu1,1491576780\n")
    records, _ = read_events(str(path))
    assert records == [EventRecord("u1", 1491576780.0, "communication")]


def test_bad_jsonl_line(tmpdir):
    path = tmpdir.join("events.jsonl")
    path.write('{"id": "u1", "timestamp": 1}\n[1, 2]\n')
    with pytest.raises(CohortRecordError, match=":2:"):
        read_events(str(path))


def test_unknown_format_and_missing_file(tmpdir):
    with pytest.raises(CohortInputError):
        read_events(str(tmpdir.join("events.xlsx")))
    with pytest.raises(CohortInputError):
        read_events(str(tmpdir.join("missing.csv")))


def test_cohort_map(tmpdir):
    path = str(tmpdir.join("cohorts.jsonl"))
    assert write_cohort_map(path, {"u2": "B", "u1": "A"}) == 2
    assert read_cohort_map(path) == {"u1": "A", "u2": "B"}

    conflicting = tmpdir.join("conflict.csv")
    conflicting.write("id,label\nu1,A\nu1,B\n")
    with pytest.raises(CohortRecordError, match="labelled both"):
        read_cohort_map(str(conflicting))


def test_written_events_read_back(tmpdir):
    path = str(tmpdir.join("events.csv"))
    records = [EventRecord("u1", 1491576780.25, "sms"), EventRecord("u2", 1491576700.0, "call")]
    assert write_events(path, records) == 2
    again, _ = read_events(path)
    assert again == sorted(records, key=lambda r: r.timestamp)


def test_gps_table_and_gpx(tmpdir):
    path = str(tmpdir.join("gps.csv"))
    write_gps(path, [GpsRecord("u1", 10.0, 52.52, 13.4)])
    assert read_gps(path) == [GpsRecord("u1", 10.0, 52.52, 13.4)]

    gpx = tmpdir.join("tracks.gpx")
    gpx.write(GPX)
    records = read_gps(str(gpx))
    assert [r.individual_id for r in records] == ["u7", "u7"]
    assert records[0].lat == 52.53
    assert records[0].timestamp < records[1].timestamp

    bad = tmpdir.join("bad.csv")
    bad.write("id,timestamp,lat,lon\nu1,10,95.0,13.4\n")
    with pytest.raises(CohortRecordError):
        read_gps(str(bad))
