import json
import os

import jsonschema
import pytest

from cohort_kit.error import CohortInputError
from cohort_kit.report import build_report, curve_points, dumps_report, null_entry, read_report, write_report
from cohort_kit.resampling import NullDistribution
from cohort_kit.types_fmt import AnalysisReportSchema, DatasetArchiveSchema, DAY

SCHEMA_DIR = os.path.join(os.path.dirname(__file__), "..", "schema")


@pytest.mark.parametrize(
    "filename, schema",
    [
        ("analysis_report_schema.json", AnalysisReportSchema),
        ("dataset_archive_schema.json", DatasetArchiveSchema),
    ],
)
def test_published_schemas_are_current(filename, schema):
    with open(os.path.join(SCHEMA_DIR, filename)) as fp:
        assert json.load(fp) == schema


def test_curve_points(make_log):
    assert curve_points([make_log("u1", "A", [6, 12])], DAY) == [
        [0.0, 0.0],
        [6.0, 0.5],
        [12.0, 1.0],
        [24.0, 1.0],
    ]
    assert curve_points([make_log("u1", "A", [])], DAY) == []


def test_report_round_trip(tmpdir):
    null = NullDistribution([0.5, 1.0, 2.0, 3.0], 2.5, 4, "shuffle", 24.0, meta={"cohort": "A"})
    entry = null_entry(null, alpha=0.3)
    assert entry["p_raw"]["p"] == 0.25
    assert entry["significant"]

    report = build_report("test", {"seed": 4, "threads": 2}, nulls=[entry], curves=None)
    assert "curves" not in report
    assert report["config"] == {"seed": 4}

    path = str(tmpdir.join("out", "report.json"))
    write_report(report, path)
    assert read_report(path) == report


def test_report_to_stdout(capsys):
    report = build_report("combine", {}, events={"A": 3})
    write_report(report, "-")
    assert json.loads(capsys.readouterr().out) == report


def test_invalid_reports(tmpdir):
    with pytest.raises(jsonschema.exceptions.ValidationError):
        dumps_report(build_report("dance", {}))

    path = tmpdir.join("report.json")
    path.write(json.dumps({"command": "test"}))
    with pytest.raises(CohortInputError):
        read_report(str(path))
    path.write("{not json")
    with pytest.raises(CohortInputError):
        read_report(str(path))
