import json
import logging
import os
import sys
import typing as T

import jsonschema

from .config import provenance
from .curves import population_curve
from .error import CohortDegenerateError, CohortInputError
from .event_model import IndividualLog
from .resampling import NullDistribution
from .types_fmt import AnalysisReport, AnalysisReportSchema, NullSummaryJSON

LOG = logging.getLogger(__name__)


def curve_points(logs: T.Sequence[IndividualLog], t_max: float) -> T.List[T.List[float]]:
    # an empty population is reported as an empty curve
    try:
        return population_curve(logs, t_max).as_points()
    except CohortDegenerateError:
        return []


def null_entry(
    null: NullDistribution, alpha: float = 0.01, full_samples: bool = False
) -> NullSummaryJSON:
    entry = null.as_dict(full_samples=full_samples)
    entry["significant"] = entry["p_raw"]["p"] < alpha
    return entry


def build_report(command: str, resolved: T.Mapping[str, T.Any], **sections: T.Any) -> AnalysisReport:
    report = T.cast(AnalysisReport, provenance(command, resolved))
    for key, value in sections.items():
        if value is not None:
            report[key] = value  # type: ignore
    return report


def dumps_report(report: AnalysisReport) -> str:
    jsonschema.validate(instance=report, schema=AnalysisReportSchema)
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def write_report(report: AnalysisReport, output: T.Optional[str] = None) -> None:
    """Validate the report and write it to output, or to stdout when output is None or "-"."""
    text = dumps_report(report)
    if output is None or output == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    dirname = os.path.dirname(os.path.abspath(output))
    os.makedirs(dirname, exist_ok=True)
    with open(output, "w") as fp:
        fp.write(text)
    LOG.info(f"Wrote {report['command']} report to {output}")


def read_report(path: str) -> AnalysisReport:
    if not os.path.isfile(path):
        raise CohortInputError(f"Report {path} does not exist")
    try:
        with open(path) as fp:
            report = json.load(fp)
        jsonschema.validate(instance=report, schema=AnalysisReportSchema)
    except json.JSONDecodeError as ex:
        raise CohortInputError(f"Invalid report {path}: {ex}")
    except jsonschema.exceptions.ValidationError as ex:
        raise CohortInputError(f"Invalid report {path}: {ex.message}")
    return report
