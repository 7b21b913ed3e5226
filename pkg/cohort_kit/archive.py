import json
import logging
import os
import typing as T
import zipfile

import jsonschema

from .error import CohortInputError
from .event_model import AnalysisWindow, IndividualLog, StudyDataset
from .types_fmt import (
    DatasetArchiveSchema,
    DatasetJSON,
    IngestSummary,
    IngestSummarySchema,
    WindowJSON,
)

LOG = logging.getLogger(__name__)

FORMAT_VERSION = 1
DATASET_MEMBER = "dataset.json"
SUMMARY_MEMBER = "summary.json"
# fixed member timestamps keep archives byte-identical across runs
ZIP_DATE_TIME = (1980, 1, 1, 0, 0, 0)


def _window_json(window: AnalysisWindow) -> WindowJSON:
    return {"start": window.start, "duration": window.duration}


def dataset_to_json(dataset: StudyDataset) -> DatasetJSON:
    logs = {
        individual_id: [
            [float(o) for o in dataset.logs[(individual_id, index)].offsets]
            for index in range(dataset.n_windows)
        ]
        for individual_id in dataset.members()
    }
    data: DatasetJSON = {
        "format_version": FORMAT_VERSION,
        "labels": list(dataset.labels),
        "attack_window": _window_json(dataset.attack_window),
        "background_windows": [_window_json(w) for w in dataset.background_windows],
        "cohorts": dict(sorted(dataset.cohorts.items())),
        "logs": logs,
    }
    if dataset.zone:
        data["zone"] = dataset.zone
    return data


def dataset_from_json(data: DatasetJSON) -> StudyDataset:
    jsonschema.validate(instance=data, schema=DatasetArchiveSchema)
    attack = AnalysisWindow(**data["attack_window"])
    background = tuple(AnalysisWindow(**w) for w in data["background_windows"])
    cohorts = data["cohorts"]
    n_windows = 1 + len(background)
    logs: T.Dict[T.Tuple[str, int], IndividualLog] = {}
    for individual_id, per_window in data["logs"].items():
        if individual_id not in cohorts:
            raise CohortInputError(f"{individual_id} has logs but no cohort")
        if len(per_window) != n_windows:
            raise CohortInputError(
                f"{individual_id} has {len(per_window)} windows, expect {n_windows}"
            )
        for index, offsets in enumerate(per_window):
            logs[(individual_id, index)] = IndividualLog(
                individual_id, cohorts[individual_id], offsets, attack.duration
            )
    labels = data["labels"]
    return StudyDataset(
        attack_window=attack,
        background_windows=background,
        logs=logs,
        cohorts=dict(cohorts),
        labels=(labels[0], labels[1]),
        zone=data.get("zone"),
    )


def _writestr(ziph: zipfile.ZipFile, name: str, document: T.Any) -> None:
    info = zipfile.ZipInfo(name, date_time=ZIP_DATE_TIME)
    info.compress_type = zipfile.ZIP_DEFLATED
    info.external_attr = 0o644 << 16
    ziph.writestr(info, json.dumps(document, sort_keys=True, indent=2) + "\n")


def write_archive(path: str, dataset: StudyDataset, summary: IngestSummary) -> None:
    """
    Write the sliced study and its ingestion summary as a zip archive.

    The archive is first written next to its destination and renamed when complete.
    """
    document = dataset_to_json(dataset)
    jsonschema.validate(instance=document, schema=DatasetArchiveSchema)
    jsonschema.validate(instance=summary, schema=IngestSummarySchema)
    dirname = os.path.dirname(os.path.abspath(path))
    os.makedirs(dirname, exist_ok=True)
    wip = f"{path}.{os.getpid()}.wip"
    with open(wip, "wb") as fp:
        with zipfile.ZipFile(fp, "w", zipfile.ZIP_DEFLATED) as ziph:
            _writestr(ziph, DATASET_MEMBER, document)
            _writestr(ziph, SUMMARY_MEMBER, summary)
    os.replace(wip, path)
    LOG.info(f"Wrote dataset archive {path}")


def read_archive(path: str) -> T.Tuple[StudyDataset, IngestSummary]:
    if not os.path.isfile(path):
        raise CohortInputError(f"Dataset archive {path} does not exist")
    try:
        with zipfile.ZipFile(path) as ziph:
            namelist = ziph.namelist()
            for member in (DATASET_MEMBER, SUMMARY_MEMBER):
                if member not in namelist:
                    raise CohortInputError(f"{path} has no {member}")
            data = json.loads(ziph.read(DATASET_MEMBER).decode("utf-8"))
            summary = json.loads(ziph.read(SUMMARY_MEMBER).decode("utf-8"))
    except (zipfile.BadZipFile, json.JSONDecodeError, UnicodeDecodeError) as ex:
        raise CohortInputError(f"Invalid dataset archive {path}: {ex}")

    try:
        jsonschema.validate(instance=summary, schema=IngestSummarySchema)
        dataset = dataset_from_json(data)
    except jsonschema.exceptions.ValidationError as ex:
        raise CohortInputError(f"Invalid dataset archive {path}: {ex.message}")
    except ValueError as ex:
        raise CohortInputError(f"Invalid dataset archive {path}: {ex}")
    LOG.info(
        f"Read {len(dataset.cohorts)} individuals over {dataset.n_windows} windows from {path}"
    )
    return dataset, summary
