import json
import os

import pytest

from cohort_kit.__main__ import main
from cohort_kit.synthgen import DEFAULT_ANCHOR

SPIKE_WEEKS = ["0.99988", "0.8216", "0.89666", "0.9994", "0.99502"]


def _exit_code(argv):
    with pytest.raises(SystemExit) as excinfo:
        main(argv)
    return excinfo.value.code


def _stdout_report(capsys, argv):
    capsys.readouterr()
    main(argv)
    return json.loads(capsys.readouterr().out)


@pytest.fixture(scope="module")
def pipeline(tmpdir_factory):
    root = tmpdir_factory.mktemp("pipeline")
    synth_dir = str(root.join("synth"))
    main(
        [
            "--quiet", "synth", "--output", synth_dir, "--n_a", "40", "--n_b", "40",
            "--weeks", "2", "--amplitude_a", "3", "--seed", "5", "--outside_fraction", "0.25",
        ]
    )
    archive = str(root.join("study.zip"))
    main(
        [
            "--quiet", "ingest", os.path.join(synth_dir, "events.csv"),
            "--cohorts_path", os.path.join(synth_dir, "cohorts.csv"),
            "--gps_path", os.path.join(synth_dir, "gps.csv"),
            "--anchor", str(int(DEFAULT_ANCHOR)), "--city", "Berlin",
            "--weeks", "2", "--output", archive,
        ]
    )
    return root, synth_dir, archive


def test_synth_writes_replayable_files(pipeline):
    _, synth_dir, _ = pipeline
    assert sorted(os.listdir(synth_dir)) == [
        "cohorts.csv", "events.csv", "gps.csv", "synth.ini", "synth_report.json",
    ]
    with open(os.path.join(synth_dir, "synth_report.json")) as fp:
        report = json.load(fp)
    assert report["command"] == "synth"
    assert report["config"]["n_a"] == 40
    assert "threads" not in report["config"]
    assert report["activity_ratio"] > 1.0
    with open(os.path.join(synth_dir, "synth.ini")) as fp:
        assert "[synth]" in fp.read()


def test_ingest_drops_individuals_outside_the_box(pipeline):
    from cohort_kit.archive import read_archive

    _, _, archive = pipeline
    dataset, summary = read_archive(archive)
    assert summary["individuals_kept"] == len(dataset.cohorts)
    assert len(summary["dropped_outside_box"]) + summary["individuals_kept"] == 80
    assert summary["dropped_outside_box"]
    assert dataset.weeks == 2


def test_reports_do_not_depend_on_threads(pipeline):
    root, _, archive = pipeline
    texts = []
    for threads in ("1", "4", "8"):
        output = str(root.join(f"test_{threads}.json"))
        main(
            [
                "--quiet", "test", archive, "--model", "both", "--replicates", "300",
                "--seed", "3", "--threads", threads, "--output", output,
            ]
        )
        with open(output) as fp:
            texts.append(fp.read())
    assert texts[0] == texts[1] == texts[2]
    report = json.loads(texts[0])
    assert [null["model"] for null in report["nulls"]] == ["shuffle", "background"]
    assert report["nulls"][0]["p_raw"]["p"] < 0.05


def test_spike_and_combine_read_earlier_reports(pipeline, capsys):
    root, _, archive = pipeline
    spike = _stdout_report(
        capsys,
        ["--quiet", "spike", archive, "--replicates", "200", "--transform", "direct", "--tail", "upper"],
    )
    assert sorted(spike["combined"]) == ["A", "B"]
    assert len(spike["nulls"]) == 4
    assert spike["combined"]["A"]["dof"] == 4

    spike_path = str(root.join("spike.json"))
    with open(spike_path, "w") as fp:
        json.dump(spike, fp)
    combined = _stdout_report(
        capsys, ["combine", "--reports", spike_path, "--transform", "direct", "--tail", "upper"]
    )
    assert combined["combined"]["dof"] == 8


def test_profile(pipeline, capsys):
    _, _, archive = pipeline
    report = _stdout_report(capsys, ["profile", archive, "--bin_hours", "6"])
    profile = report["profiles"]["A"]
    assert profile["bin_hours"] == 6.0
    assert len(profile["days"][0]["counts"]) == 4
    assert report["activity_ratio"] > 0


def test_combine_and_spike_pvalues(capsys):
    report = _stdout_report(
        capsys, ["combine", "--pvalues"] + SPIKE_WEEKS + ["--transform", "direct", "--tail", "lower"]
    )
    assert 1.7e-5 <= report["combined"]["p_combined"] <= 2.1e-5
    spike = _stdout_report(
        capsys, ["spike", "--pvalues"] + SPIKE_WEEKS + ["--transform", "direct", "--tail", "lower"]
    )
    assert spike["combined"] == report["combined"]
    assert spike["command"] == "spike"


def test_exit_codes(tmpdir, pipeline):
    _, synth_dir, _ = pipeline
    # no convention
    assert _exit_code(["combine", "--pvalues", "0.1", "0.2"]) == 3
    # p = 0
    assert _exit_code(["combine", "--pvalues", "0", "0.5", "--transform", "direct", "--tail", "upper"]) == 4
    assert _exit_code(["combine", "--transform", "sideways"]) == 2
    assert _exit_code([]) == 2
    assert _exit_code(["test", str(tmpdir.join("missing.zip"))]) == 3
    # two weeks of history only
    assert _exit_code(
        [
            "--quiet", "ingest", os.path.join(synth_dir, "events.csv"),
            "--cohorts_path", os.path.join(synth_dir, "cohorts.csv"),
            "--anchor", str(int(DEFAULT_ANCHOR)), "--weeks", "12",
            "--output", str(tmpdir.join("long.zip")),
        ]
    ) == 3


def test_config_file_fills_in_flags(tmpdir, capsys):
    ini = tmpdir.join("run.ini")
    ini.write("[combine]\ntransform = one_minus\ntail = lower\n")
    report = _stdout_report(
        capsys,
        [
            "combine", "--config", str(ini), "--pvalues",
            "0.00862", "0.06071", "0.44336", "0.45604", "0.07581", "0.15288", "0.21411",
        ],
    )
    assert report["config"]["transform"] == "one_minus"
    assert 0.0019 <= report["combined"]["p_combined"] <= 0.0029
