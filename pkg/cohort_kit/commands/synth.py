import argparse
import inspect
import os

from ..analysis import run_synth, save_synth_config
from ..config import resolve_config
from ..report import build_report, write_report

REPORT_FILENAME = "synth_report.json"
CONFIG_FILENAME = "synth.ini"


class Command:
    name = "synth"
    help = "generate a synthetic two-cohort population as ingestible files"
    defaults = {
        "n_a": 200,
        "n_b": 200,
        "base_rate": 20.0,
        "activity_ratio": 1.18,
        "dispersion": 0.0,
        "diurnal_shape": [],
        "amplitude_a": None,
        "amplitude_b": None,
        "decay_hours_a": 2.0,
        "decay_hours_b": 2.0,
        "onset_hours": 0.0,
        "kernel_shape": "exponential_decay",
        "weeks": 8,
        "anchor": None,
        "timezone": None,
        "labels": ["A", "B"],
        "city": "Berlin",
        "box": [],
        "outside_fraction": 0.0,
        "file_format": "csv",
        "seed": 0,
        "threads": 1,
    }

    def add_basic_arguments(self, parser: argparse.ArgumentParser):
        group = parser.add_argument_group("population options")
        group.add_argument("--n_a", help="Size of cohort A. Default is 200", type=int, default=None)
        group.add_argument("--n_b", help="Size of cohort B. Default is 200", type=int, default=None)
        group.add_argument(
            "--base_rate",
            help="Events per individual per day of cohort B. Default is 20",
            type=float,
            default=None,
        )
        group.add_argument(
            "--activity_ratio",
            help="Rate multiplier of cohort A. Default is 1.18",
            type=float,
            default=None,
        )
        group.add_argument(
            "--dispersion",
            help="Sigma of the log-normal individual rate multiplier; 0 disables it",
            type=float,
            default=None,
        )
        group.add_argument(
            "--diurnal_shape",
            help="24 hourly rate weights, normalized to mean 1",
            type=float,
            nargs=24,
            default=None,
        )
        group.add_argument(
            "--labels",
            help="Labels of cohort A and cohort B. Default is A B",
            nargs=2,
            default=None,
        )
        group = parser.add_argument_group("response options")
        group.add_argument(
            "--amplitude_a", help="Rate factor of cohort A on the attack day", type=float, default=None
        )
        group.add_argument(
            "--amplitude_b", help="Rate factor of cohort B on the attack day", type=float, default=None
        )
        group.add_argument("--decay_hours_a", help="Decay of the response of cohort A", type=float, default=None)
        group.add_argument("--decay_hours_b", help="Decay of the response of cohort B", type=float, default=None)
        group.add_argument(
            "--onset_hours", help="Response onset after the window start", type=float, default=None
        )
        group.add_argument(
            "--kernel_shape",
            help="Response shape. Default is exponential_decay",
            choices=["exponential_decay", "boxcar"],
            default=None,
        )
        group = parser.add_argument_group("layout options")
        group.add_argument("--weeks", help="Background weeks. Default is 8", type=int, default=None)
        group.add_argument(
            "--anchor",
            help="Start of the attack window: ISO-8601, epoch seconds or a configured attack name",
            default=None,
        )
        group.add_argument("--timezone", help="Zone of a naive ISO anchor. Default is UTC", default=None)
        group.add_argument(
            "--city", help="City box holding the synthetic homes. Default is Berlin", default=None
        )
        group.add_argument(
            "--box",
            help="Explicit box for the homes: min_lat max_lat min_lon max_lon",
            type=float,
            nargs=4,
            default=None,
        )
        group.add_argument(
            "--outside_fraction",
            help="Fraction of individuals living outside the box",
            type=float,
            default=None,
        )
        group.add_argument(
            "--file_format", help="Format of the written files", choices=["csv", "jsonl"], default=None
        )

    def run(self, vars_args: dict):
        resolved = resolve_config(self.name, vars_args, self.defaults)
        sections = run_synth(
            **(
                {
                    k: v
                    for k, v in resolved.items()
                    if k in inspect.getfullargspec(run_synth).args
                }
            )
        )
        output = resolved["output"]
        save_synth_config(resolved, os.path.join(output, CONFIG_FILENAME))
        write_report(build_report(self.name, resolved, **sections), os.path.join(output, REPORT_FILENAME))
