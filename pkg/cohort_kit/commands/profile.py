import argparse
import inspect

from ..analysis import run_profile
from ..config import resolve_config
from ..report import build_report, write_report


class Command:
    name = "profile"
    help = "diurnal activity profiles of both cohorts, normalized by the background weeks"
    defaults = {
        "bin_hours": 1.0,
        "mode": "per_bin",
        "days": 0,
        "events_path": None,
        "timezone": None,
        "kind": None,
    }

    def add_basic_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--bin_hours",
            help="Width of the profile bins in hours. Default is 1",
            type=float,
            default=None,
            required=False,
        )
        parser.add_argument(
            "--mode",
            help="Normalize every bin by its own background mean (per_bin) or by the mean over all bins (global)",
            choices=["per_bin", "global"],
            default=None,
            required=False,
        )
        group = parser.add_argument_group("following days")
        group.add_argument(
            "--days",
            help="Also profile this many days after the attack window. Needs --events_path",
            type=int,
            default=None,
            required=False,
        )
        group.add_argument(
            "--events_path",
            help="Raw events the archive was sliced from",
            default=None,
            required=False,
        )
        group.add_argument(
            "--timezone",
            help="Zone of naive ISO times in the events. Default is UTC",
            default=None,
            required=False,
        )
        group.add_argument(
            "--kind",
            help="Keep only events of this kind",
            default=None,
            required=False,
        )

    def run(self, vars_args: dict):
        resolved = resolve_config(self.name, vars_args, self.defaults)
        sections = run_profile(
            **(
                {
                    k: v
                    for k, v in resolved.items()
                    if k in inspect.getfullargspec(run_profile).args
                }
            )
        )
        write_report(build_report(self.name, resolved, **sections), resolved.get("output"))
