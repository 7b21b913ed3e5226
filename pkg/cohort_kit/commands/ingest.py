import argparse
import inspect
import logging

from ..analysis import run_ingest
from ..config import resolve_config

LOG = logging.getLogger(__name__)


class Command:
    name = "ingest"
    help = "slice raw events into an attack window and its background weeks"
    defaults = {
        "cohorts_path": None,
        "anchor": None,
        "gps_path": None,
        "city": None,
        "box": [],
        "weeks": 8,
        "duration_hours": 24.0,
        "timezone": None,
        "kind": None,
        "grid_step": 0.01,
        "skip_malformed": False,
    }

    def add_basic_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--cohorts_path",
            help="Path to the cohort map (id,label), CSV or JSON lines",
            default=None,
            required=False,
        )
        parser.add_argument(
            "--anchor",
            help="Start of the attack window: ISO-8601 time, epoch seconds or a configured attack name such as London1",
            default=None,
            required=False,
        )
        parser.add_argument(
            "--weeks",
            help="Number of background weeks W before the attack window. Default is 8",
            type=int,
            default=None,
            required=False,
        )
        parser.add_argument(
            "--duration_hours",
            help="Length of every analysis window in hours. Default is 24",
            type=float,
            default=None,
            required=False,
        )
        parser.add_argument(
            "--timezone",
            help="Zone of naive ISO times in the inputs and of the anchor, e.g. Europe/Berlin; background "
            "weeks keep its wall-clock time. Default is UTC",
            default=None,
            required=False,
        )
        parser.add_argument(
            "--kind",
            help="Keep only events of this kind (e.g. call or sms)",
            default=None,
            required=False,
        )
        parser.add_argument(
            "--skip_malformed",
            help="List malformed records in the summary instead of failing",
            action="store_true",
            default=None,
            required=False,
        )
        group = parser.add_argument_group("home location options")
        group.add_argument(
            "--gps_path",
            help="GPS records (CSV, JSON lines or GPX). Only individuals living in the box are kept",
            default=None,
            required=False,
        )
        group.add_argument(
            "--city",
            help="City whose configured bounding box selects the individuals",
            default=None,
            required=False,
        )
        group.add_argument(
            "--box",
            help="Explicit bounding box: min_lat max_lat min_lon max_lon",
            type=float,
            nargs=4,
            default=None,
            required=False,
        )
        group.add_argument(
            "--grid_step",
            help="Grid size in degrees for the most visited location. Default is 0.01",
            type=float,
            default=None,
            required=False,
        )

    def run(self, vars_args: dict):
        resolved = resolve_config(self.name, vars_args, self.defaults)
        summary = run_ingest(
            **(
                {
                    k: v
                    for k, v in resolved.items()
                    if k in inspect.getfullargspec(run_ingest).args
                }
            )
        )
        LOG.info(
            f"Kept {summary['individuals_kept']} individuals {summary['cohort_sizes']}, "
            f"events per window {summary['per_window_events']}"
        )
