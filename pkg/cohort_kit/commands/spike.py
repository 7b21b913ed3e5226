import argparse
import inspect

from ..analysis import run_spike
from ..config import resolve_config
from ..report import build_report, write_report
from ..resampling import DEFAULT_REPLICATES


class Command:
    name = "spike"
    help = "bootstrap spike test of a cohort against each background week, combined over weeks"
    defaults = {
        "pvalues": [],
        "cohort": None,
        "transform": None,
        "tail": None,
        "replicates": DEFAULT_REPLICATES,
        "seed": 0,
        "threads": 1,
        "full_samples": False,
        "alpha": 0.01,
    }

    def add_basic_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--cohort",
            help="Cohort to test. Default is both cohorts, one after the other",
            default=None,
            required=False,
        )
        parser.add_argument(
            "--pvalues",
            help="Combine these per-week p-values instead of running the bootstrap",
            type=float,
            nargs="+",
            default=None,
            required=False,
        )
        group = parser.add_argument_group("combination convention (required)")
        group.add_argument(
            "--transform",
            help="Combine -2 ln p (direct) or -2 ln (1 - p) (one_minus)",
            choices=["direct", "one_minus"],
            default=None,
            required=False,
        )
        group.add_argument(
            "--tail",
            help="Report the upper or the lower chi-square tail",
            choices=["upper", "lower"],
            default=None,
            required=False,
        )
        group = parser.add_argument_group("report options")
        group.add_argument(
            "--alpha",
            help="Level at which a raw p-value is flagged significant. Default is 0.01",
            type=float,
            default=None,
            required=False,
        )
        group.add_argument(
            "--full_samples",
            help="Dump every null sample instead of the quantile summary",
            action="store_true",
            default=None,
            required=False,
        )

    def run(self, vars_args: dict):
        resolved = resolve_config(self.name, vars_args, self.defaults)
        sections = run_spike(
            **(
                {
                    k: v
                    for k, v in resolved.items()
                    if k in inspect.getfullargspec(run_spike).args
                }
            )
        )
        write_report(build_report(self.name, resolved, **sections), resolved.get("output"))
