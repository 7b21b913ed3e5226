import argparse
import inspect

from ..analysis import run_combine
from ..config import resolve_config
from ..report import build_report, write_report


class Command:
    name = "combine"
    help = "combine p-values with Fisher's chi-square method"
    defaults = {
        "pvalues": [],
        "reports": [],
        "transform": None,
        "tail": None,
    }

    def add_basic_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--pvalues",
            help="Probabilities to combine",
            type=float,
            nargs="+",
            default=None,
            required=False,
        )
        parser.add_argument(
            "--reports",
            help="Reports of earlier test or spike runs whose empirical p-values are combined",
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

    def run(self, vars_args: dict):
        resolved = resolve_config(self.name, vars_args, self.defaults)
        sections = run_combine(
            **(
                {
                    k: v
                    for k, v in resolved.items()
                    if k in inspect.getfullargspec(run_combine).args
                }
            )
        )
        write_report(build_report(self.name, resolved, **sections), resolved.get("output"))
