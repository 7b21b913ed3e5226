import argparse
import inspect

from ..analysis import run_test
from ..config import resolve_config
from ..report import build_report, write_report
from ..resampling import DEFAULT_REPLICATES


class Command:
    name = "test"
    help = "compare the attack-day divergence of the two cohorts with a null distribution"
    defaults = {
        "model": "shuffle",
        "replicates": DEFAULT_REPLICATES,
        "seed": 0,
        "threads": 1,
        "background_sampling": "replacement",
        "full_samples": False,
        "alpha": 0.01,
        "cohort_a": None,
    }

    def add_basic_arguments(self, parser: argparse.ArgumentParser):
        parser.add_argument(
            "--model",
            help="Null model: label shuffle, background resampling or both. Default is shuffle",
            choices=["shuffle", "background", "both"],
            default=None,
            required=False,
        )
        parser.add_argument(
            "--background_sampling",
            help="Draw background logs with replacement from the cohort pool, or one week per individual",
            choices=["replacement", "per_individual"],
            default=None,
            required=False,
        )
        parser.add_argument(
            "--cohort_a",
            help="Label of the first cohort. Default is the smaller label",
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
        sections = run_test(
            **(
                {
                    k: v
                    for k, v in resolved.items()
                    if k in inspect.getfullargspec(run_test).args
                }
            )
        )
        write_report(build_report(self.name, resolved, **sections), resolved.get("output"))
