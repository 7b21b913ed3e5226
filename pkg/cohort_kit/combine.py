import logging
import math
import typing as T
from dataclasses import dataclass

from scipy import special

from .error import CohortDegenerateError
from .types_fmt import CombinedJSON, Tail, Transform

LOG = logging.getLogger(__name__)

TRANSFORMS = ("direct", "one_minus")
TAILS = ("upper", "lower")
# smallest transformed input accepted before -2 ln X could overflow
MIN_INPUT = 1e-300


def _check_chi2_args(x: float, dof: int) -> None:
    if not math.isfinite(x) or x < 0:
        raise ValueError(f"chi-square statistic must be finite and non-negative, got {x}")
    if int(dof) != dof or dof < 2:
        raise ValueError(f"degrees of freedom must be an integer >= 2, got {dof}")


def _poisson_head(y: float, terms: int) -> float:
    """exp(-y) * sum_{k<terms} y^k / k!"""
    if y < 700:
        term = math.exp(-y)
        parts = [term]
        for k in range(1, terms):
            term *= y / k
            parts.append(term)
        return math.fsum(parts)
    log_y = math.log(y)
    return math.fsum(math.exp(-y + k * log_y - math.lgamma(k + 1)) for k in range(terms))


def chi2_sf(x: float, dof: int) -> float:
    """
    P(chi2_dof > x).

    Even dof use the closed-form Poisson series; odd dof fall back to the regularized upper
    incomplete gamma function.
    """
    _check_chi2_args(x, dof)
    if x == 0:
        return 1.0
    dof = int(dof)
    if dof % 2:
        return float(special.gammaincc(dof / 2.0, x / 2.0))
    return min(1.0, _poisson_head(x / 2.0, dof // 2))


def chi2_cdf(x: float, dof: int) -> float:
    """P(chi2_dof <= x), computed directly so that small lower tails keep their digits."""
    _check_chi2_args(x, dof)
    if x == 0:
        return 0.0
    return float(special.gammainc(int(dof) / 2.0, x / 2.0))


@dataclass(frozen=True)
class CombinedTestResult:
    inputs: T.Tuple[float, ...]
    transform: Transform
    tail: Tail
    statistic: float
    dof: int
    p_combined: float
    # set when a raw zero p was replaced by a smoothed or floor value
    upper_bound: bool = False

    def as_dict(self) -> CombinedJSON:
        return {
            "inputs": list(self.inputs),
            "transform": self.transform,
            "tail": self.tail,
            "T": self.statistic,
            "dof": self.dof,
            "p_combined": self.p_combined,
            "upper_bound": self.upper_bound,
        }


def fisher_combine(
    ps: T.Sequence[float],
    *,
    transform: Transform,
    tail: Tail,
    upper_bound: bool = False,
) -> CombinedTestResult:
    """
    Combine probabilities with T = -2 sum ln X_i referred to chi-square with 2n dof.

    Args:
        ps: probabilities in (0, 1]
        transform: X_i = p_i ("direct") or 1 - p_i ("one_minus")
        tail: "upper" reports P(chi2 > T), "lower" reports P(chi2 <= T)
        upper_bound: mark the result as a bound (inputs were floored)

    Returns:
        the combined result
    """
    if transform not in TRANSFORMS:
        raise ValueError(f"Invalid transform {transform}, expect one of {TRANSFORMS}")
    if tail not in TAILS:
        raise ValueError(f"Invalid tail {tail}, expect one of {TAILS}")
    ps = [float(p) for p in ps]
    if not ps:
        raise ValueError("at least one probability is required")
    for p in ps:
        if not math.isfinite(p) or p < 0 or p > 1:
            raise ValueError(f"probability {p} outside [0, 1]")
        if p == 0:
            raise CohortDegenerateError(
                "p = 0 cannot be combined: use the smoothed empirical p or the resolution "
                "floor 1/R, and report the combined value as an upper bound"
            )

    xs = ps if transform == "direct" else [1.0 - p for p in ps]
    for p, x in zip(ps, xs):
        if x < MIN_INPUT:
            raise CohortDegenerateError(
                f"transformed input {x!r} (from p = {p!r}) is too close to 0 to combine"
            )

    statistic = -2.0 * math.fsum(math.log(x) for x in xs)
    statistic = max(statistic, 0.0)
    dof = 2 * len(xs)
    if tail == "upper":
        p_combined = chi2_sf(statistic, dof)
    else:
        p_combined = chi2_cdf(statistic, dof)
    LOG.debug(f"T = {statistic}, dof = {dof}, p_combined = {p_combined}")
    return CombinedTestResult(
        tuple(ps), transform, tail, statistic, dof, p_combined, upper_bound
    )


def combinable_pvalues(
    raw: T.Sequence[float], smoothed: T.Sequence[float]
) -> T.Tuple[T.List[float], bool]:
    """
    Raw empirical p-values with zeros replaced by their smoothed counterparts.

    Returns:
        the values and whether any replacement happened
    """
    values: T.List[float] = []
    replaced = False
    for p_raw, p_smooth in zip(raw, smoothed):
        if p_raw == 0:
            values.append(p_smooth)
            replaced = True
        else:
            values.append(p_raw)
    if replaced:
        LOG.warning("raw p = 0 replaced by the smoothed value; combined p is an upper bound")
    return values, replaced
